#include <gtest/gtest.h>

#include "oracles.hpp"
#include "remset/iterated.hpp"

using namespace remset;

TEST(Levels, MatchNaiveIteration) {
  for (std::uint64_t n = 1; n <= 300; ++n) {
    const auto ref = oracle::levels(n, 12);
    const auto prof = iterated_profile(n, 12);
    for (std::size_t j = 0; j < prof.sizes.size(); ++j) {
      ASSERT_EQ(prof.sizes[j], ref[j].size()) << n << ' ' << j;
      ASSERT_EQ(prof.members(j), std::vector<std::uint64_t>(ref[j].begin(), ref[j].end()));
    }
    // The profile stops after the first empty level.
    for (std::size_t j = prof.sizes.size(); j < ref.size(); ++j) ASSERT_TRUE(ref[j].empty());
  }
}

TEST(Levels, FrozenThousand) {
  const auto prof = iterated_profile(1000, 8);
  EXPECT_EQ(prof.sizes, (std::vector<std::uint64_t>{500, 229, 96, 42, 18, 8, 4, 2, 1}));
  EXPECT_EQ(prof.maxima, (std::vector<std::int64_t>{500, 332, 244, 192, 160, 64, 40, 4, 0}));
}

TEST(Levels, SizerAgreesWithProfile) {
  const auto t = build_spf(50'000);
  LevelSizer fast(&t), slow;
  auto g = oracle::rng(9);
  for (int i = 0; i < 200; ++i) {
    const auto n = oracle::uniform(g, 1, 50'000);
    const auto prof = iterated_profile(n, 7);
    const auto a = fast(n, 7), b = slow(n, 7);
    ASSERT_EQ(a.sizes, b.sizes) << n;
    ASSERT_EQ(a.maxima, b.maxima) << n;
    for (std::size_t j = 0; j < prof.sizes.size(); ++j) {
      ASSERT_EQ(a.sizes[j], prof.sizes[j]);
      ASSERT_EQ(a.maxima[j], prof.maxima[j]);
    }
  }
}

TEST(Levels, UpperAndLowerBounds) {
  LevelSizer sizer;
  for (std::uint64_t n = 1; n <= 5000; ++n) {
    const auto st = sizer(n, 6);
    for (unsigned j = 0; j <= 6; ++j) {
      ASSERT_LE(static_cast<std::int64_t>(st.sizes[j]) - 1, st.maxima[j]) << n << ' ' << j;
      ASSERT_LE(st.maxima[j], static_cast<std::int64_t>(n / (j + 2))) << n << ' ' << j;
    }
  }
}

TEST(Pierce, Chain35) {
  const auto c = pierce_chain(35, 22);
  EXPECT_EQ(c.terms, (std::vector<std::uint64_t>{22, 13, 9, 8, 3, 2, 1, 0}));
  EXPECT_EQ(c.length(), 7u);
  EXPECT_EQ(pierce_length(35, 22), 7u);
  EXPECT_EQ(pierce_max(35).length, 7u);
  EXPECT_EQ(pierce_max(35).argmax, 22u);
}

TEST(Pierce, MaxMatchesExhaustive) {
  const std::uint64_t first[] = {1, 1, 2, 2, 3, 2, 3, 3, 3, 3, 5, 3, 4, 4, 3,
                                 3, 5, 4, 6, 4, 4, 5, 6, 3, 5, 4, 5, 4, 5, 4};
  for (std::uint64_t n = 1; n <= 30; ++n) EXPECT_EQ(pierce_max(n).length, first[n - 1]) << n;
  for (std::uint64_t n = 1; n <= 600; ++n) {
    const auto m = pierce_max(n);
    ASSERT_EQ(m.length, oracle::pierce_max(n)) << n;
    ASSERT_EQ(pierce_length(n, m.argmax), m.length);
    for (std::uint64_t a = 1; a < m.argmax; ++a) ASSERT_LT(pierce_length(n, a), m.length);
  }
}

TEST(Pierce, DepthRelation) {
  for (std::uint64_t n = 3; n <= 2000; ++n) ASSERT_TRUE(depth_relation_check(n)) << n;
  EXPECT_THROW(depth_relation_check(2), std::invalid_argument);
}

TEST(Pierce, Errors) {
  EXPECT_THROW(pierce_chain(10, 0), std::invalid_argument);
  EXPECT_THROW(pierce_chain(10, 11), std::invalid_argument);
  EXPECT_THROW(pierce_max(0), std::invalid_argument);
  EXPECT_THROW(iterated_profile(0, 3), std::invalid_argument);
}

TEST(Witness, FrozenAndRecursion) {
  const std::uint64_t expect[] = {0, 1, 2, 3, 20, 635, 630, 35315};
  for (unsigned j = 0; j < 8; ++j) EXPECT_EQ(progression_witness(35, j), expect[j]);
  auto g = oracle::rng(10);
  for (int i = 0; i < 200; ++i) {
    const auto n = oracle::uniform(g, 1, 1'000'000'000);
    for (unsigned j = 0; j < 12; ++j) {
      const auto x = progression_witness(n, j);
      ASSERT_LT(x, factorial(j + 1));
      const auto next = progression_witness(n, j + 1);
      const __int128 lhs = static_cast<__int128>(j + 2) * x + next;
      ASSERT_EQ(static_cast<std::uint64_t>(lhs % factorial(j + 2)), n % factorial(j + 2));
    }
  }
  EXPECT_THROW(progression_witness(5, kMaxWitnessLevel + 1), std::out_of_range);
}

TEST(Witness, ProgressionsLieInLevels) {
  for (std::uint64_t n = 10'001; n <= 10'030; ++n)
    for (unsigned j = 0; j <= 3; ++j) {
      const auto wc = progression_witness_check(n, j, progression_witness(n, j));
      EXPECT_TRUE(wc.holds) << n << ' ' << j;
      EXPECT_FALSE(wc.below_threshold);
      EXPECT_GT(wc.checked, 0u);
    }
  EXPECT_TRUE(progression_witness_check(20, 3, progression_witness(20, 3)).below_threshold);
  EXPECT_EQ(witness_threshold(1), 18u);
}

TEST(Bands, RowsMatchSizer) {
  const auto t = build_spf(20'000);
  std::vector<BandRow> rows;
  bands_scan(1, 20'000, 2, [&](const BandRow& r) { rows.push_back(r); }, 3, &t);
  ASSERT_EQ(rows.size(), 20'000u);
  LevelSizer sizer;
  for (const auto& r : rows) {
    ASSERT_EQ(r.s_j, sizer(r.n, 2).sizes[2]);
    ASSERT_EQ(r.mod6, r.n % 6);
    ASSERT_EQ(r.div5, r.n % 5 == 0);
  }
  EXPECT_THROW(bands_scan(1, 10, 0, [](const BandRow&) {}), std::invalid_argument);
}
