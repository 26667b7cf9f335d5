#include "remset/cli.hpp"

int main(int argc, char** argv) {
  return remset::dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
