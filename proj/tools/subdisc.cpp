// Command line entry point.  Subcommands are wired up as the corresponding
// library modules land; see tools/cli.hpp once present.

#include <cstdio>

int main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::printf("subdisc: no subcommands wired yet\n");
  return 1;
}
