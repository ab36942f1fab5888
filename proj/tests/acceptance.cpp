// Acceptance suite: runs every reproduction criterion at its pinned
// tolerance and prints one pass/fail line per criterion.
//
//   smatch_acceptance            run all criteria
//   smatch_acceptance --only K   run criterion K only
//   smatch_acceptance --threads T

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <vector>

#include "smatch/verify.hpp"

int main(int argc, char** argv) {
  int only = 0;
  smatch::verify::Options opts;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--only") && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (!std::strcmp(argv[i], "--threads") && i + 1 < argc) {
      opts.threads = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--only K] [--threads T]\n", argv[0]);
      return 1;
    }
  }

  std::vector<int> criteria;
  if (only > 0) {
    criteria.push_back(only);
  } else {
    for (int k = 1; k <= smatch::verify::kNumCriteria; ++k)
      criteria.push_back(k);
  }

  bool all_pass = true;
  for (int k : criteria) {
    auto r = smatch::verify::run_criterion(k, opts);
    std::printf("criterion %2d [%s] %s (%.1fs)\n    %s\n", r.criterion,
                r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                r.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && r.pass;
  }
  std::printf(all_pass ? "acceptance: all criteria passed\n"
                       : "acceptance: FAILURES above\n");
  return all_pass ? 0 : 1;
}
