#pragma once

#include "matube/report.hpp"

namespace matube {

inline const std::vector<std::string>& all_suites() {
  static const std::vector<std::string> s = {"ma",   "psh",       "hilbert", "leaf",
                                             "roundtrip", "contact", "frames"};
  return s;
}

struct VerifyOptions {
  std::vector<std::string> suites;  // empty = all
  int samples = 100;
  std::uint64_t seed = 42;
  int threads = 1;
};

// Run the requested identity suites; deterministic given (model, options).
// Per-sample evaluation errors become per-check failures, never aborts.
VerificationReport run_verification(const MAModel& model, const VerifyOptions& options);

// Work-queue over [0, count) with `threads` workers writing results by index.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace matube
