#pragma once

// The acceptance suite: nine self-contained checks, each pinning one headline
// property of the toolkit (closed forms, envelope fits, propagation of the
// wave front set, flow algebra, series consistency, unitarity, window
// independence). Each check returns a pass/fail verdict with its measured
// value and threshold; when an artifacts directory is given it also writes a
// JSON report (timings are kept out of the reports so reruns are
// byte-identical).

#include <string>
#include <vector>

namespace gwf {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;   // headline metric (see detail for sub-checks)
  double threshold = 0.0;
  std::string detail;
  double seconds = 0.0;    // wall time; never serialized
};

const std::vector<std::string>& acceptance_check_names();

// Throws std::invalid_argument for an unknown name. artifacts_dir may be
// empty; otherwise it must already exist.
CheckResult run_acceptance_check(const std::string& name,
                                 const std::string& artifacts_dir = "");

}  // namespace gwf
