#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "matube/model.hpp"

namespace matube {

// One verified identity: residual statistics against its pinned tolerance.
// pass <=> max_residual <= tolerance. The anchor names the identity checked.
struct CheckResult {
  std::string name;
  std::string anchor;
  int samples = 0;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  double wall_ms = 0.0;   // printed in the summary; not serialized (see README)
  std::string error;      // first evaluation error, if any sample threw
};

struct VerificationReport {
  nlohmann::ordered_json model_meta;
  std::uint64_t seed = 42;
  int samples = 0;
  std::vector<std::string> suites;
  std::vector<CheckResult> checks;

  bool all_pass() const {
    for (const CheckResult& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

// Model descriptor serialization (cmd_build output / cmd_verify input).
nlohmann::ordered_json model_to_json(const MAModel& model);
MAModel model_from_json(const nlohmann::json& j);
MAModel load_model_descriptor(const std::string& path);

// Deterministic JSON artifact (timings excluded) and human summary (with
// timings) for a verification run.
nlohmann::ordered_json report_to_json(const VerificationReport& report);
std::string render_summary(const VerificationReport& report);

// 17-significant-digit formatting used by all CSV exports.
std::string fmt17(double v);

}  // namespace matube
