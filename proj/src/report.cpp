#include "matube/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace matube {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::ordered_json model_to_json(const MAModel& model) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json jm;
  model.metric.to_json(jm);
  j["metric"] = jm;
  j["requested_R"] = model.diag.requested_R;
  j["R"] = model.R;
  j["s_max"] = model.s_max;
  j["integrator"] = {
      {"method",
       model.cfg.method == IntegratorConfig::Method::adaptive ? "adaptive" : "fixed_rk4"},
      {"step", model.cfg.step},
      {"abs_tol", model.cfg.abs_tol},
      {"rel_tol", model.cfg.rel_tol},
  };
  j["newton"] = {{"tol", model.newton.tol}, {"max_iter", model.newton.max_iter}};
  j["fd"] = {{"hessian_step", model.fd.hessian_step},
             {"gradient_step", model.fd.gradient_step},
             {"richardson", model.fd.richardson}};
  j["diagnostics"] = {
      {"attempts", model.diag.attempts},
      {"pilot_samples", model.diag.pilot_samples},
      {"min_immersion_sv", model.diag.min_immersion_sv},
      {"min_pair_separation", model.diag.min_pair_separation},
      {"max_roundtrip_error", model.diag.max_roundtrip_error},
  };
  return j;
}

MAModel model_from_json(const nlohmann::json& j) {
  MAModel m;
  try {
    m.metric = FinslerMetric::from_json(j.at("metric"));
    m.R = j.at("R").get<double>();
    m.diag.requested_R = j.value("requested_R", m.R);
    m.s_max = j.value("s_max", 20.0);
    const auto& ji = j.at("integrator");
    m.cfg.method = ji.at("method").get<std::string>() == "adaptive"
                       ? IntegratorConfig::Method::adaptive
                       : IntegratorConfig::Method::fixed_rk4;
    m.cfg.step = ji.at("step").get<double>();
    m.cfg.abs_tol = ji.at("abs_tol").get<double>();
    m.cfg.rel_tol = ji.at("rel_tol").get<double>();
    const auto& jn = j.at("newton");
    m.newton.tol = jn.at("tol").get<double>();
    m.newton.max_iter = jn.at("max_iter").get<int>();
    const auto& jf = j.at("fd");
    m.fd.hessian_step = jf.at("hessian_step").get<double>();
    m.fd.gradient_step = jf.at("gradient_step").get<double>();
    m.fd.richardson = jf.at("richardson").get<bool>();
    if (j.contains("diagnostics")) {
      const auto& jd = j.at("diagnostics");
      m.diag.attempts = jd.value("attempts", 0);
      m.diag.pilot_samples = jd.value("pilot_samples", 0);
      m.diag.min_immersion_sv = jd.value("min_immersion_sv", 0.0);
      m.diag.min_pair_separation = jd.value("min_pair_separation", 0.0);
      m.diag.max_roundtrip_error = jd.value("max_roundtrip_error", 0.0);
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::SpecInvalid, std::string("bad model descriptor: ") + e.what());
  }
  if (!(m.R > 0)) fail(ErrorCode::SpecInvalid, "descriptor has R <= 0");
  m.cfg.validate();
  m.newton.validate();
  return m;
}

MAModel load_model_descriptor(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::SpecInvalid, "cannot open model descriptor '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::SpecInvalid, std::string("descriptor parse error: ") + e.what());
  }
  return model_from_json(j);
}

nlohmann::ordered_json report_to_json(const VerificationReport& report) {
  nlohmann::ordered_json j;
  j["model"] = report.model_meta;
  j["seed"] = report.seed;
  j["samples"] = report.samples;
  j["suites"] = report.suites;
  auto checks = nlohmann::ordered_json::array();
  for (const CheckResult& c : report.checks) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["anchor"] = c.anchor;
    jc["samples"] = c.samples;
    jc["max_residual"] = c.max_residual;
    jc["mean_residual"] = c.mean_residual;
    jc["tolerance"] = c.tolerance;
    jc["pass"] = c.pass;
    if (!c.error.empty()) jc["error"] = c.error;
    checks.push_back(jc);
  }
  j["checks"] = checks;
  j["pass"] = report.all_pass();
  return j;
}

std::string render_summary(const VerificationReport& report) {
  std::ostringstream os;
  os << "verification: seed=" << report.seed << " samples=" << report.samples << "\n";
  for (const CheckResult& c : report.checks) {
    os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  max=" << fmt17(c.max_residual)
       << " mean=" << fmt17(c.mean_residual) << " tol=" << fmt17(c.tolerance) << " n="
       << c.samples << "  [" << c.anchor << "]"
       << "  (" << static_cast<long>(c.wall_ms) << " ms)";
    if (!c.error.empty()) os << "  error: " << c.error;
    os << "\n";
  }
  os << (report.all_pass() ? "ALL CHECKS PASSED" : "SOME CHECKS FAILED") << "\n";
  return os.str();
}

}  // namespace matube
