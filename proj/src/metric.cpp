#include "matube/metric.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace matube {

const char* family_name(MetricFamily f) {
  switch (f) {
    case MetricFamily::riemannian_conformal: return "riemannian_conformal";
    case MetricFamily::randers: return "randers";
    case MetricFamily::minkowski: return "minkowski";
  }
  return "unknown";
}

MetricFamily family_from_name(const std::string& name) {
  if (name == "riemannian_conformal") return MetricFamily::riemannian_conformal;
  if (name == "randers") return MetricFamily::randers;
  if (name == "minkowski") return MetricFamily::minkowski;
  fail(ErrorCode::SpecInvalid, "unknown metric family '" + name + "'");
}

double FinslerMetric::conformal_reserve() const {
  double s = 0.0;
  for (const ConformalMode& m : conformal) s += std::abs(m.a) + std::abs(m.b);
  return 1.0 - s;
}

bool FinslerMetric::is_flat() const {
  if (family != MetricFamily::riemannian_conformal) return true;  // constant b
  for (const ConformalMode& m : conformal) {
    bool zero_k = true;
    for (int j = 0; j < dim; ++j) zero_k = zero_k && (m.k[j] == 0);
    if (!zero_k && (m.a != 0.0 || m.b != 0.0)) return false;
  }
  return true;
}

void FinslerMetric::validate() const {
  if (dim != 1 && dim != 2)
    fail(ErrorCode::SpecInvalid, "dim must be 1 or 2, got " + std::to_string(dim));
  if (!(branch_margin > 0))
    fail(ErrorCode::SpecInvalid, "branch_margin must be > 0");
  switch (family) {
    case MetricFamily::riemannian_conformal:
      if (b.size() != 0)
        fail(ErrorCode::SpecInvalid, "conformal family takes no drift covector b");
      if (!(conformal_reserve() > 0))
        fail(ErrorCode::SpecInvalid,
             "conformal coefficients violate 1 - sum(|a|+|b|) > 0 (lambda may vanish)");
      break;
    case MetricFamily::randers:
    case MetricFamily::minkowski:
      if (!conformal.empty())
        fail(ErrorCode::SpecInvalid, "randers/minkowski family takes no conformal modes");
      if (b.size() != dim)
        fail(ErrorCode::SpecInvalid, "drift covector b must have length dim");
      if (!(b.norm() < 1.0))
        fail(ErrorCode::SpecInvalid, "|b| must be < 1 for strong convexity");
      break;
  }
}

FinslerMetric FinslerMetric::euclidean(int n) {
  FinslerMetric m;
  m.family = MetricFamily::riemannian_conformal;
  m.dim = n;
  m.b = Vec();
  m.validate();
  return m;
}

FinslerMetric FinslerMetric::randers_drift(const Vec& b) {
  FinslerMetric m;
  m.family = MetricFamily::randers;
  m.dim = static_cast<int>(b.size());
  m.b = b;
  m.validate();
  return m;
}

FinslerMetric FinslerMetric::minkowski_drift(const Vec& b) {
  FinslerMetric m;
  m.family = MetricFamily::minkowski;
  m.dim = static_cast<int>(b.size());
  m.b = b;
  m.validate();
  return m;
}

FinslerMetric FinslerMetric::conformal_mode(int n, const std::array<int, kMaxDim>& k,
                                            double a, double b) {
  FinslerMetric m;
  m.family = MetricFamily::riemannian_conformal;
  m.dim = n;
  m.conformal.push_back(ConformalMode{k, a, b});
  m.b = Vec();
  m.validate();
  return m;
}

// Schema: {"family": "...", "dim": n,
//          "conformal": [[k1,...,kn, a, b], ...],   (riemannian_conformal)
//          "b": [b1,...,bn]}                        (randers / minkowski)
FinslerMetric FinslerMetric::from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::SpecInvalid, "metric spec must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key != "family" && key != "dim" && key != "conformal" && key != "b" &&
        key != "branch_margin")
      fail(ErrorCode::SpecInvalid, "unknown metric spec field '" + key + "'");
  }
  if (!j.contains("family") || !j.at("family").is_string())
    fail(ErrorCode::SpecInvalid, "metric spec needs a string 'family'");
  if (!j.contains("dim") || !j.at("dim").is_number_integer())
    fail(ErrorCode::SpecInvalid, "metric spec needs an integer 'dim'");

  FinslerMetric m;
  m.family = family_from_name(j.at("family").get<std::string>());
  m.dim = j.at("dim").get<int>();
  if (m.dim != 1 && m.dim != 2) fail(ErrorCode::SpecInvalid, "dim must be 1 or 2");

  if (j.contains("branch_margin")) {
    if (!j.at("branch_margin").is_number())
      fail(ErrorCode::SpecInvalid, "branch_margin must be a number");
    m.branch_margin = j.at("branch_margin").get<double>();
  }

  if (j.contains("conformal")) {
    if (!j.at("conformal").is_array())
      fail(ErrorCode::SpecInvalid, "'conformal' must be an array of modes");
    for (const auto& row : j.at("conformal")) {
      if (!row.is_array() || static_cast<int>(row.size()) != m.dim + 2)
        fail(ErrorCode::SpecInvalid,
             "each conformal mode must be [k1,...,kn, a, b] with n = dim");
      ConformalMode mode;
      for (int c = 0; c < m.dim; ++c) {
        if (!row[c].is_number())
          fail(ErrorCode::SpecInvalid, "conformal wave numbers must be numeric");
        double kv = row[c].get<double>();
        if (kv != std::floor(kv))
          fail(ErrorCode::SpecInvalid, "conformal wave numbers must be integers");
        mode.k[c] = static_cast<int>(kv);
      }
      mode.a = row[m.dim].get<double>();
      mode.b = row[m.dim + 1].get<double>();
      m.conformal.push_back(mode);
    }
  }

  if (j.contains("b")) {
    if (!j.at("b").is_array())
      fail(ErrorCode::SpecInvalid, "'b' must be an array of numbers");
    m.b = Vec(j.at("b").size());
    for (int c = 0; c < m.b.size(); ++c) m.b[c] = j.at("b")[c].get<double>();
  }

  m.validate();
  return m;
}

void FinslerMetric::to_json(nlohmann::ordered_json& j) const {
  j = nlohmann::ordered_json::object();
  j["family"] = family_name(family);
  j["dim"] = dim;
  if (family == MetricFamily::riemannian_conformal) {
    auto arr = nlohmann::ordered_json::array();
    for (const ConformalMode& m : conformal) {
      auto row = nlohmann::ordered_json::array();
      for (int c = 0; c < dim; ++c) row.push_back(m.k[c]);
      row.push_back(m.a);
      row.push_back(m.b);
      arr.push_back(row);
    }
    j["conformal"] = arr;
  } else {
    auto arr = nlohmann::ordered_json::array();
    for (int c = 0; c < b.size(); ++c) arr.push_back(b[c]);
    j["b"] = arr;
  }
  if (branch_margin != 1e-6) j["branch_margin"] = branch_margin;
}

FinslerMetric load_metric_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::SpecInvalid, "cannot open metric spec '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::SpecInvalid, std::string("metric spec parse error: ") + e.what());
  }
  return FinslerMetric::from_json(j);
}

double check_homogeneity(const FinslerMetric& m, const Vec& x, const Vec& v, double t) {
  if (!(t > 0)) fail(ErrorCode::NonpositiveScale, "homogeneity scale t must be > 0");
  const Vec tv = t * v;
  return std::abs(eval_F<double>(m, x, tv) - t * eval_F<double>(m, x, v));
}

}  // namespace matube
