// matube: build Monge-Ampere tube models of analytic Finsler metrics on the
// torus and verify the identities they satisfy. See README.md for usage.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "matube/export.hpp"
#include "matube/report.hpp"
#include "matube/verify.hpp"

namespace {

using namespace matube;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::vector<double> parse_doubles(const std::string& s, char sep) {
  std::vector<double> out;
  for (const std::string& tok : split(s, sep)) out.push_back(std::stod(tok));
  return out;
}

std::vector<int> parse_res(const std::string& s) {
  std::vector<int> out;
  for (const std::string& tok : split(s, 'x')) out.push_back(std::stoi(tok));
  return out;
}

SpherePoint parse_ray(const std::string& spec, int dim) {
  const auto vals = parse_doubles(spec, ',');
  if (static_cast<int>(vals.size()) != dim + 1)
    fail(ErrorCode::SpecInvalid, "--ray needs dim base coordinates plus a ray value");
  SpherePoint p;
  p.base = Vec(dim);
  for (int j = 0; j < dim; ++j) p.base[j] = vals[j];
  p.ray = vals[dim];
  p.canonicalize();
  return p;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::SpecInvalid, "cannot write '" + path + "'");
  out << content;
}

int cmd_build(const std::string& spec_path, double radius, const std::string& out_path) {
  const FinslerMetric metric = load_metric_spec(spec_path);
  const MAModel model = build_model(metric, radius);
  write_text_file(out_path, model_to_json(model).dump(2) + "\n");
  std::cout << "built model: family=" << family_name(metric.family)
            << " dim=" << metric.dim << " R=" << fmt17(model.R) << " ("
            << model.diag.attempts << " attempt(s))\n";
  return 0;
}

int cmd_verify(const std::string& model_path, const std::string& suites,
               int samples, std::uint64_t seed, int threads,
               const std::string& json_out) {
  const MAModel model = load_model_descriptor(model_path);
  VerifyOptions opt;
  if (!suites.empty()) opt.suites = split(suites, ',');
  opt.samples = samples;
  opt.seed = seed;
  opt.threads = threads;
  const VerificationReport report = run_verification(model, opt);
  std::cout << render_summary(report);
  if (!json_out.empty())
    write_text_file(json_out, report_to_json(report).dump(2) + "\n");
  return report.all_pass() ? 0 : 1;
}

int cmd_trace(const std::string& model_path, const std::string& ray,
              const std::string& grid, double smax, double rmax,
              const std::string& out_path) {
  const MAModel model = load_model_descriptor(model_path);
  const SpherePoint p = parse_ray(ray, model.metric.dim);
  const auto res = parse_res(grid);
  if (res.size() != 2) fail(ErrorCode::SpecInvalid, "--grid must be NsxNr");
  if (rmax <= 0) rmax = 0.9 * model.R;
  std::ostringstream os;
  trace_leaf_csv(model, p, res[0], res[1], smax, rmax, os);
  write_text_file(out_path, os.str());
  std::cout << "wrote " << res[0] * res[1] << " rows to " << out_path << "\n";
  return 0;
}

int cmd_grid_u(const std::string& model_path, const std::string& window,
               const std::string& re, const std::string& resolution,
               const std::string& out_path) {
  const MAModel model = load_model_descriptor(model_path);
  const int n = model.metric.dim;
  const auto res = parse_res(resolution);
  Vec lo(n), hi(n), re_part = Vec::Zero(n);
  const auto ranges = split(window, ',');
  if (static_cast<int>(ranges.size()) != n)
    fail(ErrorCode::SpecInvalid, "--window needs one lo:hi range per dimension");
  for (int j = 0; j < n; ++j) {
    const auto lh = split(ranges[j], ':');
    if (lh.size() != 2) fail(ErrorCode::SpecInvalid, "window range must be lo:hi");
    lo[j] = std::stod(lh[0]);
    hi[j] = std::stod(lh[1]);
  }
  if (!re.empty()) {
    const auto vals = parse_doubles(re, ',');
    if (static_cast<int>(vals.size()) != n)
      fail(ErrorCode::SpecInvalid, "--re needs dim values");
    for (int j = 0; j < n; ++j) re_part[j] = vals[j];
  }
  std::ostringstream os;
  grid_u_csv(model, re_part, lo, hi, res, os);
  write_text_file(out_path, os.str());
  std::cout << "wrote grid to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monge-Ampere tube models of analytic Finsler metrics on T^n"};
  app.require_subcommand(1);

  std::string spec_path, model_path, out_path, json_out, suites, ray, grid = "11x11";
  std::string window, re_part, resolution;
  double radius = 0.5, smax = 1.0, rmax = 0.0;
  int samples = 100, threads = 1;
  std::uint64_t seed = 42;

  auto* b = app.add_subcommand("build", "build a model from a metric spec file");
  b->add_option("--spec", spec_path, "metric spec JSON")->required();
  b->add_option("--radius", radius, "requested tube height R");
  b->add_option("--out", out_path, "output model descriptor path")->required();

  auto* v = app.add_subcommand("verify", "run identity verification suites");
  v->add_option("--model", model_path, "model descriptor JSON")->required();
  v->add_option("--suite", suites, "comma-separated subset of: ma,psh,hilbert,leaf,roundtrip,contact,frames");
  v->add_option("--samples", samples, "samples per check");
  v->add_option("--seed", seed, "sampling seed");
  v->add_option("--threads", threads, "worker threads for per-sample evaluation");
  v->add_option("--json", json_out, "write the JSON report here");

  auto* t = app.add_subcommand("trace", "export leaf samples over the (s, r) strip");
  t->add_option("--model", model_path, "model descriptor JSON")->required();
  t->add_option("--ray", ray, "x1,..,xn,ray")->required();
  t->add_option("--grid", grid, "NsxNr");
  t->add_option("--smax", smax, "real-time extent of the grid");
  t->add_option("--rmax", rmax, "imaginary-time extent (default 0.9 R)");
  t->add_option("--out", out_path, "output CSV path")->required();

  auto* g = app.add_subcommand("grid-u", "export a grid of u over an imaginary-part window");
  g->add_option("--model", model_path, "model descriptor JSON")->required();
  g->add_option("--window", window, "lo:hi per dimension, comma separated")->required();
  g->add_option("--re", re_part, "fixed real part (default zeros)");
  g->add_option("--res", resolution, "N1xN2 (or N for dim 1)")->required();
  g->add_option("--out", out_path, "output CSV path")->required();

  try {
    app.parse(argc, argv);
    if (b->parsed()) return cmd_build(spec_path, radius, out_path);
    if (v->parsed()) return cmd_verify(model_path, suites, samples, seed, threads, json_out);
    if (t->parsed()) return cmd_trace(model_path, ray, grid, smax, rmax, out_path);
    if (g->parsed()) return cmd_grid_u(model_path, window, re_part, resolution, out_path);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const matube::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
