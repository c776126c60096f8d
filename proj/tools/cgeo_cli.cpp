#include <CLI11.hpp>
#include <json.hpp>

#include "cgeo/verification.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

using namespace cgeo;
using Eigen::VectorXcd;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitIo = 3;

bool verbose() {
  const char* v = std::getenv("LG_LOG");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

void log(const std::string& msg) {
  if (verbose()) std::cerr << "cgeo: " << msg << "\n";
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Domain load_domain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read domain config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return domain_from_json(ss.str());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid domain config: ") + e.what());
  }
}

// Complex vectors on the command line: "re,im,re,im,...".
VectorXcd parse_cvec(const std::string& text, const std::string& flag) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      parts.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError(flag + ": cannot parse '" + tok + "' as a number");
    }
  }
  if (parts.empty() || parts.size() % 2 != 0)
    throw ConfigError(flag + ": expected an even list re,im,re,im,...");
  VectorXcd out(parts.size() / 2);
  for (size_t i = 0; i < parts.size(); i += 2)
    out[i / 2] = cplx(parts[i], parts[i + 1]);
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

std::string trace_csv(const GeodesicDisc& g) {
  std::ostringstream os;
  os.precision(17);
  const int n = g.phi.dim();
  os << "re_zeta,im_zeta";
  for (int i = 0; i < n; ++i) os << ",re_phi" << i + 1;
  for (int i = 0; i < n; ++i) os << ",im_phi" << i + 1;
  os << "\n";
  for (int j = 0; j < g.phi.num_nodes(); ++j) {
    const cplx zj = g.phi.node(j);
    const VectorXcd v = g.phi.value(j);
    os << zj.real() << "," << zj.imag();
    for (int i = 0; i < n; ++i) os << "," << v[i].real();
    for (int i = 0; i < n; ++i) os << "," << v[i].imag();
    os << "\n";
  }
  return os.str();
}

// Grid spec "RxC@radius[:axis]": an R x C grid on [-radius, radius]^2 in
// coordinate `axis` (1-based), other coordinates zero.
std::vector<VectorXcd> parse_grid(const std::string& spec, int dim) {
  int rows = 0, cols = 0, axis = 1;
  double radius = 0.0;
  char x = 0, at = 0;
  std::stringstream ss(spec);
  ss >> rows >> x >> cols >> at >> radius;
  if (!ss || x != 'x' || at != '@' || rows < 1 || cols < 1 || radius <= 0.0)
    throw ConfigError("--grid: expected RxC@radius[:axis], got '" + spec +
                      "'");
  char colon = 0;
  if (ss >> colon) {
    if (colon != ':' || !(ss >> axis) || axis < 1 || axis > dim)
      throw ConfigError("--grid: bad axis in '" + spec + "'");
  }
  std::vector<VectorXcd> pts;
  pts.reserve(static_cast<size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double re =
          rows == 1 ? 0.0 : -radius + 2.0 * radius * r / (rows - 1);
      const double im =
          cols == 1 ? 0.0 : -radius + 2.0 * radius * c / (cols - 1);
      VectorXcd z = VectorXcd::Zero(dim);
      z[axis - 1] = cplx(re, im);
      pts.push_back(std::move(z));
    }
  return pts;
}

std::vector<FieldSample> evaluate_grid(const Domain& dom, const VectorXcd& p,
                                       const std::vector<VectorXcd>& pts,
                                       int jobs) {
  jobs = std::max(1, std::min<int>(jobs, pts.size()));
  if (jobs == 1) return evaluate_field(dom, p, pts);
  std::vector<std::vector<FieldSample>> parts(jobs);
  std::vector<std::thread> workers;
  const size_t chunk = (pts.size() + jobs - 1) / jobs;
  for (int t = 0; t < jobs; ++t)
    workers.emplace_back([&, t] {
      const size_t lo = t * chunk;
      const size_t hi = std::min(pts.size(), lo + chunk);
      if (lo < hi)
        parts[t] = evaluate_field(
            dom, p, std::vector<VectorXcd>(pts.begin() + lo, pts.begin() + hi));
    });
  for (auto& w : workers) w.join();
  std::vector<FieldSample> out;
  out.reserve(pts.size());
  for (auto& part : parts)
    for (auto& s : part) out.push_back(std::move(s));
  return out;
}

int cmd_geodesic(const std::string& domain_path, const std::string& p_text,
                 const std::string& vhat_text, int nodes, double tol,
                 const std::string& out_path, std::string trace_path) {
  const Domain dom = load_domain(domain_path);
  const VectorXcd p_raw = parse_cvec(p_text, "--p");
  const VectorXcd vhat = parse_cvec(vhat_text, "--vhat");
  if (p_raw.size() != dom.dim)
    throw ConfigError("--p: expected dimension " + std::to_string(dom.dim));
  if (vhat.size() != dom.dim - 1)
    throw ConfigError("--vhat: expected dimension " +
                      std::to_string(dom.dim - 1));
  if (vhat.norm() >= 1.0)
    throw ConfigError("--vhat: fiber coordinate must have norm < 1");
  const VectorXcd p = project_to_boundary(dom, p_raw);

  SolveOptions opts;
  opts.num_nodes = nodes;
  opts.tol = tol;
  log("solving geodesic at N = " + std::to_string(nodes));
  const GeodesicDisc g = solve_preferred(dom, p, vhat, opts);
  log("converged in " + std::to_string(g.newton_iterations) +
      " iterations, residual " +
      std::to_string(g.diagnostics.sup_norm()));

  nlohmann::json j = nlohmann::json::parse(geodesic_to_json(g));
  j["flags"] = {{"domain", domain_path}, {"p", p_text},
                {"vhat", vhat_text},     {"nodes", nodes},
                {"tol", tol},            {"out", out_path}};
  if (trace_path.empty()) trace_path = out_path + ".trace.csv";
  write_file(out_path, j.dump(2));
  write_file(trace_path, trace_csv(g));
  return 0;
}

int cmd_field(const std::string& domain_path, const std::string& p_text,
              const std::string& grid_spec, const std::string& quantity,
              const std::string& out_path, int jobs) {
  if (quantity != "P" && quantity != "psi")
    throw ConfigError("--quantity must be P or psi");
  const Domain dom = load_domain(domain_path);
  VectorXcd p = parse_cvec(p_text, "--p");
  if (p.size() != dom.dim)
    throw ConfigError("--p: expected dimension " + std::to_string(dom.dim));
  p = project_to_boundary(dom, p);
  const std::vector<VectorXcd> pts = parse_grid(grid_spec, dom.dim);
  log("evaluating " + quantity + " on " + std::to_string(pts.size()) +
      " grid points");
  const std::vector<FieldSample> samples = evaluate_grid(dom, p, pts, jobs);
  int failed = 0;
  for (const auto& s : samples) failed += s.converged ? 0 : 1;
  log(std::to_string(failed) + " unconverged points");
  write_file(out_path, field_csv(samples));
  return 0;
}

int cmd_verify(const std::string& domain_path, const std::string& suite,
               const std::string& out_path, int count, unsigned seed) {
  if (suite != "geodesic" && suite != "hcma" && suite != "smoothness" &&
      suite != "all")
    throw ConfigError("--suite must be geodesic|hcma|smoothness|all");
  const Domain dom = load_domain(domain_path);
  const VectorXcd anchor = boundary_samples(dom, 1, seed).front();

  std::vector<VerifyReport> reports;
  if (suite == "geodesic" || suite == "all") {
    log("running geodesic battery");
    SamplePlan plan;
    plan.count = count;
    plan.seed = seed;
    reports.push_back(run_geodesic_battery(dom, plan));
  }
  if (suite == "hcma" || suite == "all") {
    log("running hcma boundary probe");
    reports.push_back(hcma_boundary_probe(dom, anchor));
  }
  if (suite == "smoothness" || suite == "all") {
    log("running smoothness probe");
    VectorXcd vhat = VectorXcd::Zero(dom.dim - 1);
    vhat[0] = cplx(0.2, 0.1);
    SmoothnessDirection dir;
    dir.dp = VectorXcd::Zero(dom.dim);
    dir.dvhat = VectorXcd::Zero(dom.dim - 1);
    dir.dvhat[0] = cplx(0.1, -0.05);
    reports.push_back(parameter_smoothness_probe(dom, anchor, vhat, dir));
  }

  bool all_pass = true;
  nlohmann::json out;
  out["flags"] = {{"domain", domain_path}, {"suite", suite},
                  {"out", out_path},       {"count", count},
                  {"seed", seed}};
  out["suites"] = nlohmann::json::array();
  for (const auto& rep : reports) {
    out["suites"].push_back(nlohmann::json::parse(report_to_json(rep)));
    all_pass = all_pass && rep.pass;
  }
  out["pass"] = all_pass;
  if (!out_path.empty()) write_file(out_path, out.dump(2));
  std::cout << (all_pass ? "pass" : "fail") << "\n";
  return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Complex geodesics, boundary representations, and the "
               "pluricomplex Poisson kernel on strongly linearly convex "
               "domains"};
  app.require_subcommand(1);

  std::string domain_path, p_text, vhat_text, out_path, trace_path;
  std::string grid_spec, quantity = "P", suite = "all";
  int nodes = kDefaultNodes, jobs = 1, count = 20;
  unsigned seed = 2026;
  double tol = kTolGeo;

  auto* geo = app.add_subcommand(
      "geodesic", "Solve a preferred geodesic and export disc data");
  geo->add_option("--domain", domain_path, "Domain config JSON")->required();
  geo->add_option("--p", p_text, "Boundary anchor, re,im per coordinate")
      ->required();
  geo->add_option("--vhat", vhat_text, "Fiber coordinate, re,im pairs")
      ->required();
  geo->add_option("--nodes", nodes, "Circle nodes (even)");
  geo->add_option("--tol", tol, "Newton residual tolerance");
  geo->add_option("--out", out_path, "Output JSON path")->required();
  geo->add_option("--trace", trace_path,
                  "Trace CSV path (default <out>.trace.csv)");

  auto* fld = app.add_subcommand(
      "field", "Evaluate the Poisson kernel or psi on a planar grid");
  fld->add_option("--domain", domain_path, "Domain config JSON")->required();
  fld->add_option("--p", p_text, "Boundary anchor, re,im per coordinate")
      ->required();
  fld->add_option("--grid", grid_spec, "Grid spec RxC@radius[:axis]")
      ->required();
  fld->add_option("--quantity", quantity, "P or psi");
  fld->add_option("--out", out_path, "Output CSV path")->required();
  fld->add_option("--jobs", jobs, "Parallel grid workers");

  auto* ver = app.add_subcommand("verify", "Run verification suites");
  ver->add_option("--domain", domain_path, "Domain config JSON")->required();
  ver->add_option("--suite", suite, "geodesic|hcma|smoothness|all");
  ver->add_option("--out", out_path, "Report JSON path");
  ver->add_option("--count", count, "Battery sample count");
  ver->add_option("--seed", seed, "Battery sample seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (geo->parsed())
      return cmd_geodesic(domain_path, p_text, vhat_text, nodes, tol,
                          out_path, trace_path);
    if (fld->parsed())
      return cmd_field(domain_path, p_text, grid_spec, quantity, out_path,
                       jobs);
    return cmd_verify(domain_path, suite, out_path, count, seed);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NotSLC& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
}
