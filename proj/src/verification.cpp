#include "cgeo/verification.hpp"

#include <json.hpp>

#include <cmath>
#include <random>

namespace cgeo {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

namespace {

VectorXcd eval(const CircleField& u, cplx z) {
  return holomorphic_extend(u, z, std::numeric_limits<double>::max());
}

VerifyCheck make_check(const std::string& name, double viol, double thr) {
  return {name, viol, thr, viol <= thr};
}

void finish(VerifyReport& rep) {
  rep.pass = rep.failed_solves == 0;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
}

MatrixXd rotation_matrix(int n) {
  MatrixXd U = MatrixXd::Identity(n, n);
  const double c = std::cos(0.7), s = std::sin(0.7);
  U(0, 0) = c;
  U(0, 1) = -s;
  U(1, 0) = s;
  U(1, 1) = c;
  return U;
}

Domain rotate_domain(const Domain& dom, const MatrixXd& U) {
  if (dom.type == "ball") return make_ball(dom.dim);
  return make_ellipsoid(dom.dim, U * dom.B * U.transpose(), dom.epsilon);
}

}  // namespace

std::string report_to_json(const VerifyReport& rep) {
  nlohmann::json j;
  j["suite"] = rep.suite;
  j["pass"] = rep.pass;
  j["failed_solves"] = rep.failed_solves;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name},
                      {"max_violation", c.max_violation},
                      {"threshold", c.threshold},
                      {"pass", c.pass}});
  j["checks"] = std::move(checks);
  return j.dump();
}

VerifyReport run_geodesic_battery(const Domain& dom, const SamplePlan& plan) {
  const int n = dom.dim;
  VerifyReport rep;
  rep.suite = "geodesic";
  std::mt19937 rng(plan.seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> ur(0.1, 0.45);

  const MatrixXd U = rotation_matrix(n);
  const MatrixXcd Uc = U.cast<cplx>();
  const Domain dom_rot = rotate_domain(dom, U);

  const auto anchors = boundary_samples(dom, plan.count, plan.seed);
  double v_prop = 0.0, v_dual = 0.0, v_wind = 0.0, v_norm = 0.0,
         v_equi = 0.0;
  SolveOptions opts;
  opts.tol = plan.solver_tol;

  for (const VectorXcd& p : anchors) {
    VectorXcd vhat(n - 1);
    for (int k = 0; k < n - 1; ++k) vhat[k] = cplx(gauss(rng), gauss(rng));
    vhat *= ur(rng) / vhat.norm();

    GeodesicDisc g;
    try {
      g = solve_preferred(dom, p, vhat, opts);
    } catch (const std::runtime_error&) {
      ++rep.failed_solves;
      continue;
    }

    for (int j = 0; j < g.phi.num_nodes(); ++j)
      v_prop = std::max(v_prop, std::abs(dom.rho(g.phi.value(j))));
    v_dual = std::max(
        v_dual, analytic_projection(dual_candidate(dom, g.phi)).sup_norm());

    // Winding of <z0 - phi, nu(phi)> for the interior probe z0 = 0.
    MatrixXcd wv(1, g.phi.num_nodes());
    for (int j = 0; j < g.phi.num_nodes(); ++j) {
      const VectorXcd ph = g.phi.value(j);
      wv(0, j) = ((-ph).transpose() * dom.grad(ph))(0);
    }
    try {
      v_wind = std::max(
          v_wind, double(std::abs(
                      winding_number(CircleField::from_values(wv)))));
    } catch (const std::runtime_error&) {
      v_wind = std::max(v_wind, 1.0);
    }

    const ThetaBlocks& d = g.diagnostics;
    v_norm = std::max({v_norm, d.point_block.cwiseAbs().maxCoeff(),
                       d.deriv_block.cwiseAbs().maxCoeff(),
                       std::abs(d.normalization_block)});

    // Equivariance under the fixed real rotation.
    try {
      const VectorXcd p2 = Uc * p;
      const VectorXcd v2 = Uc * fiber_unchart(dom, p, vhat);
      const VectorXcd vhat2 = fiber_chart(dom_rot, p2, v2);
      SolveOptions o2 = opts;
      o2.initial = CircleField::from_values(Uc * g.phi.values());
      const GeodesicDisc g2 = solve_preferred(dom_rot, p2, vhat2, o2);
      v_equi = std::max(
          v_equi,
          (g2.phi.values() - Uc * g.phi.values()).cwiseAbs().maxCoeff());
    } catch (const std::runtime_error&) {
      ++rep.failed_solves;
    }
  }

  rep.checks.push_back(make_check("properness", v_prop, plan.tol_properness));
  rep.checks.push_back(make_check("dual_holomorphy", v_dual, plan.tol_dual));
  rep.checks.push_back(make_check("winding", v_wind, 0.5));
  rep.checks.push_back(
      make_check("normalization", v_norm, plan.tol_normalization));
  rep.checks.push_back(
      make_check("equivariance", v_equi, plan.tol_equivariance));
  finish(rep);
  return rep;
}

VerifyReport parameter_smoothness_probe(const Domain& dom, const VectorXcd& p,
                                        const VectorXcd& vhat,
                                        const SmoothnessDirection& dir,
                                        double h) {
  VerifyReport rep;
  rep.suite = "smoothness";
  const std::vector<cplx> zetas = {cplx(0.0, 0.0), cplx(0.4, 0.0),
                                   cplx(0.3, 0.35)};

  SolveOptions opts;
  opts.tol = 1e-11;
  opts.max_iter = 40;
  CircleField warm;
  auto sample = [&](double tau) {
    VectorXcd pt = p;
    if (dir.dp.size() > 0 && dir.dp.norm() > 0.0)
      pt = project_to_boundary(dom, p + tau * dir.dp);
    VectorXcd vt = vhat;
    if (dir.dvhat.size() > 0) vt = vhat + tau * dir.dvhat;
    SolveOptions o = opts;
    o.initial = warm;
    const GeodesicDisc g = solve_preferred(dom, pt, vt, o);
    warm = g.phi;
    VectorXcd out(dom.dim * zetas.size());
    for (size_t i = 0; i < zetas.size(); ++i)
      out.segment(i * dom.dim, dom.dim) = eval(g.phi, zetas[i]);
    return out;
  };

  const VectorXcd base = sample(0.0);
  auto second_diff = [&](double step) {
    return ((sample(step) + sample(-step) - 2.0 * base) / (step * step))
        .eval();
  };
  const VectorXcd d2a = second_diff(h);
  const VectorXcd d2b = second_diff(h / 2.0);
  const VectorXcd d2c = second_diff(h / 4.0);
  const double num = (d2a - d2b).cwiseAbs().maxCoeff();
  const double den = (d2b - d2c).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, d2b.cwiseAbs().maxCoeff());

  double viol;
  if (num <= 1e-8 * scale && den <= 1e-8 * scale) {
    viol = 0.0;  // parameter dependence is (numerically) exactly quadratic
  } else {
    viol = std::abs(num / den - 4.0);
  }
  rep.checks.push_back(make_check("richardson_ratio", viol, 0.5));
  finish(rep);
  return rep;
}

VerifyReport hcma_boundary_probe(const Domain& dom, const VectorXcd& p) {
  const int n = dom.dim;
  VerifyReport rep;
  rep.suite = "hcma";

  // Decay near the boundary, far from the anchor (antipodal sector, where
  // the kernel scaling constant is O(1)).
  double v_decay = 0.0;
  {
    std::vector<VectorXcd> probes;
    probes.push_back(project_to_boundary(dom, -p));
    for (int k = 0; k < 2; ++k) {
      VectorXcd q = -p;
      q[(k + 1) % n] += cplx(0.08, k == 0 ? 0.05 : -0.05);
      probes.push_back(project_to_boundary(dom, q));
    }
    for (const VectorXcd& q : probes)
      v_decay = std::max(
          v_decay, std::abs(poisson_kernel(dom, p, (1.0 - 1e-4) * q)));
  }
  rep.checks.push_back(make_check("boundary_decay", v_decay, 1e-4));

  // Nontangential product bracket along the inward ray at p.
  double v_brk = 0.0;
  for (double t : {0.1, 0.05, 0.03}) {
    const VectorXcd z = (1.0 - t) * p;
    const double prod = std::abs(poisson_kernel(dom, p, z)) * (z - p).norm();
    v_brk = std::max(v_brk, std::max(prod, 1.0 / prod));
  }
  rep.checks.push_back(make_check("nontangential_bracket", v_brk, 10.0));

  VectorXcd vhat0 = VectorXcd::Zero(n - 1);
  vhat0[0] = cplx(0.25, -0.15);
  auto leaf_u = [&](cplx zeta) {
    return poisson_kernel(dom, p, leaf_point(dom, p, vhat0, zeta));
  };

  // Mean-value residual of the leaf pullback (undivided 5-point stencil).
  double v_lap = 0.0;
  const double h = 1e-2;
  for (cplx z0 : {cplx(0.2, 0.1), cplx(-0.25, 0.15)}) {
    const double res =
        0.25 * (leaf_u(z0 + h) + leaf_u(z0 - h) + leaf_u(z0 + cplx(0, h)) +
                leaf_u(z0 - cplx(0, h)) - 4.0 * leaf_u(z0));
    v_lap = std::max(v_lap, std::abs(res));
  }
  rep.checks.push_back(make_check("leaf_laplacian", v_lap, 1e-5));

  // Pullback closed form -(1/c^2)(1-|zeta|^2)/|1-zeta|^2.
  double v_pull = 0.0;
  const double c2 = 1.0 - vhat0.squaredNorm();
  for (cplx zeta : {cplx(0.3, 0.4), cplx(-0.2, 0.1)}) {
    const double expect =
        -(1.0 / c2) * (1.0 - std::norm(zeta)) / std::norm(1.0 - zeta);
    v_pull = std::max(v_pull, std::abs(leaf_u(zeta) - expect));
  }
  rep.checks.push_back(make_check("leaf_pullback", v_pull, 1e-6));

  if (dom.type == "ball") {
    double v_ball = 0.0;
    std::vector<VectorXcd> pts;
    pts.push_back(VectorXcd::Zero(n));
    pts.push_back(0.3 * p);
    VectorXcd z(n);
    z.setZero();
    z[0] = cplx(0.2, 0.1);
    z[n - 1] += cplx(-0.3, 0.25);
    pts.push_back(z);
    for (const VectorXcd& zz : pts) {
      const cplx ip = p.dot(zz);  // <z, p>
      const double expect =
          -(1.0 - zz.squaredNorm()) / std::norm(1.0 - ip);
      v_ball = std::max(v_ball,
                        std::abs(poisson_kernel(dom, p, zz) - expect));
    }
    rep.checks.push_back(make_check("ball_closed_form", v_ball, 1e-8));
  }

  finish(rep);
  return rep;
}

}  // namespace cgeo
