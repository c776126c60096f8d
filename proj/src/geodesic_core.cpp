#include "cgeo/geodesic_core.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace cgeo {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

VectorXcd eval(const CircleField& u, cplx z) {
  return holomorphic_extend(u, z, std::numeric_limits<double>::max());
}

VectorXcd eval_d(const CircleField& u, cplx z, int order = 1) {
  return holomorphic_extend(circle_derivative(u, order), z,
                            std::numeric_limits<double>::max());
}

MatrixXcd as_matrix(const VectorXcd& flat, int n) {
  return Eigen::Map<const MatrixXcd>(flat.data(), n, n);
}

// Directional derivative of rho_zz at p along the real path p + t w, by
// central differences; the only third-order information the solver needs.
MatrixXcd dir_hess_zz(const Domain& dom, const VectorXcd& p,
                      const VectorXcd& w) {
  const double wn = w.norm();
  if (wn < 1e-14) return MatrixXcd::Zero(dom.dim, dom.dim);
  const double h = 1e-6 / std::max(1.0, wn);
  return (dom.hess_zz(p + h * w) - dom.hess_zz(p - h * w)) / (2.0 * h);
}

// Strips strictly negative frequencies.
CircleField holomorphic_part(const CircleField& u) {
  return u - analytic_projection(u);
}

}  // namespace

double ThetaBlocks::sup_norm() const {
  double m = std::abs(normalization_block);
  m = std::max(m, rho_block.sup_norm());
  m = std::max(m, proj_block.sup_norm());
  if (point_block.size() > 0)
    m = std::max(m, point_block.cwiseAbs().maxCoeff());
  if (deriv_block.size() > 0)
    m = std::max(m, deriv_block.cwiseAbs().maxCoeff());
  return m;
}

ThetaBlocks ThetaBlocks::negated() const {
  ThetaBlocks out;
  out.rho_block = rho_block * cplx(-1.0);
  out.proj_block = proj_block * cplx(-1.0);
  out.point_block = -point_block;
  out.deriv_block = -deriv_block;
  out.normalization_block = -normalization_block;
  return out;
}

CircleField dual_weight(const Domain& dom, const CircleField& phi) {
  const int N = phi.num_nodes();
  const CircleField phid = circle_derivative(phi);
  MatrixXcd vals(1, N);
  for (int j = 0; j < N; ++j) {
    const cplx zj = CircleField::node(j, N);
    const cplx s = zj * (dom.grad(phi.value(j)).transpose() * phid.value(j))[0];
    vals(0, j) = 1.0 / s;
  }
  return CircleField::from_values(vals);
}

CircleField dual_candidate(const Domain& dom, const CircleField& phi) {
  const int N = phi.num_nodes();
  const CircleField mu = dual_weight(dom, phi);
  MatrixXcd vals(phi.dim(), N);
  for (int j = 0; j < N; ++j)
    vals.col(j) =
        CircleField::node(j, N) * mu.value(j)[0] * dom.grad(phi.value(j));
  return CircleField::from_values(vals);
}

CircleField flattening_matrix(const CircleField& phi, const CircleField& dual) {
  const int N = phi.num_nodes();
  const int n = phi.dim();
  const double supd = dual.sup_norm();
  if (supd < 1e-14) throw DualDegenerate("flattening_matrix: vanishing dual");

  // Constant direction b with b^t dual uniformly away from zero.
  std::vector<VectorXcd> candidates;
  for (int j = 0; j < 8; ++j) {
    const VectorXcd d = dual.value(j * N / 8);
    if (d.norm() > 1e-14) candidates.push_back(d.conjugate() / d.norm());
  }
  const VectorXcd m = dual.mean();
  if (m.norm() > 1e-14) candidates.push_back(m.conjugate() / m.norm());
  VectorXcd best;
  double best_score = -1.0;
  for (const VectorXcd& b : candidates) {
    double score = std::numeric_limits<double>::infinity();
    for (int j = 0; j < N; ++j)
      score = std::min(score, std::abs((b.transpose() * dual.value(j))[0]));
    if (score > best_score) {
      best_score = score;
      best = b;
    }
  }
  if (best_score < 0.2 * supd)
    throw DualDegenerate("flattening_matrix: no direction keeps b^t dual "
                         "away from zero (score " +
                         std::to_string(best_score / supd) + " of sup)");
  // Phase so the chart of unitary_frame is well away from its singularity.
  if (std::abs(best[0]) > 1e-12) best *= std::conj(best[0]) / std::abs(best[0]);

  const MatrixXcd U = unitary_frame(best).adjoint();
  const MatrixXcd Uc = U.conjugate();
  const CircleField phid = circle_derivative(phi);

  // First rotated dual component must be zero-free on the closed disc.
  MatrixXcd d1(1, N);
  for (int j = 0; j < N; ++j) d1(0, j) = (Uc.row(0) * dual.value(j))[0];
  if (winding_number(CircleField::from_values(d1)) != 0)
    throw DualDegenerate("flattening_matrix: rotated dual component winds");

  std::vector<MatrixXcd> mats(N);
  for (int j = 0; j < N; ++j) {
    const VectorXcd dt = Uc * dual.value(j);
    MatrixXcd At = MatrixXcd::Zero(n, n);
    At.col(0) = U * phid.value(j);
    At(0, 1) = -dt[1];
    At(1, 1) = dt[0];
    for (int c = 2; c < n; ++c) {
      At(0, c) = -dt[c] / dt[0];
      At(c, c) = 1.0;
    }
    mats[j] = U.adjoint() * At;
    if (std::abs(mats[j].determinant()) < 1e-10)
      throw DualDegenerate("flattening_matrix: singular at a node");
  }
  return field_from_matrices(mats);
}

ThetaBlocks theta_residual(const Domain& dom, const CircleField& phi,
                           const CircleField& A0, const VectorXcd& p,
                           const VectorXcd& vhat) {
  const int N = phi.num_nodes();
  const int n = phi.dim();
  ThetaBlocks th;

  MatrixXcd rvals(1, N);
  MatrixXcd flat(n, N);
  double scale = 0.0;
  for (int j = 0; j < N; ++j) {
    const VectorXcd zj = phi.value(j);
    rvals(0, j) = dom.rho(zj);
    flat.col(j) = matrix_at(A0, j, n, n).transpose() * dom.grad(zj);
    scale = std::max(scale, flat.col(j).norm());
  }
  MatrixXcd Fvals(n - 1, N);
  for (int j = 0; j < N; ++j) {
    const cplx c = flat(0, j);
    if (std::abs(c) < 1e-8 * scale)
      throw FirstComponentVanishes(
          "theta_residual: flattened normal has vanishing first component");
    Fvals.col(j) = flat.col(j).tail(n - 1) / c;
  }
  th.rho_block = CircleField::from_values(rvals);
  th.proj_block = analytic_projection(CircleField::from_values(Fvals));

  const VectorXcd phi1 = eval(phi, 1.0);
  const VectorXcd d1 = eval_d(phi, 1.0);
  const VectorXcd dd1 = eval_d(phi, 1.0, 2);
  const VectorXcd v = fiber_unchart(dom, p, vhat);
  const double w1 = std::sqrt(1.0 - vhat.squaredNorm());
  th.point_block = phi1 - p;
  th.deriv_block = d1 - w1 * v;
  th.normalization_block =
      ((dom.grad(phi1).transpose() * dd1)[0] +
       (d1.transpose() * dom.hess_zz(phi1) * d1)[0])
          .imag();
  return th;
}

ThetaBlocks theta_linearized(const Domain& dom, const GeodesicDisc& base,
                             const CircleField& dphi) {
  const CircleField& phi0 = base.phi;
  const int N = phi0.num_nodes();
  const int n = phi0.dim();
  ThetaBlocks th;

  MatrixXcd rvals(1, N);
  MatrixXcd Fvals(n - 1, N);
  for (int j = 0; j < N; ++j) {
    const VectorXcd zj = phi0.value(j);
    const VectorXcd dj = dphi.value(j);
    const MatrixXcd A = matrix_at(base.A0, j, n, n);
    rvals(0, j) = 2.0 * (dom.grad(zj).transpose() * dj)[0].real();
    const VectorXcd num =
        A.transpose() *
        (dom.hess_zz(zj) * dj + dom.hess_zzbar(zj) * dj.conjugate());
    const cplx den = (A.transpose() * dom.grad(zj))[0];
    Fvals.col(j) = num.tail(n - 1) / den;
  }
  th.rho_block = CircleField::from_values(rvals);
  th.proj_block = analytic_projection(CircleField::from_values(Fvals));

  th.point_block = eval(dphi, 1.0);
  th.deriv_block = eval_d(dphi, 1.0);

  const VectorXcd p0 = eval(phi0, 1.0);
  const VectorXcd phi0d1 = eval_d(phi0, 1.0);
  const VectorXcd phi0dd1 = eval_d(phi0, 1.0, 2);
  const MatrixXcd Q = dom.hess_zz(p0);
  const MatrixXcd Qb = dom.hess_zzbar(p0);
  const VectorXcd ddphi1 = eval_d(dphi, 1.0, 2);
  th.normalization_block =
      ((dom.grad(p0).transpose() * ddphi1)[0] +
       2.0 * (th.deriv_block.transpose() * Q * phi0d1)[0] +
       (phi0dd1.transpose() *
        (Q * th.point_block + Qb * th.point_block.conjugate()))[0] +
       (phi0d1.transpose() * dir_hess_zz(dom, p0, th.point_block) *
        phi0d1)[0])
          .imag();
  return th;
}

CircleField linearized_step(const Domain& dom, const GeodesicDisc& base,
                            const ThetaBlocks& rhs) {
  const CircleField& phi0 = base.phi;
  const int N = phi0.num_nodes();
  const int n = phi0.dim();

  // Scalar data: f0 = (mu r / 2) + i * conjugate function.
  const CircleField mur = rhs.rho_block.pointwise(base.mu) * cplx(0.5);
  const CircleField f0 = mur + hilbert_transform(mur) * cplx(0.0, 1.0);

  const MatrixXcd A01 = as_matrix(eval(base.A0, 1.0), n);
  const MatrixXcd A0d1 = as_matrix(eval_d(base.A0, 1.0), n);
  const MatrixXcd A0dd1 = as_matrix(eval_d(base.A0, 1.0, 2), n);
  const Eigen::FullPivLU<MatrixXcd> lu(A01);
  if (!lu.isInvertible())
    throw DualDegenerate("linearized_step: flattening singular at 1");
  const VectorXcd w = rhs.point_block;
  const VectorXcd v = rhs.deriv_block;
  const VectorXcd psi_1 = lu.solve(w);
  const VectorXcd psid_1 = lu.solve(v) - lu.solve(A0d1 * lu.solve(w));

  const VectorXcd p0 = eval(phi0, 1.0);
  const VectorXcd phi0d1 = eval_d(phi0, 1.0);
  const VectorXcd phi0dd1 = eval_d(phi0, 1.0, 2);
  const MatrixXcd Q = dom.hess_zz(p0);
  const MatrixXcd Qb = dom.hess_zzbar(p0);

  // Normal second-derivative target from the stationarity block.
  const double target =
      rhs.normalization_block -
      (2.0 * (v.transpose() * Q * phi0d1)[0] +
       (phi0dd1.transpose() * (Q * w + Qb * w.conjugate()))[0] +
       (phi0d1.transpose() * dir_hess_zz(dom, p0, w) * phi0d1)[0])
          .imag();
  const double mu1 = base.mu.value(0)[0].real();  // node 0 is zeta = 1
  const double im_psi1dd_1 =
      mu1 * (target - (dom.grad(p0).transpose() *
                       (A0dd1 * psi_1 + 2.0 * A0d1 * psid_1))[0]
                          .imag());

  // First component from the conjugate-function formula.
  const cplx f0_1 = eval(f0, 1.0)[0];
  const cplx f0d_1 = eval_d(f0, 1.0)[0];
  const cplx f0dd_1 = eval_d(f0, 1.0, 2)[0];
  const double re_psi10 = 0.5 * (f0_1 + f0d_1 - psid_1[0]).real();
  const double im_psi10 =
      0.5 * (im_psi1dd_1 - f0dd_1.imag() - 2.0 * f0d_1.imag());
  const double beta = (psi_1[0] - f0_1).imag() - 2.0 * im_psi10;
  const cplx psi10(re_psi10, im_psi10);

  MatrixXcd psi1hat = MatrixXcd::Zero(1, N);
  const MatrixXcd& f0hat = f0.coeffs();
  for (int k = 1; k < N; ++k) psi1hat(0, k) = f0hat(0, k - 1);
  psi1hat(0, N / 2) += psi10;
  psi1hat(0, N / 2 + 1) += cplx(0.0, beta);
  psi1hat(0, N / 2 + 2) -= std::conj(psi10);
  const CircleField psi1 = CircleField::from_coeffs(psi1hat);

  // Reduced Riemann-Hilbert problem for the remaining components.
  std::vector<MatrixXcd> Hs(N), Ss(N);
  MatrixXcd fvals(n - 1, N);
  for (int j = 0; j < N; ++j) {
    const cplx zj = CircleField::node(j, N);
    const double muj = base.mu.value(j)[0].real();
    const MatrixXcd A = matrix_at(base.A0, j, n, n);
    const MatrixXcd H0 =
        muj * A.transpose() * dom.hess_zzbar(phi0.value(j)) * A.conjugate();
    const MatrixXcd S0 =
        zj * zj * muj * A.transpose() * dom.hess_zz(phi0.value(j)) * A;
    const MatrixXcd Hsub = H0.bottomRightCorner(n - 1, n - 1);
    const MatrixXcd Ssub = S0.bottomRightCorner(n - 1, n - 1);
    Hs[j] = 0.5 * (Hsub + Hsub.adjoint());
    Ss[j] = 0.5 * (Ssub + Ssub.transpose());
    const cplx u = psi1.value(j)[0] * std::conj(zj);  // psi_1 / zeta
    fvals.col(j) = -rhs.proj_block.value(j) +
                   std::conj(u) * H0.col(0).tail(n - 1) +
                   u * S0.col(0).tail(n - 1);
  }
  OneJet c;
  c.zeta0 = 1.0;
  c.z0 = psi_1.tail(n - 1);
  c.v0 = psid_1.tail(n - 1);
  const CircleField tail = solve_jet(RHSymbols::make(Hs, Ss),
                                     CircleField::from_values(fvals), c);

  MatrixXcd out(n, N);
  for (int j = 0; j < N; ++j) {
    VectorXcd psi(n);
    psi[0] = psi1.value(j)[0];
    psi.tail(n - 1) = tail.value(j);
    out.col(j) = matrix_at(base.A0, j, n, n) * psi;
  }
  return CircleField::from_values(out);
}

GeodesicDisc ball_geodesic(const VectorXcd& q, const VectorXcd& v,
                           int num_nodes) {
  const int n = static_cast<int>(q.size());
  if (std::abs(q.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("ball_geodesic: q must be on the sphere");
  const cplx cq = q.dot(v);  // <v, q>
  if (!(cq.real() > 0.0) || std::abs(cq.imag()) > 1e-10)
    throw NotInLp("ball_geodesic: <v, q> must be real positive");
  const double c = cq.real();

  MatrixXcd pv(n, num_nodes), dv(n, num_nodes);
  for (int j = 0; j < num_nodes; ++j) {
    const cplx zj = CircleField::node(j, num_nodes);
    pv.col(j) = q + (zj - 1.0) * c * v;
    dv.col(j) = (zj * q.conjugate() + (1.0 - zj) * c * v.conjugate()) / (c * c);
  }
  GeodesicDisc g;
  g.phi = CircleField::from_values(pv);
  g.dual = CircleField::from_values(dv);
  g.mu = CircleField::constant(VectorXcd::Constant(1, 1.0 / (c * c)),
                               num_nodes);
  g.A0 = flattening_matrix(g.phi, g.dual);
  const Domain ball = make_ball(n);
  g.datum = make_datum(ball, q, fiber_chart(ball, q, v));
  g.diagnostics = theta_residual(ball, g.phi, g.A0, q, g.datum.vhat);
  g.residual_history = {g.diagnostics.sup_norm()};
  return g;
}

namespace {

// phi together with the frozen data linearized_step needs.
GeodesicDisc make_frame(const Domain& dom, const CircleField& phi) {
  GeodesicDisc fr;
  fr.phi = phi;
  const CircleField muc = dual_weight(dom, phi);
  double min_re = std::numeric_limits<double>::infinity();
  for (int j = 0; j < muc.num_nodes(); ++j)
    min_re = std::min(min_re, muc.value(j)[0].real());
  if (!(min_re > 0.0))
    throw NoConvergence("dual weight lost positivity along the iteration");
  fr.mu = muc.real_part();
  fr.dual = holomorphic_part(dual_candidate(dom, phi));
  fr.A0 = flattening_matrix(phi, fr.dual);
  return fr;
}

struct NewtonResult {
  CircleField phi;
  ThetaBlocks blocks;
  std::vector<double> history;
  int iterations = 0;
};

NewtonResult newton_solve(const Domain& dom, const VectorXcd& p,
                          const VectorXcd& vhat, const CircleField& start,
                          double tol, int max_iter) {
  CircleField phi = start;
  GeodesicDisc frame = make_frame(dom, phi);
  ThetaBlocks th = theta_residual(dom, phi, frame.A0, p, vhat);
  double res = th.sup_norm();
  NewtonResult out;
  out.history.push_back(res);

  for (int it = 0; it < max_iter; ++it) {
    if (res <= tol) {
      out.phi = phi;
      out.blocks = th;
      out.iterations = it;
      return out;
    }
    const CircleField dphi = linearized_step(dom, frame, th.negated());
    bool accepted = false;
    double lam = 1.0;
    for (int bt = 0; bt < 6; ++bt, lam *= 0.5) {
      // Strip the tiny aliasing mass of the nodal product A0 psi.
      const CircleField cand = holomorphic_part(phi + dphi * lam);
      try {
        GeodesicDisc fr2 = make_frame(dom, cand);
        ThetaBlocks th2 = theta_residual(dom, cand, fr2.A0, p, vhat);
        const double r2 = th2.sup_norm();
        if (r2 < (1.0 - 0.25 * lam) * res || r2 <= tol) {
          phi = cand;
          frame = std::move(fr2);
          th = std::move(th2);
          res = r2;
          out.history.push_back(res);
          accepted = true;
          break;
        }
      } catch (const std::runtime_error&) {
        // degenerate trial step; shorten
      }
    }
    if (!accepted)
      throw NoConvergence("newton: no acceptable step at residual " +
                          std::to_string(res));
  }
  if (res <= tol) {
    out.phi = phi;
    out.blocks = th;
    out.iterations = max_iter;
    return out;
  }
  throw NoConvergence("newton: residual " + std::to_string(res) +
                      " after max iterations");
}

}  // namespace

GeodesicDisc solve_preferred(const Domain& dom, const VectorXcd& p_in,
                             const VectorXcd& vhat, const SolveOptions& opts) {
  const int n = dom.dim;
  const VectorXcd p = project_to_boundary(dom, p_in);

  const Domain ball = make_ball(n);
  const VectorXcd q0 = p / p.norm();
  const VectorXcd v0 = fiber_unchart(ball, q0, vhat);
  CircleField phi = ball_geodesic(q0, v0, opts.num_nodes).phi;

  const bool quadric = dom.type == "ellipsoid" && dom.epsilon != 0.0 &&
                       dom.B.norm() != 0.0;
  NewtonResult res;
  bool solved = false;
  if (opts.initial.dim() == n && opts.initial.num_nodes() == opts.num_nodes) {
    try {
      res = newton_solve(dom, p, vhat, opts.initial, opts.tol, opts.max_iter);
      solved = true;
    } catch (const std::runtime_error&) {
      // fall through to the cold start below
    }
  }
  if (solved) {
    // warm start succeeded
  } else if (!quadric || !opts.homotopy) {
    res = newton_solve(dom, p, vhat, phi, opts.tol, opts.max_iter);
  } else {
    double t_cur = 0.0, t_step = 1.0;
    while (true) {
      const double t = std::min(1.0, t_cur + t_step);
      const Domain dom_t = make_ellipsoid(n, dom.B, dom.epsilon * t);
      const VectorXcd pt = project_to_boundary(dom_t, p);
      try {
        res = newton_solve(dom_t, pt, vhat, phi, opts.tol, opts.max_iter);
      } catch (const NoConvergence&) {
        t_step *= 0.5;
        if (t_step < 1.0 / 64)
          throw NoConvergence("solve_preferred: homotopy stalled at t = " +
                              std::to_string(t_cur));
        continue;
      }
      phi = res.phi;
      t_cur = t;
      if (t_cur >= 1.0) break;
      t_step *= 2.0;
    }
  }

  GeodesicDisc g = make_frame(dom, res.phi);
  const CircleField raw = dual_candidate(dom, res.phi);
  if (analytic_projection(raw).sup_norm() > 10.0 * opts.tol)
    throw DualNotHolomorphic("solve_preferred: dual trace fails holomorphy");
  g.datum = make_datum(dom, p, vhat);
  g.diagnostics = res.blocks;
  g.residual_history = res.history;
  g.newton_iterations = res.iterations;
  return g;
}

cplx invert_disc_point(const GeodesicDisc& g, const VectorXcd& z, cplx guess) {
  const CircleField& phi = g.phi;
  const CircleField phid = circle_derivative(phi);

  cplx zeta = guess;
  double best = (eval(phi, zeta) - z).norm();
  // Coarse sweep as insurance against a poor starting point.
  for (double r : {0.0, 0.3, 0.6, 0.85, 0.97}) {
    for (int j = 0; j < 32; ++j) {
      const cplx trial =
          r * std::exp(cplx(0.0, 2.0 * kPi * j / 32.0));
      const double d = (eval(phi, trial) - z).norm();
      if (d < best) {
        best = d;
        zeta = trial;
      }
      if (r == 0.0) break;
    }
  }
  for (int it = 0; it < 60; ++it) {
    const VectorXcd r = eval(phi, zeta) - z;
    if (r.norm() < 1e-13) break;
    const VectorXcd d = eval_d(phi, zeta);
    cplx step = -(d.adjoint() * r)[0] / d.squaredNorm();
    for (int bt = 0; bt < 30; ++bt) {
      cplx cand = zeta + step;
      if (std::abs(cand) > 1.0 - 1e-12)
        cand *= (1.0 - 1e-12) / std::abs(cand);
      if ((eval(phi, cand) - z).norm() < r.norm()) {
        zeta = cand;
        break;
      }
      step *= 0.5;
    }
  }
  return zeta;
}

IsometryReport isometry_check(const Domain& dom, const GeodesicDisc& g,
                              cplx zeta1, cplx zeta2) {
  IsometryReport rep;
  rep.disc_distance = poincare_distance(zeta1, zeta2);

  const VectorXcd z1 = eval(g.phi, zeta1);
  const VectorXcd z2 = eval(g.phi, zeta2);

  const cplx xi(0.0, 1.0);
  const VectorXcd pp = project_to_boundary(dom, eval(g.phi, xi));
  VectorXcd vp = xi * eval_d(g.phi, xi);
  vp /= vp.norm();
  const MatrixXcd frame = unitary_frame(dom.normal(pp));
  const VectorXcd wch = frame.adjoint() * vp;
  vp *= std::conj(wch[0]) / std::abs(wch[0]);

  const GeodesicDisc g2 = solve_preferred(dom, pp, fiber_chart(dom, pp, vp));
  const cplx zt1 = invert_disc_point(g2, z1, std::conj(xi) * zeta1);
  const cplx zt2 = invert_disc_point(g2, z2, std::conj(xi) * zeta2);
  rep.reanchored_distance = poincare_distance(zt1, zt2);
  return rep;
}

std::string geodesic_to_json(const GeodesicDisc& g) {
  nlohmann::json j;
  auto vec = [](const VectorXcd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i)
      a.push_back({v[i].real(), v[i].imag()});
    return a;
  };
  j["datum"] = {{"p", vec(g.datum.p)},
                {"v", vec(g.datum.v)},
                {"vhat", vec(g.datum.vhat)}};
  j["phi"] = nlohmann::json::parse(to_json(g.phi));
  j["dual"] = nlohmann::json::parse(to_json(g.dual));
  j["residual"] = g.diagnostics.sup_norm();
  j["iterations"] = g.newton_iterations;
  j["residual_history"] = g.residual_history;
  return j.dump();
}

}  // namespace cgeo
