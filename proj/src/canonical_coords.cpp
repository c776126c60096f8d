#include "cgeo/canonical_coords.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>

namespace cgeo {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

VectorXcd eval(const CircleField& u, cplx z) {
  return holomorphic_extend(u, z, std::numeric_limits<double>::max());
}

CircleField hol_part(const CircleField& u) { return u - analytic_projection(u); }

/// Plus operator of a Hermitian symbol: keeps positive frequencies and half
/// of the mean, so that Y + Y^H recovers the symbol pointwise.
CircleField plus_half(const CircleField& x) {
  return (x + hilbert_transform(x) * cplx(0.0, 1.0)) * 0.5;
}

MatrixXcd mean_matrix(const CircleField& f, int rows, int cols) {
  const VectorXcd c = f.coeff(0);
  return Eigen::Map<const MatrixXcd>(c.data(), rows, cols);
}

/// First- and second-order data of the chart along the disc, at one point.
struct ChartJet {
  cplx z1;
  VectorXcd phi, phip, phipp, dual, dualp, dualpp;
  MatrixXcd C, Cp, H, Hp;
};

struct DerivedFields {
  CircleField phip, phipp, dualp, dualpp, Cp, Hp;
};

DerivedFields derive_fields(const CanonicalChart& ch) {
  DerivedFields df;
  df.phip = circle_derivative(ch.phi);
  df.phipp = circle_derivative(ch.phi, 2);
  df.dualp = circle_derivative(ch.dual);
  df.dualpp = circle_derivative(ch.dual, 2);
  df.Cp = circle_derivative(ch.g_columns);
  df.Hp = circle_derivative(ch.factor_H);
  return df;
}

ChartJet jet_at_node(const CanonicalChart& ch, const DerivedFields& df,
                     int j) {
  const int n = ch.n, m = n - 1;
  ChartJet jet;
  jet.z1 = ch.phi.node(j);
  jet.phi = ch.phi.value(j);
  jet.phip = df.phip.value(j);
  jet.phipp = df.phipp.value(j);
  jet.dual = ch.dual.value(j);
  jet.dualp = df.dualp.value(j);
  jet.dualpp = df.dualpp.value(j);
  jet.C = matrix_at(ch.g_columns, j, n, m);
  jet.Cp = matrix_at(df.Cp, j, n, m);
  jet.H = matrix_at(ch.factor_H, j, m, m);
  jet.Hp = matrix_at(df.Hp, j, m, m);
  return jet;
}

ChartJet jet_at(const CanonicalChart& ch, const DerivedFields& df, cplx z1) {
  const int n = ch.n, m = n - 1;
  ChartJet jet;
  jet.z1 = z1;
  jet.phi = eval(ch.phi, z1);
  jet.phip = eval(df.phip, z1);
  jet.phipp = eval(df.phipp, z1);
  jet.dual = eval(ch.dual, z1);
  jet.dualp = eval(df.dualp, z1);
  jet.dualpp = eval(df.dualpp, z1);
  const VectorXcd cv = eval(ch.g_columns, z1);
  jet.C = Eigen::Map<const MatrixXcd>(cv.data(), n, m);
  const VectorXcd cpv = eval(df.Cp, z1);
  jet.Cp = Eigen::Map<const MatrixXcd>(cpv.data(), n, m);
  const VectorXcd hv = eval(ch.factor_H, z1);
  jet.H = Eigen::Map<const MatrixXcd>(hv.data(), m, m);
  const VectorXcd hpv = eval(df.Hp, z1);
  jet.Hp = Eigen::Map<const MatrixXcd>(hpv.data(), m, m);
  return jet;
}

/// Derivatives of r(w1, w') = |dual(w1)| rho(G(w1, w')) at (z1, 0), together
/// with the lambda coefficients a, b and the straightened blocks.
struct LocalGeom {
  double s = 0.0, u0 = 0.0, r_w1b1 = 0.0, a = 0.0;
  cplx s_w1, s_w11, du0, r_w1, r_w11;
  VectorXcd g, rw, r_w1w, c, b, t;
  MatrixXcd M, Z, Rm, S0;
};

LocalGeom local_geom(const CanonicalChart& ch, const ChartJet& jet) {
  LocalGeom lg;
  lg.s = jet.dual.norm();
  const cplx q1 = jet.dual.dot(jet.dualp);    // <(dual)', dual>
  const cplx q11 = jet.dual.dot(jet.dualpp);  // <(dual)'', dual>
  lg.s_w1 = q1 / (2.0 * lg.s);
  lg.s_w11 = q11 / (2.0 * lg.s) - q1 * q1 / (4.0 * lg.s * lg.s * lg.s);
  const double s_w1b1 =
      jet.dualp.squaredNorm() / (2.0 * lg.s) -
      std::norm(q1) / (4.0 * lg.s * lg.s * lg.s);

  lg.u0 = ch.dom.rho(jet.phi);
  lg.g = ch.dom.grad(jet.phi);
  lg.M = ch.dom.hess_zzbar(jet.phi);
  lg.Z = ch.dom.hess_zz(jet.phi);

  lg.du0 = (lg.g.transpose() * jet.phip)(0);
  lg.r_w1 = lg.s_w1 * lg.u0 + lg.s * lg.du0;
  lg.r_w11 = lg.s_w11 * lg.u0 + 2.0 * lg.s_w1 * lg.du0 +
             lg.s * ((jet.phip.transpose() * lg.Z * jet.phip)(0) +
                     (lg.g.transpose() * jet.phipp)(0));
  lg.r_w1b1 =
      s_w1b1 * lg.u0 + 2.0 * (lg.s_w1 * std::conj(lg.du0)).real() +
      lg.s * (jet.phip.transpose() * lg.M * jet.phip.conjugate())(0).real();
  lg.a = 1.0 - lg.r_w1b1;

  const VectorXcd Ctg = jet.C.transpose() * lg.g;
  lg.rw = lg.s * Ctg;
  lg.r_w1w = lg.s_w1 * Ctg + lg.s * (jet.C.transpose() * lg.Z * jet.phip) +
             lg.s * (jet.Cp.transpose() * lg.g);
  lg.c = std::conj(lg.s_w1) * Ctg +
         lg.s * (jet.C.transpose() * lg.M * jet.phip.conjugate());
  lg.b = jet.H.transpose() * lg.c;
  lg.t = jet.H.transpose() * lg.rw;

  MatrixXcd R = lg.s * (jet.C.transpose() * lg.M * jet.C.conjugate());
  lg.Rm = 0.5 * (R + R.adjoint());
  const MatrixXcd T = lg.s * (jet.C.transpose() * lg.Z * jet.C);
  const cplx zb = std::conj(jet.z1);
  MatrixXcd S = jet.H.transpose() * T * jet.H -
                zb * (lg.b * lg.t.transpose() + lg.t * lg.b.transpose());
  lg.S0 = 0.5 * (S + S.transpose());
  return lg;
}

CircleField scalar_reciprocal(const CircleField& comp) {
  Eigen::MatrixXcd vals = comp.values();
  for (int j = 0; j < vals.cols(); ++j) vals(0, j) = 1.0 / vals(0, j);
  return hol_part(CircleField::from_values(vals));
}

bool reciprocal_ok(const CircleField& comp, double sup) {
  double mn = std::numeric_limits<double>::infinity();
  for (int j = 0; j < comp.num_nodes(); ++j)
    mn = std::min(mn, std::abs(comp.values()(0, j)));
  if (mn < 0.02 * std::max(sup, 1e-12)) return false;
  try {
    return winding_number(comp) == 0;
  } catch (const std::runtime_error&) {
    return false;
  }
}

}  // namespace

CircleField spectral_factorize(const CircleField& R) {
  const int N = R.num_nodes();
  const int m = static_cast<int>(std::lround(std::sqrt(double(R.dim()))));
  if (m * m != R.dim())
    throw std::invalid_argument("spectral_factorize: field is not square");

  // H = B^{-1} where B is the outer factor of W = conj(R): B^H B = W.
  std::vector<MatrixXcd> W(N);
  double wscale = 0.0;
  Eigen::MatrixXcd logd(1, N);
  for (int j = 0; j < N; ++j) {
    MatrixXcd Wj = matrix_at(R, j, m, m).conjugate();
    W[j] = 0.5 * (Wj + Wj.adjoint());
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(W[j]);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 1e-12 * std::max(1.0, hi)))
      throw NotPositiveDefinite("spectral_factorize: min eigenvalue " +
                                std::to_string(lo) + " at node " +
                                std::to_string(j));
    wscale = std::max(wscale, hi);
    logd(0, j) = std::log(es.eigenvalues().prod()) / (2.0 * m);
  }

  // Scalar outer preconditioner carrying det W.
  const CircleField u = CircleField::from_values(logd);
  const CircleField cu = hilbert_transform(u);
  std::vector<MatrixXcd> B(N);
  for (int j = 0; j < N; ++j)
    B[j] = std::exp(u.value(j)[0] + cplx(0.0, 1.0) * cu.value(j)[0]) *
           MatrixXcd::Identity(m, m);

  auto residual = [&](const std::vector<MatrixXcd>& Bv) {
    double r = 0.0;
    for (int j = 0; j < N; ++j)
      r = std::max(r, (W[j] - Bv[j].adjoint() * Bv[j]).norm());
    return r / std::max(1.0, wscale);
  };
  auto project = [&](const std::vector<MatrixXcd>& Bv) {
    const CircleField f = hol_part(field_from_matrices(Bv));
    std::vector<MatrixXcd> out(N);
    for (int j = 0; j < N; ++j) out[j] = matrix_at(f, j, m, m);
    return out;
  };

  double res = residual(B);
  for (int it = 0; it < 100 && res > 1e-13; ++it) {
    std::vector<MatrixXcd> X(N);
    for (int j = 0; j < N; ++j) {
      const MatrixXcd Binv = B[j].inverse();
      const MatrixXcd Xj =
          Binv.adjoint() * (W[j] - B[j].adjoint() * B[j]) * Binv;
      X[j] = 0.5 * (Xj + Xj.adjoint());
    }
    const CircleField Y = plus_half(field_from_matrices(X));
    double lam = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 5; ++bt, lam *= 0.5) {
      std::vector<MatrixXcd> trial(N);
      for (int j = 0; j < N; ++j)
        trial[j] = B[j] + lam * matrix_at(Y, j, m, m) * B[j];
      trial = project(trial);
      const double rt = residual(trial);
      if (rt < res) {
        B = std::move(trial);
        res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }

  std::vector<MatrixXcd> H(N);
  for (int j = 0; j < N; ++j) H[j] = B[j].inverse();
  CircleField Hf = hol_part(field_from_matrices(H));

  // Gauge: H(0) lower-triangular with positive real diagonal.
  const MatrixXcd H0 = mean_matrix(Hf, m, m);
  Eigen::HouseholderQR<MatrixXcd> qr(H0.adjoint().eval());
  const MatrixXcd Q = qr.householderQ();
  const MatrixXcd Rm = Q.adjoint() * H0.adjoint();
  MatrixXcd U = Q;
  for (int i = 0; i < m; ++i) {
    const cplx d = Rm(i, i);
    if (std::abs(d) < 1e-14)
      throw NoConvergence("spectral_factorize: singular factor at the origin");
    U.col(i) *= d / std::abs(d);
  }
  for (int j = 0; j < N; ++j) H[j] = matrix_at(Hf, j, m, m) * U;
  Hf = hol_part(field_from_matrices(H));

  double viol = 0.0;
  for (int j = 0; j < N; ++j) {
    const MatrixXcd Hj = matrix_at(Hf, j, m, m);
    viol = std::max(viol, (Hj.transpose() * matrix_at(R, j, m, m) *
                               Hj.conjugate() -
                           MatrixXcd::Identity(m, m))
                              .cwiseAbs()
                              .maxCoeff());
  }
  if (viol > kTolFact)
    throw NoConvergence("spectral_factorize: residual " + std::to_string(viol));
  return Hf;
}

CanonicalChart build_G(const Domain& dom, const GeodesicDisc& g) {
  const int n = dom.dim, m = n - 1;
  const int N = g.phi.num_nodes();
  CanonicalChart ch;
  ch.n = n;
  ch.dom = dom;
  ch.phi = g.phi;
  ch.dual = g.dual;

  // Corona pair from the reciprocal of a nonvanishing dual component.
  const double sup = ch.dual.sup_norm();
  ch.psi1 = CircleField::zero(1, N);
  ch.psi2 = CircleField::zero(1, N);
  const CircleField d1 = ch.dual.component(0);
  const CircleField d2 = ch.dual.component(1);
  if (reciprocal_ok(d1, sup)) {
    ch.psi1 = scalar_reciprocal(d1);
  } else if (reciprocal_ok(d2, sup)) {
    ch.psi2 = scalar_reciprocal(d2);
  } else if (n > 2) {
    throw DualDegenerate(
        "build_G: no dual component admits a holomorphic reciprocal");
  }

  std::vector<MatrixXcd> cols(N);
  for (int j = 0; j < N; ++j) {
    const VectorXcd d = ch.dual.value(j);
    MatrixXcd C = MatrixXcd::Zero(n, m);
    C(0, 0) = -d[1];
    C(1, 0) = d[0];
    for (int k = 1; k < m; ++k) {
      C(0, k) = -ch.psi1.value(j)[0] * d[k + 1];
      C(1, k) = -ch.psi2.value(j)[0] * d[k + 1];
      C(k + 1, k) = 1.0;
    }
    cols[j] = C;
  }
  ch.g_columns = field_from_matrices(cols);

  std::vector<MatrixXcd> Rmats(N);
  for (int j = 0; j < N; ++j) {
    const double s = ch.dual.value(j).norm();
    const MatrixXcd M = dom.hess_zzbar(ch.phi.value(j));
    const MatrixXcd R = s * (cols[j].transpose() * M * cols[j].conjugate());
    Rmats[j] = 0.5 * (R + R.adjoint());
  }
  ch.hessian_R = field_from_matrices(Rmats);
  ch.factor_H = spectral_factorize(ch.hessian_R);

  const DerivedFields df = derive_fields(ch);
  std::vector<MatrixXcd> S0(N);
  for (int j = 0; j < N; ++j)
    S0[j] = local_geom(ch, jet_at_node(ch, df, j)).S0;
  ch.S0 = field_from_matrices(S0);
  return ch;
}

VectorXcd chart_G(const CanonicalChart& ch, const VectorXcd& w) {
  if (static_cast<int>(w.size()) != ch.n)
    throw std::invalid_argument("chart_G: wrong dimension");
  const cplx w1 = w[0];
  const VectorXcd phi = eval(ch.phi, w1);
  const VectorXcd cv = eval(ch.g_columns, w1);
  const Eigen::Map<const MatrixXcd> C(cv.data(), ch.n, ch.n - 1);
  return phi + C * w.tail(ch.n - 1);
}

double chart_r(const CanonicalChart& ch, const VectorXcd& w) {
  if (static_cast<int>(w.size()) != ch.n)
    throw std::invalid_argument("chart_r: wrong dimension");
  const cplx w1 = w[0];
  if (std::abs(w1) > 1.0 + 1e-12)
    throw OutsideCollar("chart_r: |w1| > 1");
  const VectorXcd phi = eval(ch.phi, w1);
  const VectorXcd cv = eval(ch.g_columns, w1);
  const Eigen::Map<const MatrixXcd> C(cv.data(), ch.n, ch.n - 1);
  const double s = eval(ch.dual, w1).norm();
  return s * ch.dom.rho(phi + C * w.tail(ch.n - 1));
}

double chart_lambda(const CanonicalChart& ch, const VectorXcd& z) {
  if (static_cast<int>(z.size()) != ch.n)
    throw std::invalid_argument("chart_lambda: wrong dimension");
  const cplx z1 = z[0];
  const DerivedFields df = derive_fields(ch);
  const ChartJet jet = jet_at(ch, df, z1);
  const LocalGeom lg = local_geom(ch, jet);
  const cplx zb = (z.tail(ch.n - 1).transpose() * lg.b)(0);
  return 1.0 - 0.5 * (1.0 - std::norm(z1)) * lg.a -
         2.0 * (std::conj(z1) * zb).real();
}

double canonical_rho(const CanonicalChart& ch, const VectorXcd& z) {
  if (static_cast<int>(z.size()) != ch.n)
    throw std::invalid_argument("canonical_rho: wrong dimension");
  const cplx z1 = z[0];
  const VectorXcd zp = z.tail(ch.n - 1);
  if (std::abs(z1) > 1.0 + 1e-12 || std::abs(z1) < kCollarRadialMin ||
      zp.norm() > kCollarFiberMax)
    throw OutsideCollar("canonical_rho: point outside the chart collar");
  const VectorXcd hv = eval(ch.factor_H, z1);
  const Eigen::Map<const MatrixXcd> H(hv.data(), ch.n - 1, ch.n - 1);
  VectorXcd w(ch.n);
  w[0] = z1;
  w.tail(ch.n - 1) = H * zp;
  return chart_lambda(ch, z) * chart_r(ch, w);
}

StraighteningReport verify_straightening(const CanonicalChart& ch,
                                         double tol) {
  const int n = ch.n, m = n - 1;
  const int N = ch.phi.num_nodes();
  const DerivedFields df = derive_fields(ch);

  double v_grad = 0.0, v_mixed = 0.0, v_holo = 0.0, v_fact = 0.0,
         s0_norm = 0.0;
  for (int j = 0; j < N; ++j) {
    const ChartJet jet = jet_at_node(ch, df, j);
    const LocalGeom lg = local_geom(ch, jet);
    const cplx zeta = jet.z1;
    const cplx zb = std::conj(zeta);
    const cplx lam_z1 = 0.5 * zb * lg.a;
    const double r0 = lg.s * lg.u0;

    // rho_z(z1, 0) = (conj(z1), 0, ..., 0).
    v_grad = std::max(v_grad, std::abs(lam_z1 * r0 + lg.r_w1 - zb));
    for (int k = 0; k < m; ++k)
      v_grad = std::max(v_grad, std::abs(-zb * lg.b[k] * r0 + lg.t[k]));

    // Mixed Hessian rho_{z zbar}(z1, 0) = I_n.
    const cplx m11 = lam_z1 * std::conj(lg.r_w1) +
                     std::conj(lam_z1) * lg.r_w1 + lg.r_w1b1;
    v_mixed = std::max(v_mixed, std::abs(m11 - 1.0));
    for (int k = 0; k < m; ++k) {
      const cplx m1k = lam_z1 * std::conj(lg.t[k]) -
                       zeta * std::conj(lg.b[k]) * lg.r_w1 +
                       std::conj(lg.b[k]);
      v_mixed = std::max(v_mixed, std::abs(m1k));
    }
    const MatrixXcd fact =
        jet.H.transpose() * lg.Rm * jet.H.conjugate();
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k) {
        const cplx mik = -zb * lg.b[i] * std::conj(lg.t[k]) -
                         zeta * std::conj(lg.b[k]) * lg.t[i] + fact(i, k);
        v_mixed = std::max(v_mixed,
                           std::abs(mik - (i == k ? 1.0 : 0.0)));
      }
    v_fact = std::max(
        v_fact,
        (fact - MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff());

    // Holomorphic Hessian rows: rho_{z1 z1} = 0, rho_{z1 z_j} = 0.
    v_holo = std::max(v_holo, std::abs(zb * lg.a * lg.r_w1 + lg.r_w11));
    const VectorXcd h1 = jet.H.transpose() * lg.r_w1w +
                         jet.Hp.transpose() * lg.rw;
    for (int k = 0; k < m; ++k)
      v_holo = std::max(v_holo,
                        std::abs(-zb * lg.b[k] * lg.r_w1 +
                                 lam_z1 * lg.t[k] + h1[k]));

    Eigen::JacobiSVD<MatrixXcd> svd(matrix_at(ch.S0, j, m, m));
    s0_norm = std::max(s0_norm, svd.singularValues()(0));
  }

  StraighteningReport rep;
  rep.checks.push_back({"boundary_gradient", v_grad, tol, v_grad <= tol});
  rep.checks.push_back({"mixed_hessian", v_mixed, tol, v_mixed <= tol});
  rep.checks.push_back({"holomorphic_hessian", v_holo, tol, v_holo <= tol});
  rep.checks.push_back({"factorization", v_fact, tol, v_fact <= tol});
  rep.checks.push_back({"s0_operator_norm", s0_norm, 1.0, s0_norm < 1.0});
  rep.max_violation = std::max({v_grad, v_mixed, v_holo, v_fact});
  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
  return rep;
}

std::string chart_to_json(const CanonicalChart& ch) {
  nlohmann::json j;
  j["n"] = ch.n;
  j["domain"] = nlohmann::json::parse(domain_to_json(ch.dom));
  j["phi"] = nlohmann::json::parse(to_json(ch.phi));
  j["dual"] = nlohmann::json::parse(to_json(ch.dual));
  j["psi1"] = nlohmann::json::parse(to_json(ch.psi1));
  j["psi2"] = nlohmann::json::parse(to_json(ch.psi2));
  j["factor_H"] = nlohmann::json::parse(to_json(ch.factor_H));
  j["S0"] = nlohmann::json::parse(to_json(ch.S0));
  return j.dump();
}

}  // namespace cgeo
