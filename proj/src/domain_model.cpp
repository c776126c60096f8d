#include "cgeo/domain_model.hpp"

#include <json.hpp>

#include <cmath>
#include <random>

namespace cgeo {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

Domain make_ball(int n) {
  if (n < 2) throw std::invalid_argument("make_ball: n >= 2");
  Domain d;
  d.dim = n;
  d.type = "ball";
  d.B = MatrixXd::Zero(n, n);
  d.rho = [](const VectorXcd& z) { return z.squaredNorm() - 1.0; };
  d.grad = [](const VectorXcd& z) { return z.conjugate().eval(); };
  d.hess_zz = [n](const VectorXcd&) { return MatrixXcd::Zero(n, n).eval(); };
  d.hess_zzbar = [n](const VectorXcd&) {
    return MatrixXcd::Identity(n, n).eval();
  };
  return d;
}

Domain make_ellipsoid(int n, const MatrixXd& B, double eps) {
  if (n < 2) throw std::invalid_argument("make_ellipsoid: n >= 2");
  if (B.rows() != n || B.cols() != n || (B - B.transpose()).norm() > 1e-12)
    throw std::invalid_argument("make_ellipsoid: B must be symmetric n x n");
  const double bnorm = B.operatorNorm();
  if (eps * bnorm >= 1.0)
    throw NotSLC("make_ellipsoid: eps * ||B|| = " +
                 std::to_string(eps * bnorm) + " >= 1");
  if (eps == 0.0 || bnorm == 0.0) {
    Domain d = make_ball(n);
    d.type = "ellipsoid";
    d.epsilon = eps;
    d.B = B;
    return d;
  }

  Domain d;
  d.dim = n;
  d.type = "ellipsoid";
  d.epsilon = eps;
  d.B = B;
  const MatrixXcd Bc = B.cast<cplx>();

  // rho0 = |z|^2 + eps Re(z^t B z) - 1; w = rho0_z = conj(z) + eps B z.
  // The gradient normalization multiplies by s = g^{-1/2}, g = |w|^2, whose
  // derivatives close because rho0 is quadratic:
  //   g_z = w + eps B conj(w),  g_zz = 2 eps B,  g_zzbar = I + eps^2 B^2.
  auto w_of = [Bc, eps](const VectorXcd& z) {
    return (z.conjugate() + eps * Bc * z).eval();
  };
  auto rho0 = [Bc, eps](const VectorXcd& z) {
    return z.squaredNorm() + eps * (z.transpose() * Bc * z)[0].real() - 1.0;
  };

  d.rho = [rho0, w_of](const VectorXcd& z) {
    return rho0(z) / w_of(z).norm();
  };
  d.grad = [rho0, w_of, Bc, eps](const VectorXcd& z) {
    const VectorXcd w = w_of(z);
    const double g = w.squaredNorm();
    const VectorXcd gz = w + eps * Bc * w.conjugate();
    const VectorXcd sz = -0.5 * std::pow(g, -1.5) * gz;
    return (sz * rho0(z) + std::pow(g, -0.5) * w).eval();
  };
  d.hess_zz = [rho0, w_of, Bc, eps](const VectorXcd& z) {
    const VectorXcd w = w_of(z);
    const double g = w.squaredNorm();
    const double r0 = rho0(z);
    const VectorXcd gz = w + eps * Bc * w.conjugate();
    const VectorXcd sz = -0.5 * std::pow(g, -1.5) * gz;
    const MatrixXcd gzz = 2.0 * eps * Bc;
    const MatrixXcd szz = 0.75 * std::pow(g, -2.5) * gz * gz.transpose() -
                          0.5 * std::pow(g, -1.5) * gzz;
    return (szz * r0 + sz * w.transpose() + w * sz.transpose() +
            std::pow(g, -0.5) * eps * Bc)
        .eval();
  };
  d.hess_zzbar = [rho0, w_of, Bc, eps, n](const VectorXcd& z) {
    const VectorXcd w = w_of(z);
    const double g = w.squaredNorm();
    const double r0 = rho0(z);
    const VectorXcd gz = w + eps * Bc * w.conjugate();
    const VectorXcd sz = -0.5 * std::pow(g, -1.5) * gz;
    const MatrixXcd gzzb =
        MatrixXcd::Identity(n, n) + eps * eps * Bc * Bc;
    const MatrixXcd szzb = 0.75 * std::pow(g, -2.5) * gz * gz.adjoint() -
                           0.5 * std::pow(g, -1.5) * gzzb;
    return (szzb * r0 + sz * w.adjoint() + w * sz.adjoint() +
            std::pow(g, -0.5) * MatrixXcd::Identity(n, n))
        .eval();
  };
  return d;
}

SlcReport slc_check(const Domain& dom,
                    const std::vector<VectorXcd>& samples) {
  const int n = dom.dim;
  std::mt19937 rng(12345);
  std::normal_distribution<double> gauss;
  SlcReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (const VectorXcd& p : samples) {
    if (std::abs(dom.rho(p)) > 1e-8)
      throw SampleOffBoundary("slc_check: |rho(p)| = " +
                              std::to_string(std::abs(dom.rho(p))));
    const MatrixXcd frame = unitary_frame(dom.normal(p));
    const MatrixXcd H = dom.hess_zzbar(p);
    const MatrixXcd S = dom.hess_zz(p);
    for (int t = 0; t < 2 * n; ++t) {
      VectorXcd c(n - 1);
      if (t < n - 1) {
        c.setZero();
        c[t] = 1.0;
      } else {
        for (int i = 0; i < n - 1; ++i) c[i] = cplx(gauss(rng), gauss(rng));
        c.normalize();
      }
      const VectorXcd v = frame.rightCols(n - 1) * c;
      const double herm = (v.transpose() * H * v.conjugate())[0].real();
      const double symm = std::abs((v.transpose() * S * v)[0]);
      rep.min_margin = std::min(rep.min_margin, herm - symm);
    }
  }
  rep.pass = rep.min_margin > 0.0;
  return rep;
}

Eigen::MatrixXcd unitary_frame(const VectorXcd& nu) {
  const int n = static_cast<int>(nu.size());
  VectorXcd e1 = VectorXcd::Zero(n);
  e1[0] = 1.0;
  const cplx denom = 1.0 + std::conj(nu[0]);
  if (std::abs(denom) < 1e-8)
    throw ChartSingularity("unitary_frame: nu antipodal to chart centre");
  const VectorXcd u = e1 + nu;
  return MatrixXcd::Identity(n, n) + 2.0 * nu * e1.adjoint() -
         (u * u.adjoint()) / denom;
}

Eigen::VectorXcd fiber_chart(const Domain& dom, const VectorXcd& p,
                             const VectorXcd& v) {
  const MatrixXcd frame = unitary_frame(dom.normal(p));
  const VectorXcd w = frame.adjoint() * v;
  if (!(w[0].real() > 0.0) || std::abs(w[0].imag()) > 1e-10)
    throw NotInLp("fiber_chart: <v, nu_p> is not real positive");
  return w.tail(dom.dim - 1);
}

Eigen::VectorXcd fiber_unchart(const Domain& dom, const VectorXcd& p,
                               const VectorXcd& vhat) {
  const double r2 = vhat.squaredNorm();
  if (r2 >= 1.0) throw NotInLp("fiber_unchart: |vhat| must be < 1");
  VectorXcd w(dom.dim);
  w[0] = std::sqrt(1.0 - r2);
  w.tail(dom.dim - 1) = vhat;
  return unitary_frame(dom.normal(p)) * w;
}

BoundaryDatum make_datum(const Domain& dom, const VectorXcd& p,
                         const VectorXcd& vhat) {
  BoundaryDatum d;
  d.p = p;
  d.vhat = vhat;
  d.v = fiber_unchart(dom, p, vhat);
  return d;
}

Eigen::VectorXcd project_to_boundary(const Domain& dom, const VectorXcd& z) {
  if (z.norm() < 1e-12)
    throw std::invalid_argument("project_to_boundary: z too close to 0");
  double t = 1.0 / z.norm();
  for (int it = 0; it < 60; ++it) {
    const VectorXcd zt = t * z;
    const double r = dom.rho(zt);
    if (std::abs(r) < 1e-14) break;
    // d rho(t z)/dt = 2 Re <rho_z(tz), conj(z)>.
    const double dr = 2.0 * (dom.grad(zt).dot(z.conjugate())).real();
    t -= r / dr;
  }
  return t * z;
}

std::vector<VectorXcd> boundary_samples(const Domain& dom, int count,
                                        unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<VectorXcd> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    VectorXcd z(dom.dim);
    for (int j = 0; j < dom.dim; ++j) z[j] = cplx(gauss(rng), gauss(rng));
    out.push_back(project_to_boundary(dom, z));
  }
  return out;
}

Domain domain_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const std::string type = j.at("type").get<std::string>();
  const int n = j.at("n").get<int>();
  if (type == "ball") return make_ball(n);
  if (type == "ellipsoid") {
    const double eps = j.value("epsilon", 0.0);
    MatrixXd B = MatrixXd::Identity(n, n);
    if (j.contains("B")) {
      const auto& rows = j.at("B");
      B.resize(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) B(r, c) = rows[r][c].get<double>();
    }
    return make_ellipsoid(n, B, eps);
  }
  throw std::invalid_argument("domain_from_json: unknown type " + type);
}

std::string domain_to_json(const Domain& dom) {
  nlohmann::json j;
  j["type"] = dom.type;
  j["n"] = dom.dim;
  j["epsilon"] = dom.epsilon;
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < dom.B.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < dom.B.cols(); ++c) row.push_back(dom.B(r, c));
    rows.push_back(std::move(row));
  }
  j["B"] = std::move(rows);
  return j.dump();
}

}  // namespace cgeo
