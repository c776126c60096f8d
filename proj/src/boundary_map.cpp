#include "cgeo/boundary_map.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cgeo {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

VectorXcd eval(const CircleField& u, cplx z) {
  return holomorphic_extend(u, z, std::numeric_limits<double>::max());
}

VectorXcd eval_d(const CircleField& u, cplx z) {
  return holomorphic_extend(circle_derivative(u), z,
                            std::numeric_limits<double>::max());
}

// Re-solves geodesics for one anchor with warm starts across nearby vhat.
class LeafCache {
 public:
  LeafCache(const Domain& dom, const VectorXcd& p) : dom_(dom), p_(p) {}

  GeodesicDisc solve(const VectorXcd& vhat) {
    SolveOptions opts;
    opts.initial = warm_;
    GeodesicDisc g = solve_preferred(dom_, p_, vhat, opts);
    warm_ = g.phi;
    return g;
  }

 private:
  const Domain& dom_;
  VectorXcd p_;
  CircleField warm_;
};

VectorXcd phase_into_fiber(const Domain& dom, const VectorXcd& p,
                           VectorXcd v) {
  const MatrixXcd frame = unitary_frame(dom.normal(p));
  const cplx w0 = (frame.adjoint() * v)[0];
  if (std::abs(w0) < 1e-12)
    throw NotInLp("direction tangent to the boundary");
  return v * (std::conj(w0) / std::abs(w0));
}

}  // namespace

void ball_splitting(const VectorXcd& nu, const VectorXcd& w, VectorXcd& v,
                    cplx& zeta) {
  const cplx a = w.dot(nu);        // <nu, w>
  const cplx b = nu.dot(w);        // <w, nu>
  const double dn = (w - nu).norm();
  if (dn < 1e-14)
    throw std::invalid_argument("ball_splitting: w equals nu");
  v = -((1.0 - a) / std::abs(1.0 - a)) * (w - nu) / dn;
  zeta = 1.0 - dn * dn / std::norm(1.0 - a) * (1.0 - b);
}

VectorXcd leaf_point(const Domain& dom, const VectorXcd& p,
                     const VectorXcd& vhat, cplx zeta) {
  const GeodesicDisc g = solve_preferred(dom, p, vhat);
  return eval(g.phi, zeta);
}

LeafCoordinates shoot(const Domain& dom, const VectorXcd& p,
                      const VectorXcd& z) {
  const int n = dom.dim;
  if ((z - p).norm() < kDeltaExcl)
    throw TooCloseToSingularity("shoot: |z - p| = " +
                                std::to_string((z - p).norm()));
  const VectorXcd nu = dom.normal(p);

  // Initialize from the splitting of the osculating ball at p.
  VectorXcd w0 = z - (p - nu);
  if (w0.norm() > 1.0) w0 /= w0.norm();
  VectorXcd v0;
  cplx zeta;
  ball_splitting(nu, w0, v0, zeta);
  if (std::abs(zeta) > 1.0) zeta /= std::abs(zeta);
  VectorXcd vhat = fiber_chart(dom, p, phase_into_fiber(dom, p, v0));
  if (vhat.norm() > 0.99) vhat *= 0.99 / vhat.norm();

  LeafCache cache(dom, p);
  const double h = 1e-6;
  const int m = 2 * n;  // real unknowns: vhat (2n-2) plus zeta (2)
  MatrixXd J(m, m);
  LeafCoordinates out;

  GeodesicDisc g = cache.solve(vhat);
  VectorXcd r = eval(g.phi, zeta) - z;
  for (int it = 0; it < 40 && r.norm() > kTolShoot; ++it) {
    const VectorXcd base = eval(g.phi, zeta);
    for (int k = 0; k < n - 1; ++k)
      for (int part = 0; part < 2; ++part) {
        VectorXcd vh = vhat;
        vh[k] += part == 0 ? cplx(h, 0.0) : cplx(0.0, h);
        const VectorXcd col =
            (eval(cache.solve(vh).phi, zeta) - base) / h;
        J.col(2 * k + part) << col.real(), col.imag();
      }
    const VectorXcd d = eval_d(g.phi, zeta);
    J.col(m - 2) << d.real(), d.imag();
    const VectorXcd id = cplx(0.0, 1.0) * d;
    J.col(m - 1) << id.real(), id.imag();

    VectorXd rhs(m);
    rhs << r.real(), r.imag();
    Eigen::JacobiSVD<MatrixXd> svd(J, Eigen::ComputeThinU |
                                          Eigen::ComputeThinV);
    out.jacobian_condition =
        svd.singularValues()(0) / svd.singularValues()(m - 1);
    const VectorXd dx = svd.solve(-rhs);

    double lam = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 5; ++bt, lam *= 0.5) {
      VectorXcd vh = vhat;
      for (int k = 0; k < n - 1; ++k)
        vh[k] += lam * cplx(dx[2 * k], dx[2 * k + 1]);
      if (vh.norm() > 1.0 - 1e-6) vh *= (1.0 - 1e-6) / vh.norm();
      cplx zt = zeta + lam * cplx(dx[m - 2], dx[m - 1]);
      if (std::abs(zt) > 1.0) zt /= std::abs(zt);
      try {
        GeodesicDisc g2 = cache.solve(vh);
        const VectorXcd r2 = eval(g2.phi, zt) - z;
        if (r2.norm() < r.norm()) {
          vhat = vh;
          zeta = zt;
          g = std::move(g2);
          r = r2;
          accepted = true;
          break;
        }
      } catch (const std::runtime_error&) {
        // solver failed on the trial leaf; shorten
      }
    }
    if (!accepted) break;
  }

  out.vhat = vhat;
  out.zeta = zeta;
  out.converged = r.norm() <= kTolShoot;
  if (!out.converged && r.norm() > 1e-5)
    throw NoConvergence("shoot: residual " + std::to_string(r.norm()));
  return out;
}

VectorXcd psi(const Domain& dom, const VectorXcd& p, const VectorXcd& z) {
  const VectorXcd nu = dom.normal(p);
  if ((z - p).norm() < 1e-12) return nu;
  const LeafCoordinates lc = shoot(dom, p, z);
  const VectorXcd v = fiber_unchart(dom, p, lc.vhat);
  const double c = std::sqrt(1.0 - lc.vhat.squaredNorm());
  return nu + (lc.zeta - 1.0) * c * v;
}

VectorXcd psi_inverse(const Domain& dom, const VectorXcd& p,
                      const VectorXcd& w) {
  const VectorXcd nu = dom.normal(p);
  if ((w - nu).norm() < 1e-12) return p;
  VectorXcd v;
  cplx zeta;
  ball_splitting(nu, w, v, zeta);
  const VectorXcd vhat = fiber_chart(dom, p, phase_into_fiber(dom, p, v));
  const GeodesicDisc g = solve_preferred(dom, p, vhat);
  return eval(g.phi, zeta);
}

double poisson_kernel(const Domain& dom, const VectorXcd& p,
                      const VectorXcd& z) {
  const VectorXcd nu = dom.normal(p);
  const VectorXcd w = psi(dom, p, z);
  const cplx ip = nu.dot(w);  // <Psi, nu>
  return -(1.0 - w.squaredNorm()) / std::norm(1.0 - ip);
}

std::vector<FieldSample> evaluate_field(const Domain& dom, const VectorXcd& p,
                                        const std::vector<VectorXcd>& pts) {
  const VectorXcd nu = dom.normal(p);
  std::vector<FieldSample> out;
  out.reserve(pts.size());
  for (const VectorXcd& z : pts) {
    FieldSample s;
    s.z = z;
    try {
      const VectorXcd w = psi(dom, p, z);
      s.psi_norm = w.norm();
      s.P = -(1.0 - w.squaredNorm()) / std::norm(1.0 - nu.dot(w));
      s.converged = true;
    } catch (const std::runtime_error&) {
      s.P = std::numeric_limits<double>::quiet_NaN();
      s.psi_norm = std::numeric_limits<double>::quiet_NaN();
      s.converged = false;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string field_csv(const std::vector<FieldSample>& samples) {
  std::ostringstream os;
  os.precision(17);
  if (samples.empty()) return "";
  const int n = static_cast<int>(samples.front().z.size());
  for (int j = 0; j < n; ++j) os << "re_z" << j + 1 << ",";
  for (int j = 0; j < n; ++j) os << "im_z" << j + 1 << ",";
  os << "P,psi_norm,converged\n";
  for (const FieldSample& s : samples) {
    for (int j = 0; j < n; ++j) os << s.z[j].real() << ",";
    for (int j = 0; j < n; ++j) os << s.z[j].imag() << ",";
    if (s.converged)
      os << s.P << "," << s.psi_norm << ",1\n";
    else
      os << ",,0\n";
  }
  return os.str();
}

}  // namespace cgeo
