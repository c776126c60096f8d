#pragma once

#include "cgeo/circle_spectral.hpp"

#include <functional>
#include <vector>

namespace cgeo {

struct NotSLC : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SampleOffBoundary : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ChartSingularity : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotInLp : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/**
 * Bounded strongly linearly convex domain given by a defining function with
 * analytic derivative oracles. rho < 0 inside, 0 on the boundary; when
 * `normalized` the real gradient has length two on the boundary, so the unit
 * outward normal is the conjugate of grad (= rho_zbar).
 *
 * Domains are immutable; all oracles are pure.
 */
struct Domain {
  int dim = 0;
  bool normalized = true;
  std::function<double(const Eigen::VectorXcd&)> rho;
  /// Holomorphic gradient rho_z.
  std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)> grad;
  /// Symmetric second derivative rho_zz.
  std::function<Eigen::MatrixXcd(const Eigen::VectorXcd&)> hess_zz;
  /// Hermitian mixed derivative rho_zzbar.
  std::function<Eigen::MatrixXcd(const Eigen::VectorXcd&)> hess_zzbar;

  // Construction parameters, echoed into configs and reports.
  std::string type;
  double epsilon = 0.0;
  Eigen::MatrixXd B;

  /// Unit outward normal at a boundary point.
  Eigen::VectorXcd normal(const Eigen::VectorXcd& p) const {
    return grad(p).conjugate();
  }
};

/// Boundary point with an inward-transverse unit direction: |v| = 1 and
/// <v, nu_p> real positive, plus its fiber-chart coordinate.
struct BoundaryDatum {
  Eigen::VectorXcd p;
  Eigen::VectorXcd v;
  Eigen::VectorXcd vhat;
};

struct SlcReport {
  double min_margin = 0.0;
  bool pass = false;
};

Domain make_ball(int n);

/// rho0(z) = |z|^2 + eps Re(z^t B z) - 1 with real symmetric B, rescaled by
/// 1/|rho0_z| so the gradient has length two on the boundary. Requires
/// eps * ||B||_op < 1.
Domain make_ellipsoid(int n, const Eigen::MatrixXd& B, double eps);

/// Verifies v^t rho_zzbar conj(v) > |v^t rho_zz v| over complex tangent probes
/// at each sample; returns the minimal margin.
SlcReport slc_check(const Domain& dom,
                    const std::vector<Eigen::VectorXcd>& samples);

/// Smooth family of unitaries with gamma_nu e1 = nu and gamma_{e1} = I,
/// defined away from nu = -e1 (single chart centred at e1).
Eigen::MatrixXcd unitary_frame(const Eigen::VectorXcd& nu);

Eigen::VectorXcd fiber_chart(const Domain& dom, const Eigen::VectorXcd& p,
                             const Eigen::VectorXcd& v);
Eigen::VectorXcd fiber_unchart(const Domain& dom, const Eigen::VectorXcd& p,
                               const Eigen::VectorXcd& vhat);
BoundaryDatum make_datum(const Domain& dom, const Eigen::VectorXcd& p,
                         const Eigen::VectorXcd& vhat);

/// Scales z radially (ray through the origin) onto the boundary.
Eigen::VectorXcd project_to_boundary(const Domain& dom,
                                     const Eigen::VectorXcd& z);

/// Deterministic boundary sample set (radial projection of sphere points).
std::vector<Eigen::VectorXcd> boundary_samples(const Domain& dom, int count,
                                               unsigned seed);

/// Config round-trip: {"type":"ball"|"ellipsoid","n":int,
///                     "epsilon":float,"B":[[...]]}.
Domain domain_from_json(const std::string& text);
std::string domain_to_json(const Domain& dom);

}  // namespace cgeo
