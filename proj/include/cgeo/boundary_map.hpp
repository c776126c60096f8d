#pragma once

#include "cgeo/geodesic_core.hpp"

namespace cgeo {

struct TooCloseToSingularity : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kDeltaExcl = 1e-2;
inline constexpr double kTolShoot = 1e-7;

/// Leaf coordinates of a point: the geodesic through the anchor p hitting it,
/// given by the fiber coordinate of the direction and the disc parameter.
struct LeafCoordinates {
  Eigen::VectorXcd vhat;
  cplx zeta;
  bool converged = false;
  double jacobian_condition = 0.0;
};

/// The splitting of the closed ball into geodesic leaves through nu: the
/// unique (v, zeta) with eta_{nu,v}(zeta) = w, in closed form.
void ball_splitting(const Eigen::VectorXcd& nu, const Eigen::VectorXcd& w,
                    Eigen::VectorXcd& v, cplx& zeta);

/// Evaluates the solved geodesic for (p, vhat) at zeta.
Eigen::VectorXcd leaf_point(const Domain& dom, const Eigen::VectorXcd& p,
                            const Eigen::VectorXcd& vhat, cplx zeta);

/// Finds the leaf coordinates of z by Newton over (vhat, zeta), re-solving
/// the geodesic each iteration with finite-difference parameter derivatives.
LeafCoordinates shoot(const Domain& dom, const Eigen::VectorXcd& p,
                      const Eigen::VectorXcd& z);

/// Boundary spherical representation Psi_p, mapping the closed domain onto
/// the closed unit ball leafwise; psi(p) = nu_p by convention.
Eigen::VectorXcd psi(const Domain& dom, const Eigen::VectorXcd& p,
                     const Eigen::VectorXcd& z);

/// Inverse via the closed ball splitting followed by one geodesic solve.
Eigen::VectorXcd psi_inverse(const Domain& dom, const Eigen::VectorXcd& p,
                             const Eigen::VectorXcd& w);

/// Pluricomplex Poisson kernel P(z, p) = -(1-|Psi|^2)/|1-<Psi,nu_p>|^2.
double poisson_kernel(const Domain& dom, const Eigen::VectorXcd& p,
                      const Eigen::VectorXcd& z);

struct FieldSample {
  Eigen::VectorXcd z;
  double P = 0.0;
  double psi_norm = 0.0;
  bool converged = false;
};

/// Pointwise kernel evaluation over a batch; failures are flagged, not
/// thrown. Points inside the exclusion radius of p come back unconverged.
std::vector<FieldSample> evaluate_field(const Domain& dom,
                                        const Eigen::VectorXcd& p,
                                        const std::vector<Eigen::VectorXcd>& pts);

/// CSV with columns re(z1..zn), im(z1..zn), P, |psi|, converged.
std::string field_csv(const std::vector<FieldSample>& samples);

}  // namespace cgeo
