#pragma once

#include "cgeo/domain_model.hpp"
#include "cgeo/rh_linear.hpp"

namespace cgeo {

struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DualDegenerate : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DualNotHolomorphic : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FirstComponentVanishes : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kTolGeo = 1e-8;
inline constexpr int kMaxNewton = 25;

/// Residual blocks of the nonlinear system cutting out preferred geodesics:
/// properness, the projected flattened normal condition, the two boundary
/// jet conditions at 1, and the stationarity of |dual| at 1.
struct ThetaBlocks {
  CircleField rho_block;   // real scalar field
  CircleField proj_block;  // dim n-1, strictly negative frequencies
  Eigen::VectorXcd point_block;
  Eigen::VectorXcd deriv_block;
  double normalization_block = 0.0;

  double sup_norm() const;
  ThetaBlocks negated() const;
};

/// A solved geodesic disc: holomorphic trace phi, its dual, the boundary
/// datum, the flattening matrix field A0 (A0^t dual = e1), and the positive
/// weight mu with dual = zeta mu rho_z(phi) on the circle.
struct GeodesicDisc {
  CircleField phi;   // dim n, holomorphic
  CircleField dual;  // dim n, holomorphic
  BoundaryDatum datum;
  CircleField A0;  // matrix field, dim n*n, holomorphic
  CircleField mu;  // real scalar field
  ThetaBlocks diagnostics;
  std::vector<double> residual_history;
  int newton_iterations = 0;
};

struct SolveOptions {
  int num_nodes = kDefaultNodes;
  double tol = kTolGeo;
  int max_iter = kMaxNewton;
  bool homotopy = true;
  /// Optional warm start; when set (matching dimension), Newton starts here
  /// and the homotopy is only used as a fallback.
  CircleField initial;
};

/// Closed-form geodesic of the unit ball through boundary point q with
/// direction v: phi(zeta) = q + (zeta - 1) <v,q> v.
GeodesicDisc ball_geodesic(const Eigen::VectorXcd& q,
                           const Eigen::VectorXcd& v,
                           int num_nodes = kDefaultNodes);

/// Holomorphic invertible matrix field with A0^t dual = e1 on the circle.
/// Rotates coordinates by a constant unitary so one dual component stays
/// uniformly away from zero, then uses the single-function reciprocal as the
/// corona pair.
CircleField flattening_matrix(const CircleField& phi, const CircleField& dual);

/// Weight mu = 1 / (zeta <rho_z(phi), conj(phi')>) as a nodal field.
CircleField dual_weight(const Domain& dom, const CircleField& phi);
/// zeta mu rho_z(phi) on nodes (holomorphic for geodesics).
CircleField dual_candidate(const Domain& dom, const CircleField& phi);

ThetaBlocks theta_residual(const Domain& dom, const CircleField& phi,
                           const CircleField& A0, const Eigen::VectorXcd& p,
                           const Eigen::VectorXcd& vhat);

/// Forward directional derivative of the system at base (A0, mu frozen).
ThetaBlocks theta_linearized(const Domain& dom, const GeodesicDisc& base,
                             const CircleField& dphi);

/// Solves the linearized system L(dphi) = rhs via the scalar conjugate
/// function formula for the first rotated component and a linear
/// Riemann-Hilbert solve for the rest.
CircleField linearized_step(const Domain& dom, const GeodesicDisc& base,
                            const ThetaBlocks& rhs);

GeodesicDisc solve_preferred(const Domain& dom, const Eigen::VectorXcd& p,
                             const Eigen::VectorXcd& vhat,
                             const SolveOptions& opts = {});

struct IsometryReport {
  double disc_distance = 0.0;
  double reanchored_distance = 0.0;
};

/// Compares the Poincare distance of zeta1, zeta2 with the distance induced
/// by an independently re-anchored solve through the two image points.
IsometryReport isometry_check(const Domain& dom, const GeodesicDisc& g,
                              cplx zeta1, cplx zeta2);

/// Locates zeta with |phi(zeta) - z| minimal by damped Gauss-Newton.
cplx invert_disc_point(const GeodesicDisc& g, const Eigen::VectorXcd& z,
                       cplx guess);

/// JSON export: datum, Fourier coefficients of phi and dual, diagnostics.
std::string geodesic_to_json(const GeodesicDisc& g);

}  // namespace cgeo
