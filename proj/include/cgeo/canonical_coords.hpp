#pragma once

#include "cgeo/geodesic_core.hpp"

namespace cgeo {

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OutsideCollar : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kTolFact = 1e-9;
/// Validity collar of the canonical chart around the boundary circle.
inline constexpr double kCollarRadialMin = 0.8;
inline constexpr double kCollarFiberMax = 0.1;

/**
 * Canonical coordinates along a solved geodesic disc.
 *
 * The fibered map G(w1, w') is linear in w' with holomorphic coefficient
 * columns built from the dual; composing with the factor H straightens the
 * quadratic part of the pulled-back defining function, giving
 * rho(z1, z') = lambda(z1, z') * r(z1, H(z1) z') with r = |dual| rho_dom(G).
 */
struct CanonicalChart {
  int n = 0;
  Domain dom;
  CircleField phi;        // dim n, holomorphic
  CircleField dual;       // dim n, holomorphic, dual^t phi' = 1
  CircleField psi1;       // scalar corona pair: psi1 dual_1 + psi2 dual_2 = 1
  CircleField psi2;
  CircleField g_columns;  // n x (n-1) matrix field, dG/dw'
  CircleField hessian_R;  // (n-1)^2 Hermitian field r_{w_i wbar_j}(., 0)
  CircleField factor_H;   // (n-1)^2 holomorphic, H^t R conj(H) = I
  CircleField S0;         // (n-1)^2 symmetric field rho_{z_i z_j}(., 0)
};

/// Builds the complete chart for a solved geodesic of dom.
CanonicalChart build_G(const Domain& dom, const GeodesicDisc& g);

/// Factors a positive-definite Hermitian matrix field: returns holomorphic H,
/// invertible on the closed disc, with H^t R conj(H) = I on nodes to
/// kTolFact. Gauge: H(0) lower-triangular with positive real diagonal.
CircleField spectral_factorize(const CircleField& R);

/// G(w1, w') = phi(w1) + dG/dw'(w1) w'; linear in w', G(., 0) = phi.
Eigen::VectorXcd chart_G(const CanonicalChart& chart,
                         const Eigen::VectorXcd& w);
/// r(w1, w') = |dual(w1)| rho_dom(G(w1, w')).
double chart_r(const CanonicalChart& chart, const Eigen::VectorXcd& w);
/// The explicit scalar factor lambda(z1, z').
double chart_lambda(const CanonicalChart& chart, const Eigen::VectorXcd& z);
/// rho(z) = lambda(z) * r(z1, H(z1) z') inside the collar
/// |z1| >= kCollarRadialMin, |z'| <= kCollarFiberMax.
double canonical_rho(const CanonicalChart& chart, const Eigen::VectorXcd& z);

struct StraighteningCheck {
  std::string name;
  double max_violation = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct StraighteningReport {
  std::vector<StraighteningCheck> checks;
  double max_violation = 0.0;  // over identity checks (not the S0 norm bound)
  bool pass = false;
};

/// Checks, at every node of the boundary circle:
///   rho_z(z1, 0) = (conj(z1), 0, ..., 0),
///   rho_{z zbar}(z1, 0) = I_n,
///   rho_{z1 z1}(z1, 0) = 0 and rho_{z1 z_j}(z1, 0) = 0,
///   H^t R conj(H) = I_{n-1},
///   ||S0||_op < 1.
StraighteningReport verify_straightening(const CanonicalChart& chart,
                                         double tol = 1e-7);

std::string chart_to_json(const CanonicalChart& chart);

}  // namespace cgeo
