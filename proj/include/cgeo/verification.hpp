#pragma once

#include "cgeo/boundary_map.hpp"
#include "cgeo/canonical_coords.hpp"

namespace cgeo {

struct VerifyCheck {
  std::string name;
  double max_violation = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyCheck> checks;
  bool pass = false;
  int failed_solves = 0;  // solver failures are reported, never hidden
};

std::string report_to_json(const VerifyReport& rep);

struct SamplePlan {
  int count = 20;
  unsigned seed = 2026;
  double tol_properness = 1e-8;
  double tol_dual = 1e-7;
  double tol_normalization = 1e-7;
  double tol_equivariance = 1e-6;
  double solver_tol = kTolGeo;
};

/// Per-sample solve battery: properness of the boundary trace, holomorphy of
/// the dual candidate, winding of <z0 - phi, nu(phi)> for an interior probe,
/// the boundary jet normalization, and equivariance under a fixed real
/// rotation of the domain. Aggregates max violations over the plan.
VerifyReport run_geodesic_battery(const Domain& dom,
                                  const SamplePlan& plan = {});

struct SmoothnessDirection {
  Eigen::VectorXcd dp;    // tangent displacement of the anchor (re-projected)
  Eigen::VectorXcd dvhat; // displacement of the fiber coordinate
};

/// Richardson consistency of central second differences of the solved disc
/// with respect to the datum, at steps h, h/2, h/4: the difference-of-
/// differences ratio is ~4 for C^2 parameter dependence at grid scale.
/// Reports the ratio; Holder exponents are out of certification scope.
VerifyReport parameter_smoothness_probe(const Domain& dom,
                                        const Eigen::VectorXcd& p,
                                        const Eigen::VectorXcd& vhat,
                                        const SmoothnessDirection& dir,
                                        double h = 0.05);

/// Boundary behavior of the pluricomplex Poisson kernel anchored at p:
/// decay near the boundary away from p, the nontangential product bracket at
/// p, mean-value harmonicity along a leaf, the leaf pullback closed form,
/// and (on the ball) the global closed-form kernel.
VerifyReport hcma_boundary_probe(const Domain& dom, const Eigen::VectorXcd& p);

}  // namespace cgeo
