#pragma once

#include "cgeo/circle_spectral.hpp"

#include <memory>
#include <vector>

namespace cgeo {

struct NotAdmissible : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IllConditioned : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BasisDegenerate : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Admissible symbol pair for the linear Riemann-Hilbert problem: H(zeta)
/// Hermitian, S(zeta) symmetric, and v^t H conj(v) > |v^t S v| for all nonzero
/// v at every node (probed margin).
struct RHSymbols {
  int n = 0;
  CircleField H;  // matrix field, dim n*n
  CircleField S;  // matrix field, dim n*n
  double margin = 0.0;

  static RHSymbols make(const std::vector<Eigen::MatrixXcd>& H,
                        const std::vector<Eigen::MatrixXcd>& S);
  static RHSymbols identity(int n, int num_nodes = kDefaultNodes);

  Eigen::MatrixXcd H_at(int j) const { return matrix_at(H, j, n, n); }
  Eigen::MatrixXcd S_at(int j) const { return matrix_at(S, j, n, n); }
};

struct OneJet {
  cplx zeta0;
  Eigen::VectorXcd z0;
  Eigen::VectorXcd v0;
};

struct TwoPoint {
  cplx zeta0;
  cplx xi0;
  Eigen::VectorXcd z0;
  Eigen::VectorXcd w0;
};

inline constexpr double kCondMax = 1e10;

/**
 * Linear Riemann-Hilbert solver for a fixed symbol pair.
 *
 * Holds the dense factorization of the truncated base problem and the 4n
 * data-independent basis solutions, so repeated solves against the same
 * symbols (as in Newton iterations) reuse all heavy work. A solver instance
 * is safe for concurrent reads once `warm_up` (or any jet solve) has run.
 */
class RHSolver {
 public:
  explicit RHSolver(RHSymbols sym);
  ~RHSolver();
  RHSolver(RHSolver&&) noexcept;
  RHSolver& operator=(RHSolver&&) noexcept;

  const RHSymbols& symbols() const { return sym_; }
  int num_nodes() const;
  double condition_estimate() const;

  /// Unique holomorphic g with g(0) = g0 and Pi(H conj(g) + S g + f) = 0 at
  /// grid scale.
  CircleField solve_base(const CircleField& f,
                         const Eigen::VectorXcd& g0) const;

  /// Unique holomorphic g with g(zeta0) = z0, g'(zeta0) = v0 and
  /// H conj(g/zeta) + S g/zeta + f holomorphic at grid scale.
  CircleField solve_jet(const CircleField& f, const OneJet& c);

  /// As solve_jet with interpolation conditions g(zeta0) = z0, g(xi0) = w0.
  CircleField solve_two_point(const CircleField& f, const TwoPoint& c);

  /// Sup norm of Pi(H conj(g) + S g + f).
  double base_residual(const CircleField& f, const CircleField& g) const;
  /// Sup norm of Pi(H conj(g/zeta) + S g/zeta + f).
  double jet_residual(const CircleField& f, const CircleField& g) const;

  /// Precompute the 4n basis solutions (idempotent).
  void warm_up();

 private:
  struct Impl;
  RHSymbols sym_;
  std::unique_ptr<Impl> impl_;
};

// One-shot conveniences; construct a solver internally.
CircleField solve_base(const RHSymbols& sym, const CircleField& f,
                       const Eigen::VectorXcd& g0);
CircleField solve_jet(const RHSymbols& sym, const CircleField& f,
                      const OneJet& c);
CircleField solve_two_point(const RHSymbols& sym, const CircleField& f,
                            const TwoPoint& c);

}  // namespace cgeo
