#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace cgeo {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr int kDefaultNodes = 256;

struct NotHolomorphic : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooCloseToZero : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OutsideDisc : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// In-place radix-2 FFT. Forward maps nodal values u_j to raw bins
/// b_k = (1/N) sum_j u_j exp(-2 pi i j k / N); inverse undoes it.
/// N must be a power of two.
void fft(Eigen::VectorXcd& data, bool inverse);

/**
 * Band-limited trace of a map from the unit circle to C^dim.
 *
 * Nodal values at zeta_j = exp(2 pi i j / N) and centered Fourier
 * coefficients c_k, k = -N/2 .. N/2-1, are kept consistent; fields are
 * immutable after construction and safe to share between threads.
 */
class CircleField {
 public:
  CircleField() = default;

  /// vals is dim x N, column j holding the value at zeta_j.
  static CircleField from_values(const Eigen::MatrixXcd& vals);
  /// chat is dim x N, column j holding the coefficient of frequency j - N/2.
  static CircleField from_coeffs(const Eigen::MatrixXcd& chat);
  static CircleField zero(int dim, int num_nodes = kDefaultNodes);
  static CircleField constant(const Eigen::VectorXcd& c,
                              int num_nodes = kDefaultNodes);
  /// Scalar monomial zeta^k as a trace.
  static CircleField monomial(int k, int num_nodes = kDefaultNodes);

  int num_nodes() const { return static_cast<int>(vals_.cols()); }
  int dim() const { return static_cast<int>(vals_.rows()); }

  const Eigen::MatrixXcd& values() const { return vals_; }
  /// Centered coefficient table, column j <-> frequency j - N/2.
  const Eigen::MatrixXcd& coeffs() const { return chat_; }

  Eigen::VectorXcd value(int j) const { return vals_.col(j); }
  /// Coefficient of frequency k, k in [-N/2, N/2).
  Eigen::VectorXcd coeff(int k) const { return chat_.col(k + num_nodes() / 2); }

  static cplx node(int j, int num_nodes);
  cplx node(int j) const { return node(j, num_nodes()); }

  double sup_norm() const;
  /// Largest coefficient magnitude at strictly negative frequencies.
  double negative_mass() const;
  /// Default holomorphy tolerance: 1e-10 times the sup norm (floored at 1e-14).
  double tol_neg() const;
  bool is_holomorphic() const { return negative_mass() <= tol_neg(); }
  bool is_real_valued(double tol = 1e-12) const;

  Eigen::VectorXcd mean() const { return coeff(0); }
  CircleField component(int i) const;
  CircleField conjugated() const;
  CircleField real_part() const;
  CircleField imag_part() const;

  CircleField operator+(const CircleField& o) const;
  CircleField operator-(const CircleField& o) const;
  CircleField operator*(cplx s) const;
  /// Pointwise product with a scalar field (o.dim()==1) or componentwise
  /// product when dimensions match.
  CircleField pointwise(const CircleField& o) const;

 private:
  Eigen::MatrixXcd vals_;
  Eigen::MatrixXcd chat_;
};

/// Fourier-multiplier Hilbert transform: c_k -> -i sgn(k) c_k.
CircleField hilbert_transform(const CircleField& u);

/// Analytic projection Pi u = (u - i H u)/2 - mean(u)/2; retains exactly the
/// strictly negative-frequency content of u.
CircleField analytic_projection(const CircleField& u);

/// Evaluates sum_{k>=0} c_k zeta^k in the closed disc.
/// Throws NotHolomorphic if negative-frequency mass exceeds the field's
/// tolerance (or `tol` when nonnegative).
Eigen::VectorXcd holomorphic_extend(const CircleField& u, cplx zeta,
                                    double tol = -1.0);

/// Spectral differentiation d/dzeta of the Laurent series: the output has
/// coefficient k * c_k at frequency k-1. For holomorphic traces this is the
/// trace of the complex derivative of the extension.
CircleField circle_derivative(const CircleField& u, int order = 1);

/// Winding number of a nonvanishing scalar trace; requires
/// min_j |u_j| > 10 * max_j |u_{j+1} - u_j| (sampling guard).
int winding_number(const CircleField& u);

double poincare_distance(cplx z1, cplx z2);

/// Matrix-valued fields ride on CircleField with dim = rows*cols,
/// column-major flattening.
Eigen::MatrixXcd matrix_at(const CircleField& m, int j, int rows, int cols);
CircleField field_from_matrices(const std::vector<Eigen::MatrixXcd>& mats);
/// Pointwise matrix-vector product: (m u)(zeta_j) = M(zeta_j) u(zeta_j).
CircleField matrix_apply(const CircleField& m, int rows, int cols,
                         const CircleField& u);

/// JSON round-trip: {"n": N, "dim": d, "coeffs": [[re,im],...]} with
/// frequencies ordered k = -N/2 .. N/2-1, dim consecutive pairs per frequency.
std::string to_json(const CircleField& u);
CircleField field_from_json(const std::string& text);

}  // namespace cgeo
