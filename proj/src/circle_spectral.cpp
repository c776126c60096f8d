#include "cgeo/circle_spectral.hpp"

#include <json.hpp>

#include <cmath>
#include <vector>

namespace cgeo {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_grid(int n) {
  if (!power_of_two(n) || n < 4)
    throw std::invalid_argument("CircleField: num_nodes must be a power of two >= 4");
}

}  // namespace

void fft(Eigen::VectorXcd& data, bool inverse) {
  const int n = static_cast<int>(data.size());
  check_grid(n);
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / len * (inverse ? 1.0 : -1.0);
    const cplx wl(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      cplx w(1.0);
      for (int k = 0; k < len / 2; ++k) {
        cplx a = data[i + k];
        cplx b = data[i + k + len / 2] * w;
        data[i + k] = a + b;
        data[i + k + len / 2] = a - b;
        w *= wl;
      }
    }
  }
  if (!inverse) data /= static_cast<double>(n);
}

cplx CircleField::node(int j, int num_nodes) {
  const double th = 2.0 * kPi * j / num_nodes;
  return {std::cos(th), std::sin(th)};
}

CircleField CircleField::from_values(const Eigen::MatrixXcd& vals) {
  check_grid(static_cast<int>(vals.cols()));
  const int n = static_cast<int>(vals.cols());
  CircleField f;
  f.vals_ = vals;
  f.chat_.resize(vals.rows(), n);
  Eigen::VectorXcd buf(n);
  for (int r = 0; r < vals.rows(); ++r) {
    buf = vals.row(r).transpose();
    fft(buf, false);
    for (int k = -n / 2; k < n / 2; ++k)
      f.chat_(r, k + n / 2) = buf[(k + n) % n];
  }
  return f;
}

CircleField CircleField::from_coeffs(const Eigen::MatrixXcd& chat) {
  check_grid(static_cast<int>(chat.cols()));
  const int n = static_cast<int>(chat.cols());
  CircleField f;
  f.chat_ = chat;
  f.vals_.resize(chat.rows(), n);
  Eigen::VectorXcd buf(n);
  for (int r = 0; r < chat.rows(); ++r) {
    buf.setZero();
    for (int k = -n / 2; k < n / 2; ++k) buf[(k + n) % n] = chat(r, k + n / 2);
    fft(buf, true);
    f.vals_.row(r) = buf.transpose();
  }
  return f;
}

CircleField CircleField::zero(int dim, int num_nodes) {
  return from_coeffs(Eigen::MatrixXcd::Zero(dim, num_nodes));
}

CircleField CircleField::constant(const Eigen::VectorXcd& c, int num_nodes) {
  Eigen::MatrixXcd chat =
      Eigen::MatrixXcd::Zero(c.size(), num_nodes);
  chat.col(num_nodes / 2) = c;
  return from_coeffs(chat);
}

CircleField CircleField::monomial(int k, int num_nodes) {
  if (k < -num_nodes / 2 || k >= num_nodes / 2)
    throw std::invalid_argument("monomial: frequency out of range");
  Eigen::MatrixXcd chat = Eigen::MatrixXcd::Zero(1, num_nodes);
  chat(0, k + num_nodes / 2) = 1.0;
  return from_coeffs(chat);
}

double CircleField::sup_norm() const {
  double m = 0.0;
  for (int j = 0; j < num_nodes(); ++j) m = std::max(m, vals_.col(j).norm());
  return m;
}

double CircleField::negative_mass() const {
  const int n = num_nodes();
  double m = 0.0;
  for (int k = -n / 2; k < 0; ++k)
    m = std::max(m, chat_.col(k + n / 2).norm());
  return m;
}

double CircleField::tol_neg() const {
  return std::max(1e-10 * sup_norm(), 1e-14);
}

bool CircleField::is_real_valued(double tol) const {
  const int n = num_nodes();
  for (int k = 1; k < n / 2; ++k)
    if ((coeff(-k) - coeff(k).conjugate()).norm() > tol) return false;
  if (coeff(0).imag().norm() > tol) return false;
  if (coeff(-n / 2).norm() > tol && coeff(-n / 2).imag().norm() > tol)
    return false;
  return true;
}

CircleField CircleField::component(int i) const {
  CircleField f;
  f.vals_ = vals_.row(i);
  f.chat_ = chat_.row(i);
  return f;
}

CircleField CircleField::conjugated() const {
  return from_values(vals_.conjugate());
}

CircleField CircleField::real_part() const {
  return from_values(vals_.real().cast<cplx>());
}

CircleField CircleField::imag_part() const {
  return from_values(vals_.imag().cast<cplx>());
}

CircleField CircleField::operator+(const CircleField& o) const {
  CircleField f;
  f.vals_ = vals_ + o.vals_;
  f.chat_ = chat_ + o.chat_;
  return f;
}

CircleField CircleField::operator-(const CircleField& o) const {
  CircleField f;
  f.vals_ = vals_ - o.vals_;
  f.chat_ = chat_ - o.chat_;
  return f;
}

CircleField CircleField::operator*(cplx s) const {
  CircleField f;
  f.vals_ = vals_ * s;
  f.chat_ = chat_ * s;
  return f;
}

CircleField CircleField::pointwise(const CircleField& o) const {
  if (o.dim() == 1 && dim() != 1) {
    Eigen::MatrixXcd v = vals_;
    for (int j = 0; j < num_nodes(); ++j) v.col(j) *= o.vals_(0, j);
    return from_values(v);
  }
  if (o.dim() != dim())
    throw std::invalid_argument("pointwise: dimension mismatch");
  return from_values(vals_.cwiseProduct(o.vals_));
}

CircleField hilbert_transform(const CircleField& u) {
  const int n = u.num_nodes();
  Eigen::MatrixXcd chat = u.coeffs();
  const cplx mi(0.0, -1.0);
  for (int k = -n / 2; k < n / 2; ++k) {
    const double s = k > 0 ? 1.0 : (k < 0 ? -1.0 : 0.0);
    chat.col(k + n / 2) *= mi * s;
  }
  return CircleField::from_coeffs(chat);
}

CircleField analytic_projection(const CircleField& u) {
  const int n = u.num_nodes();
  Eigen::MatrixXcd chat = u.coeffs();
  for (int k = 0; k < n / 2; ++k) chat.col(k + n / 2).setZero();
  return CircleField::from_coeffs(chat);
}

Eigen::VectorXcd holomorphic_extend(const CircleField& u, cplx zeta,
                                    double tol) {
  if (tol < 0.0) tol = u.tol_neg();
  if (u.negative_mass() > tol)
    throw NotHolomorphic("holomorphic_extend: negative-frequency mass " +
                         std::to_string(u.negative_mass()) +
                         " exceeds tolerance");
  if (std::abs(zeta) > 1.0 + 1e-12)
    throw OutsideDisc("holomorphic_extend: |zeta| > 1");
  const int n = u.num_nodes();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(u.dim());
  for (int k = n / 2 - 1; k >= 0; --k) acc = acc * zeta + u.coeff(k);
  return acc;
}

CircleField circle_derivative(const CircleField& u, int order) {
  if (order < 1) throw std::invalid_argument("circle_derivative: order >= 1");
  const int n = u.num_nodes();
  Eigen::MatrixXcd chat = u.coeffs();
  for (int o = 0; o < order; ++o) {
    Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(chat.rows(), n);
    for (int k = -n / 2 + 1; k < n / 2; ++k)
      if (k != 0 && k - 1 >= -n / 2)
        next.col(k - 1 + n / 2) = static_cast<double>(k) * chat.col(k + n / 2);
    chat = next;
  }
  return CircleField::from_coeffs(chat);
}

int winding_number(const CircleField& u) {
  if (u.dim() != 1)
    throw std::invalid_argument("winding_number: scalar fields only");
  const int n = u.num_nodes();
  double minabs = std::numeric_limits<double>::infinity();
  double maxinc = 0.0;
  for (int j = 0; j < n; ++j) {
    const cplx a = u.values()(0, j);
    const cplx b = u.values()(0, (j + 1) % n);
    minabs = std::min(minabs, std::abs(a));
    maxinc = std::max(maxinc, std::abs(b - a));
  }
  if (!(minabs > 10.0 * maxinc) || minabs == 0.0)
    throw TooCloseToZero("winding_number: trace passes too close to zero");
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    const cplx a = u.values()(0, j);
    const cplx b = u.values()(0, (j + 1) % n);
    total += std::arg(b / a);
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

double poincare_distance(cplx z1, cplx z2) {
  if (std::abs(z1) >= 1.0 || std::abs(z2) >= 1.0)
    throw OutsideDisc("poincare_distance: arguments must lie in the open disc");
  const double m = std::abs((z1 - z2) / (1.0 - z1 * std::conj(z2)));
  return std::atanh(m);
}

Eigen::MatrixXcd matrix_at(const CircleField& m, int j, int rows, int cols) {
  if (m.dim() != rows * cols)
    throw std::invalid_argument("matrix_at: dimension mismatch");
  return Eigen::Map<const Eigen::MatrixXcd>(m.values().col(j).data(), rows,
                                            cols);
}

CircleField field_from_matrices(const std::vector<Eigen::MatrixXcd>& mats) {
  const int n = static_cast<int>(mats.size());
  const int rows = static_cast<int>(mats[0].rows());
  const int cols = static_cast<int>(mats[0].cols());
  Eigen::MatrixXcd vals(rows * cols, n);
  for (int j = 0; j < n; ++j)
    vals.col(j) = Eigen::Map<const Eigen::VectorXcd>(mats[j].data(),
                                                     rows * cols);
  return CircleField::from_values(vals);
}

CircleField matrix_apply(const CircleField& m, int rows, int cols,
                         const CircleField& u) {
  if (u.dim() != cols) throw std::invalid_argument("matrix_apply: dim mismatch");
  const int n = u.num_nodes();
  Eigen::MatrixXcd vals(rows, n);
  for (int j = 0; j < n; ++j)
    vals.col(j) = matrix_at(m, j, rows, cols) * u.value(j);
  return CircleField::from_values(vals);
}

std::string to_json(const CircleField& u) {
  nlohmann::json j;
  j["n"] = u.num_nodes();
  j["dim"] = u.dim();
  nlohmann::json coeffs = nlohmann::json::array();
  const int n = u.num_nodes();
  for (int k = -n / 2; k < n / 2; ++k) {
    const Eigen::VectorXcd c = u.coeff(k);
    for (int r = 0; r < u.dim(); ++r)
      coeffs.push_back({c[r].real(), c[r].imag()});
  }
  j["coeffs"] = std::move(coeffs);
  return j.dump();
}

CircleField field_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const int n = j.at("n").get<int>();
  const int dim = j.at("dim").get<int>();
  const auto& coeffs = j.at("coeffs");
  if (static_cast<int>(coeffs.size()) != n * dim)
    throw std::invalid_argument("field_from_json: coefficient count mismatch");
  Eigen::MatrixXcd chat(dim, n);
  int idx = 0;
  for (int col = 0; col < n; ++col)
    for (int r = 0; r < dim; ++r, ++idx)
      chat(r, col) = cplx(coeffs[idx][0].get<double>(),
                          coeffs[idx][1].get<double>());
  return CircleField::from_coeffs(chat);
}

}  // namespace cgeo
