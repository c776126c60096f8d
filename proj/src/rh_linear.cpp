#include "cgeo/rh_linear.hpp"

#include <random>

namespace cgeo {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

double probe_margin(const MatrixXcd& H, const MatrixXcd& S,
                    const std::vector<VectorXcd>& extra) {
  const int n = static_cast<int>(H.rows());
  std::vector<VectorXcd> probes;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> eh(H);
  for (int k = 0; k < n; ++k) probes.push_back(eh.eigenvectors().col(k));
  Eigen::JacobiSVD<MatrixXcd> sv(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
  for (int k = 0; k < n; ++k) {
    probes.push_back(sv.matrixU().col(k).conjugate());
    probes.push_back(sv.matrixV().col(k));
  }
  probes.insert(probes.end(), extra.begin(), extra.end());
  double m = std::numeric_limits<double>::infinity();
  for (const VectorXcd& v : probes) {
    const VectorXcd u = v.normalized();
    const double herm = (u.transpose() * H * u.conjugate())[0].real();
    const double symm = std::abs((u.transpose() * S * u)[0]);
    m = std::min(m, herm - symm);
  }
  return m;
}

}  // namespace

RHSymbols RHSymbols::make(const std::vector<MatrixXcd>& H,
                          const std::vector<MatrixXcd>& S) {
  if (H.empty() || H.size() != S.size())
    throw std::invalid_argument("RHSymbols: symbol node counts differ");
  const int n = static_cast<int>(H[0].rows());
  std::mt19937 rng(271828);
  std::normal_distribution<double> gauss;
  std::vector<VectorXcd> extra;
  for (int t = 0; t < 6; ++t) {
    VectorXcd v(n);
    for (int j = 0; j < n; ++j) v[j] = cplx(gauss(rng), gauss(rng));
    extra.push_back(v);
  }
  RHSymbols sym;
  sym.n = n;
  sym.margin = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < H.size(); ++j) {
    const double scale = std::max(1.0, H[j].norm() + S[j].norm());
    if ((H[j] - H[j].adjoint()).norm() > 1e-12 * scale)
      throw std::invalid_argument("RHSymbols: H not Hermitian at a node");
    if ((S[j] - S[j].transpose()).norm() > 1e-12 * scale)
      throw std::invalid_argument("RHSymbols: S not symmetric at a node");
    sym.margin = std::min(sym.margin, probe_margin(H[j], S[j], extra));
  }
  sym.H = field_from_matrices(H);
  sym.S = field_from_matrices(S);
  return sym;
}

RHSymbols RHSymbols::identity(int n, int num_nodes) {
  std::vector<MatrixXcd> H(num_nodes, MatrixXcd::Identity(n, n));
  std::vector<MatrixXcd> S(num_nodes, MatrixXcd::Zero(n, n));
  return make(H, S);
}

struct RHSolver::Impl {
  int N = 0;
  int n = 0;
  int K = 0;  // retained nonzero frequencies 1..K and equations -1..-K
  std::vector<MatrixXcd> Hn, Sn;  // nodal symbols
  Eigen::ColPivHouseholderQR<MatrixXd> qr;
  double cond = 0.0;
  bool basis_ready = false;
  std::vector<CircleField> gr, gi, hr, hi;

  // r = H conj(g) + S g + f on nodes.
  CircleField base_map(const CircleField& g, const CircleField* f) const {
    MatrixXcd vals(n, N);
    for (int j = 0; j < N; ++j) {
      vals.col(j) = Hn[j] * g.value(j).conjugate() + Sn[j] * g.value(j);
      if (f) vals.col(j) += f->value(j);
    }
    return CircleField::from_values(vals);
  }

  VectorXd neg_flatten(const CircleField& r) const {
    VectorXd out(2 * n * K);
    for (int m = 1; m <= K; ++m) {
      const VectorXcd c = r.coeff(-m);
      for (int i = 0; i < n; ++i) {
        out[((m - 1) * n + i) * 2] = c[i].real();
        out[((m - 1) * n + i) * 2 + 1] = c[i].imag();
      }
    }
    return out;
  }
};

RHSolver::RHSolver(RHSymbols sym) : sym_(std::move(sym)) {
  if (!(sym_.margin > 0.0))
    throw NotAdmissible("RHSolver: symbol margin " +
                        std::to_string(sym_.margin) + " is not positive");
  impl_ = std::make_unique<Impl>();
  Impl& im = *impl_;
  im.N = sym_.H.num_nodes();
  im.n = sym_.n;
  im.K = im.N / 2 - 1;
  im.Hn.resize(im.N);
  im.Sn.resize(im.N);
  for (int j = 0; j < im.N; ++j) {
    im.Hn[j] = sym_.H_at(j);
    im.Sn[j] = sym_.S_at(j);
  }

  // Columns: the base map applied to e_i zeta^k and i e_i zeta^k,
  // k = 1..K. Unknown ordering ((k-1)*n + i)*2 + part.
  const int dim = 2 * im.n * im.K;
  MatrixXd A(dim, dim);
  MatrixXcd vals(im.n, im.N);
  for (int k = 1; k <= im.K; ++k) {
    for (int i = 0; i < im.n; ++i) {
      for (int part = 0; part < 2; ++part) {
        const cplx c = part == 0 ? cplx(1.0) : cplx(0.0, 1.0);
        vals.setZero();
        for (int j = 0; j < im.N; ++j)
          vals(i, j) = c * std::pow(CircleField::node(j, im.N), k);
        const CircleField g = CircleField::from_values(vals);
        A.col(((k - 1) * im.n + i) * 2 + part) =
            im.neg_flatten(im.base_map(g, nullptr));
      }
    }
  }
  im.qr.compute(A);
  const VectorXd diag = im.qr.matrixR().diagonal().cwiseAbs();
  im.cond = diag.maxCoeff() / std::max(diag.minCoeff(), 1e-300);
  if (im.cond > kCondMax)
    throw IllConditioned("RHSolver: truncated system condition " +
                         std::to_string(im.cond));
}

RHSolver::~RHSolver() = default;
RHSolver::RHSolver(RHSolver&&) noexcept = default;
RHSolver& RHSolver::operator=(RHSolver&&) noexcept = default;

int RHSolver::num_nodes() const { return impl_->N; }
double RHSolver::condition_estimate() const { return impl_->cond; }

CircleField RHSolver::solve_base(const CircleField& f,
                                 const VectorXcd& g0) const {
  const Impl& im = *impl_;
  const CircleField c0 = CircleField::constant(g0, im.N);
  const VectorXd rhs = -im.neg_flatten(im.base_map(c0, &f));
  const VectorXd x = im.qr.solve(rhs);
  MatrixXcd chat = MatrixXcd::Zero(im.n, im.N);
  chat.col(im.N / 2) = g0;
  for (int k = 1; k <= im.K; ++k)
    for (int i = 0; i < im.n; ++i)
      chat(i, k + im.N / 2) = cplx(x[((k - 1) * im.n + i) * 2],
                                   x[((k - 1) * im.n + i) * 2 + 1]);
  return CircleField::from_coeffs(chat);
}

void RHSolver::warm_up() {
  Impl& im = *impl_;
  if (im.basis_ready) return;
  const CircleField zero = CircleField::zero(im.n, im.N);
  for (int k = 0; k < im.n; ++k) {
    VectorXcd ek = VectorXcd::Zero(im.n);
    ek[k] = 1.0;
    im.gr.push_back(solve_base(zero, ek));
    im.gi.push_back(solve_base(zero, cplx(0, 1) * ek));
    // Data zeta H e_k + S e_k / zeta (resp. with factors -i, i).
    MatrixXcd fr(im.n, im.N), fi(im.n, im.N);
    for (int j = 0; j < im.N; ++j) {
      const cplx zj = CircleField::node(j, im.N);
      const VectorXcd a = zj * (im.Hn[j] * ek);
      const VectorXcd b = (im.Sn[j] * ek) / zj;
      fr.col(j) = a + b;
      fi.col(j) = cplx(0, -1) * a + cplx(0, 1) * b;
    }
    im.hr.push_back(
        solve_base(CircleField::from_values(fr), VectorXcd::Zero(im.n)));
    im.hi.push_back(
        solve_base(CircleField::from_values(fi), VectorXcd::Zero(im.n)));
  }
  im.basis_ready = true;
}

namespace {

// Evaluate a numerically holomorphic field and its complex derivative,
// ignoring truncation-level negative mass.
VectorXcd eval_h(const CircleField& u, cplx z) {
  return holomorphic_extend(u, z, std::numeric_limits<double>::max());
}

}  // namespace

CircleField RHSolver::solve_jet(const CircleField& f, const OneJet& c) {
  warm_up();
  Impl& im = *impl_;
  const int n = im.n;
  const CircleField gstar = solve_base(f, VectorXcd::Zero(n));
  const cplx z = c.zeta0;

  // Unknowns x = (Re g(0), Im g(0), Re g'(0), Im g'(0)).
  // g(zeta) = g(0) + zeta * G(zeta) with
  // G = gstar + sum_k Re g'_k(0) gr_k + Im g'_k(0) gi_k
  //           + Re g_k(0) hr_k + Im g_k(0) hi_k.
  MatrixXcd cols_val(n, 4 * n), cols_der(n, 4 * n);
  for (int k = 0; k < n; ++k) {
    VectorXcd ek = VectorXcd::Zero(n);
    ek[k] = 1.0;
    auto fill = [&](int col, const CircleField& b, const VectorXcd& head) {
      const VectorXcd bv = eval_h(b, z);
      const VectorXcd bd = eval_h(circle_derivative(b), z);
      cols_val.col(col) = head + z * bv;
      cols_der.col(col) = bv + z * bd;
    };
    fill(k, im.hr[k], ek);
    fill(n + k, im.hi[k], cplx(0, 1) * ek);
    fill(2 * n + k, im.gr[k], VectorXcd::Zero(n));
    fill(3 * n + k, im.gi[k], VectorXcd::Zero(n));
  }
  const VectorXcd sv = eval_h(gstar, z);
  const VectorXcd sd = eval_h(circle_derivative(gstar), z);
  const VectorXcd rhs_val = c.z0 - z * sv;
  const VectorXcd rhs_der = c.v0 - (sv + z * sd);

  MatrixXd A(4 * n, 4 * n);
  VectorXd b(4 * n);
  for (int col = 0; col < 4 * n; ++col)
    for (int i = 0; i < n; ++i) {
      A(2 * i, col) = cols_val(i, col).real();
      A(2 * i + 1, col) = cols_val(i, col).imag();
      A(2 * n + 2 * i, col) = cols_der(i, col).real();
      A(2 * n + 2 * i + 1, col) = cols_der(i, col).imag();
    }
  for (int i = 0; i < n; ++i) {
    b[2 * i] = rhs_val[i].real();
    b[2 * i + 1] = rhs_val[i].imag();
    b[2 * n + 2 * i] = rhs_der[i].real();
    b[2 * n + 2 * i + 1] = rhs_der[i].imag();
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(A);
  const VectorXd diag = qr.matrixR().diagonal().cwiseAbs();
  if (diag.maxCoeff() / std::max(diag.minCoeff(), 1e-300) > kCondMax)
    throw BasisDegenerate("solve_jet: constraint system singular");
  const VectorXd x = qr.solve(b);

  VectorXcd g0(n), g1(n);
  for (int k = 0; k < n; ++k) {
    g0[k] = cplx(x[k], x[n + k]);
    g1[k] = cplx(x[2 * n + k], x[3 * n + k]);
  }
  CircleField G = gstar;
  for (int k = 0; k < n; ++k)
    G = G + im.gr[k] * g1[k].real() + im.gi[k] * g1[k].imag() +
        im.hr[k] * g0[k].real() + im.hi[k] * g0[k].imag();

  // g = g(0) + zeta G: shift coefficients up by one.
  MatrixXcd chat = MatrixXcd::Zero(n, im.N);
  chat.col(im.N / 2) = g0;
  for (int k = 1; k < im.N / 2; ++k)
    chat.col(k + im.N / 2) += G.coeff(k - 1);
  return CircleField::from_coeffs(chat);
}

CircleField RHSolver::solve_two_point(const CircleField& f,
                                      const TwoPoint& c) {
  if (std::abs(c.zeta0 - c.xi0) < 1e-14)
    throw std::invalid_argument("solve_two_point: zeta0 == xi0");
  warm_up();
  Impl& im = *impl_;
  const int n = im.n;
  const CircleField gstar = solve_base(f, VectorXcd::Zero(n));

  MatrixXcd cols_a(n, 4 * n), cols_b(n, 4 * n);
  for (int k = 0; k < n; ++k) {
    VectorXcd ek = VectorXcd::Zero(n);
    ek[k] = 1.0;
    auto fill = [&](int col, const CircleField& bs, const VectorXcd& head) {
      cols_a.col(col) = head + c.zeta0 * eval_h(bs, c.zeta0);
      cols_b.col(col) = head + c.xi0 * eval_h(bs, c.xi0);
    };
    fill(k, im.hr[k], ek);
    fill(n + k, im.hi[k], cplx(0, 1) * ek);
    fill(2 * n + k, im.gr[k], VectorXcd::Zero(n));
    fill(3 * n + k, im.gi[k], VectorXcd::Zero(n));
  }
  const VectorXcd rhs_a = c.z0 - c.zeta0 * eval_h(gstar, c.zeta0);
  const VectorXcd rhs_b = c.w0 - c.xi0 * eval_h(gstar, c.xi0);

  MatrixXd A(4 * n, 4 * n);
  VectorXd b(4 * n);
  for (int col = 0; col < 4 * n; ++col)
    for (int i = 0; i < n; ++i) {
      A(2 * i, col) = cols_a(i, col).real();
      A(2 * i + 1, col) = cols_a(i, col).imag();
      A(2 * n + 2 * i, col) = cols_b(i, col).real();
      A(2 * n + 2 * i + 1, col) = cols_b(i, col).imag();
    }
  for (int i = 0; i < n; ++i) {
    b[2 * i] = rhs_a[i].real();
    b[2 * i + 1] = rhs_a[i].imag();
    b[2 * n + 2 * i] = rhs_b[i].real();
    b[2 * n + 2 * i + 1] = rhs_b[i].imag();
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(A);
  const VectorXd diag = qr.matrixR().diagonal().cwiseAbs();
  if (diag.maxCoeff() / std::max(diag.minCoeff(), 1e-300) > kCondMax)
    throw BasisDegenerate("solve_two_point: constraint system singular");
  const VectorXd x = qr.solve(b);

  VectorXcd g0(n), g1(n);
  for (int k = 0; k < n; ++k) {
    g0[k] = cplx(x[k], x[n + k]);
    g1[k] = cplx(x[2 * n + k], x[3 * n + k]);
  }
  CircleField G = gstar;
  for (int k = 0; k < n; ++k)
    G = G + im.gr[k] * g1[k].real() + im.gi[k] * g1[k].imag() +
        im.hr[k] * g0[k].real() + im.hi[k] * g0[k].imag();
  MatrixXcd chat = MatrixXcd::Zero(n, im.N);
  chat.col(im.N / 2) = g0;
  for (int k = 1; k < im.N / 2; ++k)
    chat.col(k + im.N / 2) += G.coeff(k - 1);
  return CircleField::from_coeffs(chat);
}

double RHSolver::base_residual(const CircleField& f,
                               const CircleField& g) const {
  return analytic_projection(impl_->base_map(g, &f)).sup_norm();
}

double RHSolver::jet_residual(const CircleField& f,
                              const CircleField& g) const {
  const Impl& im = *impl_;
  MatrixXcd vals(im.n, im.N);
  for (int j = 0; j < im.N; ++j) {
    const cplx zj = CircleField::node(j, im.N);
    const VectorXcd gz = g.value(j) / zj;
    vals.col(j) = im.Hn[j] * gz.conjugate() + im.Sn[j] * gz + f.value(j);
  }
  return analytic_projection(CircleField::from_values(vals)).sup_norm();
}

CircleField solve_base(const RHSymbols& sym, const CircleField& f,
                       const VectorXcd& g0) {
  return RHSolver(sym).solve_base(f, g0);
}

CircleField solve_jet(const RHSymbols& sym, const CircleField& f,
                      const OneJet& c) {
  RHSolver s(sym);
  return s.solve_jet(f, c);
}

CircleField solve_two_point(const RHSymbols& sym, const CircleField& f,
                            const TwoPoint& c) {
  RHSolver s(sym);
  return s.solve_two_point(f, c);
}

}  // namespace cgeo
