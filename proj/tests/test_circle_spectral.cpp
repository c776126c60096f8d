#include <doctest.h>

#include "cgeo/circle_spectral.hpp"

#include <random>

using namespace cgeo;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

// Independent oracle: Cauchy integral by the trapezoid rule,
// f(z) = (1/N) sum_j f(zeta_j) zeta_j / (zeta_j - z).
VectorXcd cauchy_quadrature(const CircleField& u, cplx z) {
  const int n = u.num_nodes();
  VectorXcd acc = VectorXcd::Zero(u.dim());
  for (int j = 0; j < n; ++j) {
    const cplx zj = u.node(j);
    acc += u.value(j) * (zj / (zj - z));
  }
  return acc / static_cast<double>(n);
}

CircleField sample_on_nodes(int dim, int n,
                            const std::function<VectorXcd(cplx)>& f) {
  MatrixXcd vals(dim, n);
  for (int j = 0; j < n; ++j) vals.col(j) = f(CircleField::node(j, n));
  return CircleField::from_values(vals);
}

CircleField random_bandlimited(int dim, int n, int band, std::mt19937& rng,
                               bool holomorphic = false) {
  std::normal_distribution<double> g;
  MatrixXcd chat = MatrixXcd::Zero(dim, n);
  for (int k = holomorphic ? 0 : -band; k <= band; ++k)
    for (int r = 0; r < dim; ++r)
      chat(r, k + n / 2) = cplx(g(rng), g(rng)) / (1.0 + k * k);
  return CircleField::from_coeffs(chat);
}

}  // namespace

TEST_CASE("values and coefficients round-trip") {
  std::mt19937 rng(7);
  CircleField u = random_bandlimited(3, 128, 40, rng);
  CircleField v = CircleField::from_values(u.values());
  CHECK((v.coeffs() - u.coeffs()).norm() <= 1e-13 * u.coeffs().norm());
  CircleField w = CircleField::from_coeffs(u.coeffs());
  CHECK((w.values() - u.values()).norm() <= 1e-13 * u.values().norm());
}

TEST_CASE("hilbert transform on elementary traces") {
  const int n = 64;
  CircleField c = sample_on_nodes(1, n, [](cplx z) {
    return VectorXcd::Constant(1, cplx(z.real()));
  });
  CircleField s = sample_on_nodes(1, n, [](cplx z) {
    return VectorXcd::Constant(1, cplx(z.imag()));
  });
  CHECK((hilbert_transform(c).values() - s.values()).cwiseAbs().maxCoeff() <=
        1e-13);

  CircleField k = CircleField::constant(VectorXcd::Constant(1, cplx(2.5, -1)), n);
  CHECK(hilbert_transform(k).sup_norm() <= 1e-14);

  // Re zeta^3 -> Im zeta^3.
  CircleField re3 = sample_on_nodes(1, n, [](cplx z) {
    return VectorXcd::Constant(1, cplx(std::pow(z, 3).real()));
  });
  CircleField im3 = sample_on_nodes(1, n, [](cplx z) {
    return VectorXcd::Constant(1, cplx(std::pow(z, 3).imag()));
  });
  CHECK((hilbert_transform(re3).values() - im3.values()).cwiseAbs().maxCoeff() <=
        1e-13);
}

TEST_CASE("hilbert transform squared is minus identity plus mean") {
  std::mt19937 rng(11);
  CircleField u = random_bandlimited(2, 128, 30, rng).real_part();
  CircleField hh = hilbert_transform(hilbert_transform(u));
  CircleField expect =
      (u * cplx(-1)) + CircleField::constant(u.mean(), u.num_nodes());
  CHECK((hh.values() - expect.values()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(hilbert_transform(u).is_real_valued());
}

TEST_CASE("analytic projection annihilates exactly the holomorphic part") {
  const int n = 64;
  CHECK(analytic_projection(CircleField::monomial(2, n)).sup_norm() <= 1e-14);
  CHECK(analytic_projection(
            CircleField::constant(VectorXcd::Constant(1, cplx(3, 1)), n))
            .sup_norm() <= 1e-14);
  CircleField m1 = CircleField::monomial(-1, n);
  CHECK((analytic_projection(m1).values() - m1.values()).cwiseAbs().maxCoeff() <=
        1e-14);

  // Definition check against (u - i H u)/2 - mean/2 on a random field.
  std::mt19937 rng(3);
  CircleField u = random_bandlimited(2, 128, 40, rng);
  CircleField byformula =
      (u - hilbert_transform(u) * cplx(0, 1)) * 0.5 -
      CircleField::constant(u.mean() * 0.5, u.num_nodes());
  CHECK((analytic_projection(u).values() - byformula.values())
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}

TEST_CASE("analytic projection is idempotent and detects holomorphy") {
  std::mt19937 rng(5);
  for (int t = 0; t < 5; ++t) {
    CircleField u = random_bandlimited(2, 128, 40, rng);
    CircleField p = analytic_projection(u);
    CHECK((analytic_projection(p).values() - p.values()).cwiseAbs().maxCoeff() <=
          1e-12);
  }
  CircleField h = random_bandlimited(2, 128, 40, rng, true);
  CHECK(analytic_projection(h).sup_norm() <= 1e-12 * h.sup_norm());
  CHECK(h.is_holomorphic());
  CircleField bad = h + CircleField::monomial(-3, 128) * 1e-3;
  CHECK(analytic_projection(bad).sup_norm() > 1e-4);
}

TEST_CASE("holomorphic extension") {
  const int n = 64;
  CHECK(holomorphic_extend(CircleField::monomial(2, n), 0.0).cwiseAbs()
            .maxCoeff() <= 1e-14);
  VectorXcd c = VectorXcd::Constant(1, cplx(1.5, -0.5));
  CHECK((holomorphic_extend(CircleField::constant(c, n), cplx(0.3, 0.2)) - c)
            .norm() <= 1e-14);
  // (1+zeta)^2 at 0.5 equals 2.25.
  CircleField q = sample_on_nodes(1, n, [](cplx z) {
    return VectorXcd::Constant(1, (1.0 + z) * (1.0 + z));
  });
  CHECK(std::abs(holomorphic_extend(q, 0.5)[0] - cplx(2.25)) <= 1e-13);

  CHECK_THROWS_AS(holomorphic_extend(CircleField::monomial(-1, n), 0.5),
                  NotHolomorphic);
}

TEST_CASE("holomorphic extension matches Cauchy quadrature") {
  std::mt19937 rng(13);
  CircleField u = random_bandlimited(2, 256, 40, rng, true);
  std::uniform_real_distribution<double> ur(0.0, 0.7), ua(0.0, 2 * kPi);
  for (int t = 0; t < 20; ++t) {
    const cplx z = std::polar(ur(rng), ua(rng));
    CHECK((holomorphic_extend(u, z) - cauchy_quadrature(u, z)).norm() <= 1e-10);
  }
}

TEST_CASE("spectral derivative") {
  const int n = 64;
  CircleField z1 = CircleField::monomial(1, n);
  CHECK((circle_derivative(z1).values().array() - cplx(1.0)).abs().maxCoeff() <=
        1e-13);
  CircleField z2 = CircleField::monomial(2, n);
  CHECK((circle_derivative(z2, 2).values().array() - cplx(2.0)).abs()
            .maxCoeff() <= 1e-13);
  CircleField z3 = CircleField::monomial(3, n);
  CHECK(std::abs(holomorphic_extend(circle_derivative(z3), 1.0)[0] - cplx(3.0)) <=
        1e-13);
}

TEST_CASE("winding numbers") {
  const int n = 64;
  CHECK(winding_number(CircleField::monomial(1, n)) == 1);
  CHECK(winding_number(CircleField::constant(
            VectorXcd::Constant(1, cplx(-1)), n)) == 0);
  // Ball radial geodesic probe at z=0: <0 - zeta e1, zeta e1> = -1.
  CircleField probe = sample_on_nodes(1, n, [](cplx z) {
    return VectorXcd::Constant(1, (0.0 - z) * std::conj(z));
  });
  CHECK(winding_number(probe) == 0);

  // Perturbation below half the minimum modulus leaves the winding unchanged.
  const int m = 512;
  MatrixXcd vals(1, m);
  for (int j = 0; j < m; ++j) {
    const cplx zj = CircleField::node(j, m);
    vals(0, j) = zj * zj + 0.3 * std::pow(zj, 5);
  }
  CHECK(winding_number(CircleField::from_values(vals)) == 2);

  CHECK_THROWS_AS(winding_number(sample_on_nodes(1, n, [](cplx z) {
                    return VectorXcd::Constant(1, z - 1.0);
                  })),
                  TooCloseToZero);
}

TEST_CASE("poincare distance") {
  CHECK(poincare_distance(0.0, 0.0) == 0.0);
  CHECK(std::abs(poincare_distance(0.0, 0.5) - 0.5493061443340549) <= 1e-15);
  // Moebius invariance: move 0.3 to 0 with m(z) = (z-0.3)/(1-0.3 z).
  const cplx a(0.3, 0.0), b(0.0, 0.3);
  auto m = [&](cplx z) { return (z - a) / (1.0 - std::conj(a) * z); };
  CHECK(std::abs(poincare_distance(a, b) - poincare_distance(m(a), m(b))) <=
        1e-14);
  CHECK(poincare_distance(0.2, 0.7) ==
        doctest::Approx(poincare_distance(0.7, 0.2)).epsilon(1e-14));
  CHECK_THROWS_AS(poincare_distance(1.2, 0.0), OutsideDisc);
}

TEST_CASE("json round-trip") {
  std::mt19937 rng(23);
  CircleField u = random_bandlimited(2, 64, 20, rng);
  CircleField v = field_from_json(to_json(u));
  CHECK(v.num_nodes() == u.num_nodes());
  CHECK(v.dim() == u.dim());
  CHECK((v.coeffs() - u.coeffs()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("matrix fields ride on CircleField") {
  const int n = 32;
  std::vector<MatrixXcd> mats(n);
  for (int j = 0; j < n; ++j) {
    const cplx zj = CircleField::node(j, n);
    MatrixXcd m(2, 2);
    m << 1.0, zj, 0.0, 2.0;
    mats[j] = m;
  }
  CircleField mf = field_from_matrices(mats);
  CHECK((matrix_at(mf, 3, 2, 2) - mats[3]).norm() <= 1e-15);
  CircleField u = sample_on_nodes(2, n, [](cplx z) {
    VectorXcd v(2);
    v << z, 1.0;
    return v;
  });
  CircleField mu = matrix_apply(mf, 2, 2, u);
  for (int j = 0; j < n; ++j)
    CHECK((mu.value(j) - mats[j] * u.value(j)).norm() <= 1e-14);
}
