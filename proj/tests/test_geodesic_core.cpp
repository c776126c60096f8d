#include <doctest.h>

#include "cgeo/geodesic_core.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <random>

using namespace cgeo;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

namespace {

VectorXcd eval(const CircleField& u, cplx z) {
  return holomorphic_extend(u, z, std::numeric_limits<double>::max());
}

VectorXcd eval_d(const CircleField& u, cplx z) {
  return holomorphic_extend(circle_derivative(u), z,
                            std::numeric_limits<double>::max());
}

// Explicit invariant distance of the unit ball.
double ball_distance(const VectorXcd& z, const VectorXcd& w) {
  const cplx ip = w.dot(z);  // <z, w>
  const double num = (1.0 - z.squaredNorm()) * (1.0 - w.squaredNorm());
  return std::atanh(std::sqrt(1.0 - num / std::norm(1.0 - ip)));
}

CircleField random_holomorphic(int dim, int n, int band, std::mt19937& rng) {
  std::normal_distribution<double> g;
  MatrixXcd chat = MatrixXcd::Zero(dim, n);
  for (int k = 0; k <= band; ++k)
    for (int r = 0; r < dim; ++r)
      chat(r, k + n / 2) = cplx(g(rng), g(rng)) / (1.0 + double(k) * k);
  return CircleField::from_coeffs(chat);
}

GeodesicDisc sample_ball_disc(int num_nodes = kDefaultNodes) {
  VectorXcd q(2), v(2);
  q << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  v << 1.0, 0.0;
  return ball_geodesic(q, v, num_nodes);
}

Domain sample_ellipsoid() {
  MatrixXd B(2, 2);
  B << 1.0, 0.3, 0.3, -0.5;
  return make_ellipsoid(2, B, 0.15);
}

// Sup distance between a central difference of theta and its linearization.
double fd_mismatch(const Domain& dom, const GeodesicDisc& base,
                   const CircleField& dphi, const VectorXcd& p,
                   const VectorXcd& vhat, double h) {
  const ThetaBlocks plus =
      theta_residual(dom, base.phi + dphi * h, base.A0, p, vhat);
  const ThetaBlocks minus =
      theta_residual(dom, base.phi + dphi * (-h), base.A0, p, vhat);
  const ThetaBlocks lin = theta_linearized(dom, base, dphi);
  const double s = 0.5 / h;
  double m = 0.0;
  m = std::max(m, ((plus.rho_block - minus.rho_block) * s - lin.rho_block)
                      .sup_norm());
  m = std::max(m, ((plus.proj_block - minus.proj_block) * s - lin.proj_block)
                      .sup_norm());
  m = std::max(m, ((plus.point_block - minus.point_block) * s -
                   lin.point_block)
                      .cwiseAbs()
                      .maxCoeff());
  m = std::max(m, ((plus.deriv_block - minus.deriv_block) * s -
                   lin.deriv_block)
                      .cwiseAbs()
                      .maxCoeff());
  m = std::max(m, std::abs((plus.normalization_block -
                            minus.normalization_block) *
                               s -
                           lin.normalization_block));
  return m;
}

double lin_scale(const Domain& dom, const GeodesicDisc& base,
                 const CircleField& dphi) {
  const ThetaBlocks lin = theta_linearized(dom, base, dphi);
  return lin.sup_norm();
}

}  // namespace

TEST_CASE("ball closed form solves the geodesic system") {
  const GeodesicDisc g = sample_ball_disc();
  CHECK(g.diagnostics.sup_norm() <= 1e-10);
  CHECK(g.phi.is_holomorphic());
  CHECK(g.dual.is_holomorphic());

  // Boundary trace lies on the sphere.
  for (int j = 0; j < g.phi.num_nodes(); ++j)
    CHECK(std::abs(g.phi.value(j).norm() - 1.0) <= 1e-12);

  // Pairing normalization <phi', conj(dual)> = 1.
  const CircleField phid = circle_derivative(g.phi);
  for (int j = 0; j < g.phi.num_nodes(); ++j)
    CHECK(std::abs((phid.value(j).transpose() * g.dual.value(j))[0] - 1.0) <=
          1e-12);

  const VectorXcd mid = eval(g.phi, 0.5);
  CHECK(std::abs(mid[0] - 0.3535533905932738) <= 1e-12);
  CHECK(std::abs(mid[1] - 0.7071067811865476) <= 1e-12);
}

TEST_CASE("radial datum gives the linear disc") {
  VectorXcd q(3), v(3);
  q << 1.0, 0.0, 0.0;
  v << 1.0, 0.0, 0.0;
  const GeodesicDisc g = ball_geodesic(q, v, 64);
  const CircleField expect = CircleField::monomial(1, 64);
  CHECK((g.phi.component(0).coeffs() - expect.coeffs())
            .cwiseAbs()
            .maxCoeff() <= 1e-13);
  CHECK(g.phi.component(1).sup_norm() <= 1e-13);
  CHECK(g.phi.component(2).sup_norm() <= 1e-13);
  // dual is the constant e1.
  CHECK((g.dual.value(5) - q).norm() <= 1e-13);
}

TEST_CASE("flattening matrix identities") {
  const GeodesicDisc g = sample_ball_disc();
  const int n = g.phi.dim();
  CHECK(g.A0.is_holomorphic());
  for (int j = 0; j < g.phi.num_nodes(); ++j) {
    const MatrixXcd A = matrix_at(g.A0, j, n, n);
    VectorXcd e1 = VectorXcd::Zero(n);
    e1[0] = 1.0;
    CHECK((A.transpose() * g.dual.value(j) - e1).norm() <= 1e-12);
    CHECK(std::abs(A.determinant()) > 1e-3);
  }
}

TEST_CASE("ball disc is an isometry for the explicit ball distance") {
  const GeodesicDisc g = sample_ball_disc();
  const cplx pts[3] = {cplx(0.0, 0.0), cplx(0.4, -0.3), cplx(-0.7, 0.1)};
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const double dd = poincare_distance(pts[a], pts[b]);
      const double db = ball_distance(eval(g.phi, pts[a]),
                                      eval(g.phi, pts[b]));
      CHECK(std::abs(dd - db) <= 1e-10);
    }
}

TEST_CASE("linearization matches central differences on the ball") {
  const GeodesicDisc g = sample_ball_disc();
  const Domain ball = make_ball(2);
  std::mt19937 rng(71);
  for (int t = 0; t < 6; ++t) {
    const CircleField dphi =
        random_holomorphic(2, g.phi.num_nodes(), 12, rng);
    const double scale = std::max(1.0, lin_scale(ball, g, dphi));
    CHECK(fd_mismatch(ball, g, dphi, g.datum.p, g.datum.vhat, 1e-5) <=
          1e-6 * scale);
  }
}

TEST_CASE("linearization matches central differences on an ellipsoid") {
  const Domain dom = sample_ellipsoid();
  VectorXcd p(2);
  p << cplx(0.6, 0.1), cplx(0.5, -0.4);
  p = project_to_boundary(dom, p);
  VectorXcd vhat(1);
  vhat << cplx(0.25, 0.1);
  const GeodesicDisc g = solve_preferred(dom, p, vhat);
  std::mt19937 rng(73);
  for (int t = 0; t < 6; ++t) {
    const CircleField dphi =
        random_holomorphic(2, g.phi.num_nodes(), 12, rng);
    const double scale = std::max(1.0, lin_scale(dom, g, dphi));
    CHECK(fd_mismatch(dom, g, dphi, g.datum.p, g.datum.vhat, 1e-5) <=
          1e-6 * scale);
  }
}

TEST_CASE("linearized step inverts the linearization") {
  const GeodesicDisc g = sample_ball_disc();
  const Domain ball = make_ball(2);
  std::mt19937 rng(79);
  for (int t = 0; t < 3; ++t) {
    const CircleField dphi =
        random_holomorphic(2, g.phi.num_nodes(), 16, rng);
    const ThetaBlocks rhs = theta_linearized(ball, g, dphi);
    const CircleField rec = linearized_step(ball, g, rhs);
    CHECK((rec - dphi).sup_norm() <= 1e-8 * (1.0 + dphi.sup_norm()));
  }
}

TEST_CASE("preferred solve on the ball reproduces the closed form") {
  const Domain ball = make_ball(2);
  VectorXcd p(2);
  p << cplx(0.6, 0.2), cplx(0.3, -0.5);
  p = project_to_boundary(ball, p);
  VectorXcd vhat(1);
  vhat << cplx(0.2, -0.3);
  const GeodesicDisc g = solve_preferred(ball, p, vhat);
  const VectorXcd v = fiber_unchart(ball, p, vhat);
  const GeodesicDisc oracle = ball_geodesic(p, v);
  CHECK((g.phi.coeffs() - oracle.phi.coeffs()).cwiseAbs().maxCoeff() <=
        1e-10);
  CHECK(g.diagnostics.sup_norm() <= 1e-8);
}

TEST_CASE("direct newton without homotopy reaches the ellipsoid solution") {
  const Domain dom = sample_ellipsoid();
  VectorXcd p(2);
  p << cplx(0.1, 0.7), cplx(0.5, 0.2);
  p = project_to_boundary(dom, p);
  VectorXcd vhat(1);
  vhat << cplx(-0.15, 0.35);
  SolveOptions opts;
  opts.homotopy = false;  // Newton starts from the ball closed form
  const GeodesicDisc g = solve_preferred(dom, p, vhat, opts);
  CHECK(g.diagnostics.sup_norm() <= 1e-8);
  CHECK(g.newton_iterations >= 1);
  const GeodesicDisc g2 = solve_preferred(dom, p, vhat);
  CHECK((g.phi.coeffs() - g2.phi.coeffs()).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("ellipsoid solve converges and satisfies the invariants") {
  const Domain dom = sample_ellipsoid();
  VectorXcd p(2);
  p << cplx(0.7, -0.2), cplx(0.1, 0.55);
  p = project_to_boundary(dom, p);
  VectorXcd vhat(1);
  vhat << cplx(0.3, 0.2);
  const GeodesicDisc g = solve_preferred(dom, p, vhat);

  CHECK(g.diagnostics.sup_norm() <= 1e-8);
  // Boundary trace maps into the boundary of the domain.
  for (int j = 0; j < g.phi.num_nodes(); j += 7)
    CHECK(std::abs(dom.rho(g.phi.value(j))) <= 1e-8);
  CHECK(g.phi.is_holomorphic());
  CHECK(analytic_projection(dual_candidate(dom, g.phi)).sup_norm() <= 1e-7);
  // Pairing normalization.
  const CircleField phid = circle_derivative(g.phi);
  for (int j = 0; j < g.phi.num_nodes(); j += 17)
    CHECK(std::abs((phid.value(j).transpose() * g.dual.value(j))[0] - 1.0) <=
          1e-7);
  // Jet conditions.
  CHECK((eval(g.phi, 1.0) - p).norm() <= 1e-8);
  const VectorXcd v = fiber_unchart(dom, p, vhat);
  const double w1 = std::sqrt(1.0 - vhat.squaredNorm());
  CHECK((eval_d(g.phi, 1.0) - w1 * v).norm() <= 1e-8);

  // Quadratic tail of the Newton residuals.
  const auto& h = g.residual_history;
  REQUIRE(h.size() >= 2);
  for (size_t i = 0; i + 1 < h.size(); ++i)
    if (h[i] < 1e-3) CHECK(h[i + 1] <= 100.0 * h[i] * h[i] + 1e-13);
}

TEST_CASE("ellipsoid solve in three variables") {
  MatrixXd B = MatrixXd::Zero(3, 3);
  B.diagonal() << 0.8, -0.4, 0.2;
  const Domain dom = make_ellipsoid(3, B, 0.2);
  VectorXcd p(3);
  p << cplx(0.5, 0.2), cplx(-0.3, 0.4), cplx(0.2, -0.6);
  p = project_to_boundary(dom, p);
  VectorXcd vhat(2);
  vhat << cplx(0.25, -0.1), cplx(0.1, 0.3);
  const GeodesicDisc g = solve_preferred(dom, p, vhat);
  CHECK(g.diagnostics.sup_norm() <= 1e-8);
  CHECK((eval(g.phi, 1.0) - p).norm() <= 1e-8);
  CHECK(analytic_projection(dual_candidate(dom, g.phi)).sup_norm() <= 1e-7);
}

TEST_CASE("re-anchored solve preserves the induced distance") {
  const Domain dom = sample_ellipsoid();
  VectorXcd p(2);
  p << cplx(0.7, -0.2), cplx(0.1, 0.55);
  p = project_to_boundary(dom, p);
  VectorXcd vhat(1);
  vhat << cplx(0.3, 0.2);
  const GeodesicDisc g = solve_preferred(dom, p, vhat);
  const IsometryReport rep =
      isometry_check(dom, g, cplx(0.2, 0.1), cplx(-0.4, 0.3));
  CHECK(std::abs(rep.disc_distance - rep.reanchored_distance) <= 1e-6);
}

TEST_CASE("orthogonal equivariance of the preferred solve") {
  MatrixXd B(2, 2);
  B << 1.0, 0.3, 0.3, -0.5;
  const Domain dom1 = make_ellipsoid(2, B, 0.15);
  MatrixXd U(2, 2);
  U << 0.0, 1.0, 1.0, 0.0;
  const Domain dom2 = make_ellipsoid(2, U * B * U.transpose(), 0.15);

  VectorXcd p1(2);
  p1 << cplx(0.6, 0.1), cplx(0.5, -0.4);
  p1 = project_to_boundary(dom1, p1);
  VectorXcd vhat1(1);
  vhat1 << cplx(0.25, 0.1);
  const GeodesicDisc g1 = solve_preferred(dom1, p1, vhat1);

  const MatrixXcd Uc = U.cast<cplx>();
  const VectorXcd p2 = Uc * p1;
  const VectorXcd v2 = Uc * fiber_unchart(dom1, p1, vhat1);
  const GeodesicDisc g2 =
      solve_preferred(dom2, p2, fiber_chart(dom2, p2, v2));
  double m = 0.0;
  for (int j = 0; j < g1.phi.num_nodes(); ++j)
    m = std::max(m, (g2.phi.value(j) - Uc * g1.phi.value(j)).norm());
  CHECK(m <= 1e-7);
}

TEST_CASE("disc point inversion") {
  const GeodesicDisc g = sample_ball_disc();
  const cplx target(0.3, 0.2);
  const VectorXcd z = eval(g.phi, target);
  const cplx found = invert_disc_point(g, z, cplx(0.0, 0.0));
  CHECK(std::abs(found - target) <= 1e-10);
}

TEST_CASE("geodesic json export") {
  const GeodesicDisc g = sample_ball_disc();
  const nlohmann::json j = nlohmann::json::parse(geodesic_to_json(g));
  CHECK(j.contains("datum"));
  CHECK(j.contains("phi"));
  CHECK(j.contains("dual"));
  CHECK(j.at("residual").get<double>() <= 1e-10);
  // phi round-trips through the field codec.
  const CircleField phi = field_from_json(j.at("phi").dump());
  CHECK((phi.coeffs() - g.phi.coeffs()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("theta residual flags non-geodesics") {
  const GeodesicDisc g = sample_ball_disc();
  const Domain ball = make_ball(2);
  MatrixXcd chat = MatrixXcd::Zero(2, g.phi.num_nodes());
  chat(0, g.phi.num_nodes() / 2 + 2) = 0.05;
  const CircleField bump = CircleField::from_coeffs(chat);
  const ThetaBlocks th =
      theta_residual(ball, g.phi + bump, g.A0, g.datum.p, g.datum.vhat);
  CHECK(th.sup_norm() > 1e-3);
}
