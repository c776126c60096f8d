#include <doctest.h>

#include "cgeo/verification.hpp"

#include <json.hpp>

#include <cmath>

using namespace cgeo;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

namespace {

// Kept at moderate eccentricity: for ||eps B|| beyond ~0.15 the flattening
// gauge can degenerate near some anchors and the Newton solver stalls there.
Domain sample_ellipsoid(double eps) {
  MatrixXd B(2, 2);
  B << 0.6, 0.2, 0.2, -0.3;
  return make_ellipsoid(2, B, eps);
}

double violation(const VerifyReport& rep, const std::string& name) {
  for (const auto& c : rep.checks)
    if (c.name == name) return c.max_violation;
  return -1.0;
}

}  // namespace

TEST_CASE("ball geodesic derivative in the direction matches differencing") {
  const int N = kDefaultNodes;
  VectorXcd q(2), v(2), dv(2);
  q << 0.6, cplx(0.0, 0.8);
  v << 0.5, cplx(0.0, 0.3);
  v.normalize();
  dv << 0.2, cplx(0.0, 0.1);
  // q.dot(v) and q.dot(dv) are real positive, keeping v + tau dv admissible.
  const cplx c = q.dot(v), dc = q.dot(dv);
  REQUIRE(std::abs(c.imag()) <= 1e-14);
  REQUIRE(std::abs(dc.imag()) <= 1e-14);

  const double h = 1e-4;
  const GeodesicDisc gp = ball_geodesic(q, v + h * dv, N);
  const GeodesicDisc gm = ball_geodesic(q, v - h * dv, N);
  double worst = 0.0;
  for (int j = 0; j < N; j += 7) {
    const cplx zeta = CircleField::node(j, N);
    const VectorXcd fd = (gp.phi.value(j) - gm.phi.value(j)) / (2.0 * h);
    const VectorXcd exact = (zeta - 1.0) * (dc * v + c * dv);
    worst = std::max(worst, (fd - exact).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("geodesic battery passes on the ball") {
  SamplePlan plan;
  plan.count = 6;
  const VerifyReport rep = run_geodesic_battery(make_ball(2), plan);
  CHECK(rep.pass);
  CHECK(rep.failed_solves == 0);
  CHECK(violation(rep, "properness") <= 1e-9);
  CHECK(violation(rep, "winding") == 0.0);
  CHECK(violation(rep, "equivariance") <= 1e-8);
}

TEST_CASE("geodesic battery passes on an ellipsoid") {
  SamplePlan plan;
  plan.count = 5;
  const VerifyReport rep = run_geodesic_battery(sample_ellipsoid(0.2), plan);
  for (const auto& c : rep.checks) {
    INFO(c.name, " violation ", c.max_violation);
    CHECK(c.pass);
  }
  CHECK(rep.failed_solves == 0);
  CHECK(violation(rep, "winding") == 0.0);
}

TEST_CASE("battery violations stay controlled toward the ball limit") {
  SamplePlan plan;
  plan.count = 3;
  const VerifyReport near = run_geodesic_battery(sample_ellipsoid(0.02), plan);
  const VerifyReport far = run_geodesic_battery(sample_ellipsoid(0.2), plan);
  CHECK(near.pass);
  for (const std::string name :
       {"properness", "dual_holomorphy", "normalization"})
    CHECK(violation(near, name) <= 1e-7);
  CHECK(far.pass);
}

TEST_CASE("second differences in the datum pass the Richardson probe") {
  const Domain dom = sample_ellipsoid(0.15);
  VectorXcd p(2);
  p << cplx(0.7, -0.2), cplx(0.1, 0.55);
  p = project_to_boundary(dom, p);
  VectorXcd vhat(1);
  vhat << cplx(0.3, 0.2);

  SmoothnessDirection dir;
  dir.dp = VectorXcd::Zero(2);
  dir.dvhat = VectorXcd::Zero(1);
  dir.dvhat[0] = cplx(0.15, -0.1);
  const VerifyReport rep = parameter_smoothness_probe(dom, p, vhat, dir);
  INFO("ratio violation ", rep.checks.at(0).max_violation);
  CHECK(rep.pass);
  CHECK(rep.checks.at(0).max_violation <= 0.5);
}

TEST_CASE("boundary probe passes on the ball with the closed-form kernel") {
  const Domain ball = make_ball(2);
  VectorXcd p(2);
  p << cplx(0.6, 0.0), cplx(0.0, 0.8);
  const VerifyReport rep = hcma_boundary_probe(ball, p);
  for (const auto& c : rep.checks) {
    INFO(c.name, " violation ", c.max_violation);
    CHECK(c.pass);
  }
  CHECK(violation(rep, "ball_closed_form") <= 1e-8);
  CHECK(violation(rep, "ball_closed_form") >= 0.0);
}

TEST_CASE("boundary probe passes on an ellipsoid") {
  const Domain dom = sample_ellipsoid(0.15);
  VectorXcd p(2);
  p << cplx(0.8, 0.1), cplx(-0.2, 0.5);
  p = project_to_boundary(dom, p);
  const VerifyReport rep = hcma_boundary_probe(dom, p);
  for (const auto& c : rep.checks) {
    INFO(c.name, " violation ", c.max_violation);
    CHECK(c.pass);
  }
  CHECK(violation(rep, "ball_closed_form") == -1.0);
}

TEST_CASE("reports serialize with per-check fields") {
  SamplePlan plan;
  plan.count = 2;
  const VerifyReport rep = run_geodesic_battery(make_ball(2), plan);
  const auto j = nlohmann::json::parse(report_to_json(rep));
  CHECK(j.at("suite").get<std::string>() == "geodesic");
  CHECK(j.at("pass").get<bool>() == rep.pass);
  CHECK(j.at("failed_solves").get<int>() == 0);
  CHECK(j.at("checks").size() == rep.checks.size());
  for (const auto& c : j.at("checks")) {
    CHECK(c.contains("name"));
    CHECK(c.contains("max_violation"));
    CHECK(c.contains("threshold"));
    CHECK(c.contains("pass"));
  }
}
