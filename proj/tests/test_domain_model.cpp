#include <doctest.h>

#include "cgeo/domain_model.hpp"

#include <random>

using namespace cgeo;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;

namespace {

VectorXcd e_k(int n, int k) {
  VectorXcd e = VectorXcd::Zero(n);
  e[k] = 1.0;
  return e;
}

VectorXcd random_point(int n, std::mt19937& rng, double lo, double hi) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> r(lo, hi);
  VectorXcd z(n);
  for (int j = 0; j < n; ++j) z[j] = cplx(g(rng), g(rng));
  return z * (r(rng) / z.norm());
}

// Central finite differences of rho in the 2n real coordinates.
VectorXcd fd_grad(const Domain& dom, const VectorXcd& z, double h) {
  VectorXcd out(dom.dim);
  for (int j = 0; j < dom.dim; ++j) {
    VectorXcd zp = z, zm = z;
    zp[j] += h;
    zm[j] -= h;
    const double dx = (dom.rho(zp) - dom.rho(zm)) / (2 * h);
    zp = z;
    zm = z;
    zp[j] += cplx(0, h);
    zm[j] -= cplx(0, h);
    const double dy = (dom.rho(zp) - dom.rho(zm)) / (2 * h);
    out[j] = 0.5 * cplx(dx, -dy);
  }
  return out;
}

void fd_hessians(const Domain& dom, const VectorXcd& z, double h,
                 MatrixXcd& zz, MatrixXcd& zzb) {
  const int n = dom.dim;
  zz.resize(n, n);
  zzb.resize(n, n);
  for (int l = 0; l < n; ++l) {
    VectorXcd zp = z, zm = z;
    zp[l] += h;
    zm[l] -= h;
    const VectorXcd dx = (dom.grad(zp) - dom.grad(zm)) / (2 * h);
    zp = z;
    zm = z;
    zp[l] += cplx(0, h);
    zm[l] -= cplx(0, h);
    const VectorXcd dy = (dom.grad(zp) - dom.grad(zm)) / (2 * h);
    zz.col(l) = 0.5 * (dx - cplx(0, 1) * dy);
    zzb.col(l) = 0.5 * (dx + cplx(0, 1) * dy);
  }
}

}  // namespace

TEST_CASE("ball oracles") {
  Domain b = make_ball(2);
  CHECK(b.rho(VectorXcd::Zero(2)) == doctest::Approx(-1.0));
  CHECK((b.normal(e_k(2, 0)) - e_k(2, 0)).norm() <= 1e-15);
  const VectorXcd z = 0.3 * e_k(2, 0) + 0.4 * e_k(2, 1);
  CHECK((b.hess_zzbar(z) - MatrixXcd::Identity(2, 2)).norm() <= 1e-15);
  CHECK(b.hess_zz(z).norm() <= 1e-15);
}

TEST_CASE("ellipsoid with eps=0 coincides with the ball") {
  Domain e = make_ellipsoid(3, MatrixXd::Identity(3, 3), 0.0);
  Domain b = make_ball(3);
  std::mt19937 rng(1);
  for (int t = 0; t < 5; ++t) {
    const VectorXcd z = random_point(3, rng, 0.3, 1.2);
    CHECK(e.rho(z) == doctest::Approx(b.rho(z)).epsilon(1e-14));
    CHECK((e.grad(z) - b.grad(z)).norm() <= 1e-14);
  }
}

TEST_CASE("ellipsoid boundary point along the first axis") {
  const double eps = 0.3;
  Domain e = make_ellipsoid(2, MatrixXd::Identity(2, 2), eps);
  // rho0 = z1^2 (1 + eps) - 1 = 0 along the real e1 ray.
  const double z1 = 1.0 / std::sqrt(1.0 + eps);
  CHECK(std::abs(e.rho(z1 * e_k(2, 0))) <= 1e-12);
}

TEST_CASE("derivative oracles match finite differences") {
  std::mt19937 rng(2);
  std::vector<Domain> doms;
  doms.push_back(make_ball(2));
  MatrixXd B(2, 2);
  B << 1.0, 0.4, 0.4, -0.7;
  doms.push_back(make_ellipsoid(2, B, 0.25));
  MatrixXd B3 = MatrixXd::Identity(3, 3);
  B3(0, 1) = B3(1, 0) = 0.5;
  doms.push_back(make_ellipsoid(3, B3, 0.2));
  for (const Domain& dom : doms) {
    for (int t = 0; t < 6; ++t) {
      const VectorXcd z = random_point(dom.dim, rng, 0.6, 1.2);
      const VectorXcd g = dom.grad(z);
      CHECK((g - fd_grad(dom, z, 1e-5)).norm() <= 1e-6 * (1.0 + g.norm()));
      MatrixXcd zz, zzb;
      fd_hessians(dom, z, 1e-5, zz, zzb);
      CHECK((dom.hess_zz(z) - zz).norm() <= 1e-6 * (1.0 + zz.norm()));
      CHECK((dom.hess_zzbar(z) - zzb).norm() <= 1e-6 * (1.0 + zzb.norm()));
      CHECK((dom.hess_zz(z) - dom.hess_zz(z).transpose()).norm() <= 1e-12);
      CHECK((dom.hess_zzbar(z) - dom.hess_zzbar(z).adjoint()).norm() <= 1e-12);
    }
  }
}

TEST_CASE("gradient normalization on the boundary") {
  MatrixXd B(2, 2);
  B << 1.0, 0.2, 0.2, 0.6;
  Domain e = make_ellipsoid(2, B, 0.3);
  for (const VectorXcd& p : boundary_samples(e, 10, 42)) {
    CHECK(std::abs(e.rho(p)) <= 1e-10);
    CHECK(std::abs(e.grad(p).norm() - 1.0) <= 1e-10);  // |real grad| = 2
    CHECK(std::abs(e.normal(p).norm() - 1.0) <= 1e-10);
  }
}

TEST_CASE("sign of rho") {
  Domain e = make_ellipsoid(2, MatrixXd::Identity(2, 2), 0.3);
  std::mt19937 rng(3);
  for (int t = 0; t < 10; ++t) {
    const VectorXcd p = project_to_boundary(e, random_point(2, rng, 0.5, 1.0));
    CHECK(e.rho(0.9 * p) < 0.0);
    CHECK(e.rho(1.1 * p) > 0.0);
  }
}

TEST_CASE("strong linear convexity checks") {
  Domain b = make_ball(3);
  SlcReport rb = slc_check(b, boundary_samples(b, 8, 7));
  CHECK(rb.pass);
  CHECK(rb.min_margin == doctest::Approx(1.0).epsilon(1e-10));

  // Raw quadric inequality |v^t (eps B) v| = 0.3 |v|^2 < |v|^2.
  Domain e = make_ellipsoid(2, MatrixXd::Identity(2, 2), 0.3);
  SlcReport re = slc_check(e, boundary_samples(e, 8, 8));
  CHECK(re.pass);
  CHECK(re.min_margin > 0.3);

  CHECK_THROWS_AS(make_ellipsoid(2, MatrixXd::Identity(2, 2), 1.5), NotSLC);
  CHECK_THROWS_AS(slc_check(b, {0.5 * e_k(3, 0)}), SampleOffBoundary);
}

TEST_CASE("unitary frame") {
  std::mt19937 rng(4);
  CHECK((unitary_frame(e_k(3, 0)) - MatrixXcd::Identity(3, 3)).norm() <=
        1e-15);
  for (int t = 0; t < 10; ++t) {
    VectorXcd nu = random_point(3, rng, 1.0, 1.0);
    nu.normalize();
    const MatrixXcd g = unitary_frame(nu);
    CHECK((g * e_k(3, 0) - nu).norm() <= 1e-14);
    CHECK((g.adjoint() * g - MatrixXcd::Identity(3, 3)).norm() <= 1e-14);
  }
  CHECK_THROWS_AS(unitary_frame(-e_k(3, 0)), ChartSingularity);
}

TEST_CASE("fiber chart round-trips") {
  Domain b = make_ball(3);
  const VectorXcd p = e_k(3, 0);
  CHECK(fiber_chart(b, p, b.normal(p)).norm() <= 1e-14);

  VectorXcd vhat(2);
  vhat << cplx(0.5, 0.0), cplx(0.0, 0.0);
  const VectorXcd v = fiber_unchart(b, p, vhat);
  CHECK(std::abs(v[0] - std::sqrt(0.75)) <= 1e-14);
  CHECK(std::abs(v[1] - 0.5) <= 1e-14);

  std::mt19937 rng(5);
  MatrixXd B = MatrixXd::Identity(3, 3);
  B(1, 2) = B(2, 1) = 0.3;
  Domain e = make_ellipsoid(3, B, 0.2);
  for (const VectorXcd& q : boundary_samples(e, 6, 11)) {
    VectorXcd vh = random_point(2, rng, 0.2, 0.5).conjugate();
    const VectorXcd w = fiber_unchart(e, q, vh);
    CHECK(std::abs(w.norm() - 1.0) <= 1e-13);
    CHECK((fiber_chart(e, q, w) - vh).norm() <= 1e-12);
  }
  CHECK_THROWS_AS(fiber_chart(b, p, -b.normal(p)), NotInLp);
}

TEST_CASE("domain config json round-trip") {
  MatrixXd B(2, 2);
  B << 1.0, 0.5, 0.5, -0.25;
  Domain e = make_ellipsoid(2, B, 0.2);
  Domain back = domain_from_json(domain_to_json(e));
  std::mt19937 rng(6);
  for (int t = 0; t < 4; ++t) {
    const VectorXcd z = random_point(2, rng, 0.5, 1.2);
    CHECK(back.rho(z) == doctest::Approx(e.rho(z)).epsilon(1e-14));
  }
  CHECK(domain_from_json("{\"type\":\"ball\",\"n\":2}").type == "ball");
  CHECK_THROWS_AS(
      domain_from_json(
          "{\"type\":\"ellipsoid\",\"n\":2,\"epsilon\":1.5,"
          "\"B\":[[1,0],[0,1]]}"),
      NotSLC);
}
