#include <catch2/catch_amalgamated.hpp>

#include "holo/fixed_points.hpp"

using namespace holo;

namespace {

cvec vec1(cplx a) {
  cvec v(1);
  v[0] = a;
  return v;
}

cvec vec2(cplx a, cplx b) {
  cvec v(2);
  v[0] = a;
  v[1] = b;
  return v;
}

}  // namespace

TEST_CASE("contraction iteration lands on the affine fixed point") {
  auto d = DomainDescriptor::unit_disc();
  auto f = parse_map("0.5*z + 0.2", 1);
  auto res = earle_hamilton(f, d, vec1(0), 1e-10);
  CHECK(std::abs(res.point[0] - cplx(0.4, 0)) < 1e-9);
  CHECK(res.residual < 1e-10);
  CHECK(res.r_used > 0.25);
  CHECK(res.R_used == Catch::Approx(2.0));
  CHECK(res.contraction_estimate == Catch::Approx(res.R_used / (res.R_used + res.r_used)));
  // termination within the certified-rate bound
  double step0 = std::abs(f.eval(vec1(0))[0] - cplx(0, 0));
  double bound = std::ceil(std::log(1e-10 / step0) / std::log(res.contraction_estimate)) + 64;
  CHECK(res.iterations <= static_cast<long>(bound));
}

TEST_CASE("constant maps converge in one step") {
  auto d = DomainDescriptor::unit_disc();
  auto f = parse_map("0.3*i", 1);
  auto res = earle_hamilton(f, d, vec1(0.5));
  CHECK(std::abs(res.point[0] - cplx(0, 0.3)) < 1e-12);
  CHECK(res.iterations == 1);
}

TEST_CASE("componentwise affine map on the bidisc") {
  auto d = DomainDescriptor::polydisc({1.0, 1.0});
  auto f = parse_map("0.5*z0, 0.25*z1 + 0.1", 2);
  auto res = earle_hamilton(f, d, vec2(0.3, -0.2), 1e-11);
  CHECK((res.point - vec2(0, 2.0 / 15.0)).norm() < 1e-9);
}

TEST_CASE("maps without strict containment are rejected") {
  auto d = DomainDescriptor::unit_disc();
  CHECK_THROWS_AS(earle_hamilton(parse_map("z + 1", 1), d, vec1(0)), error);
  try {
    earle_hamilton(parse_map("z*1.0", 1), d, vec1(0.2), 1e-10, 100);
  } catch (const error& e) {
    // identity is fixed everywhere; if sampling certifies a gap the start is returned
    CHECK((e.code() == errc::hypothesis || e.code() == errc::convergence));
  }
}

TEST_CASE("damped family fixed points solve the linear equation") {
  auto d = DomainDescriptor::unit_disc();
  auto f = parse_map("-z", 1);
  CHECK((lambda_fixed_point(f, d, vec1(0.4), 0.0) - vec1(0.4)).norm() == 0);
  // z = 0.4 + 0.5(-z - 0.4) has the unique solution 2/15
  cvec p = lambda_fixed_point(f, d, vec1(0.4), 0.5, 1e-12);
  CHECK(std::abs(p[0] - cplx(2.0 / 15.0, 0)) < 1e-10);
  // closed form a(1-lambda)/(1+lambda)
  cvec q = lambda_fixed_point(f, d, vec1(0.4), 0.75, 1e-12);
  CHECK(std::abs(q[0] - cplx(0.4 * 0.25 / 1.75, 0)) < 1e-10);

  auto id = HolomorphicMap::identity(1);
  CHECK((lambda_fixed_point(id, d, vec1(0.3), 0.5, 1e-12) - vec1(0.3)).norm() < 1e-10);

  auto ann = DomainDescriptor::annulus(2.0);
  CHECK_THROWS_AS(lambda_fixed_point(parse_map("1/z", 1), ann, vec1(1.0), 0.5), error);
}

TEST_CASE("retraction limit follows the damped schedule") {
  auto d = DomainDescriptor::unit_disc();
  auto f = parse_map("-z", 1);
  // The damped stages contract at rate lambda_k, so stage k costs about 2^k
  // map evaluations; tolerances here reflect that and the residual guarantee
  // ||f(p)-p|| < 10*tol rather than machine precision.
  std::vector<double> schedule;
  cvec p = retract_to_fix(f, d, vec1({0.35, 0.2}), 1e-5, 2000000, &schedule);
  CHECK(p.norm() < 1e-4);
  CHECK(schedule.size() >= 2);
  CHECK(schedule.front() == Catch::Approx(0.5));

  auto ball = DomainDescriptor::ball(BallNorm::hermitian, 2);
  auto g = parse_map("z0, -z1", 2);
  cvec q = retract_to_fix(g, ball, vec2(0.3, 0.4), 1e-5);
  CHECK((q - vec2(0.3, 0)).norm() < 1e-4);
  CHECK((g.eval(q) - q).norm() < 1e-4);
  // anchor already fixed: the schedule short-circuits
  cvec r = retract_to_fix(g, ball, vec2(0.25, 0), 1e-9);
  CHECK((r - vec2(0.25, 0)).norm() == 0);
  // idempotence on probes
  rng gen(5);
  for (int k = 0; k < 3; ++k) {
    cvec a = vec2(gen.disc_point(0.6), gen.disc_point(0.6));
    if (!ball.contains(a)) continue;
    cvec pa = retract_to_fix(g, ball, a, 1e-4);
    cvec ppa = retract_to_fix(g, ball, pa, 1e-4);
    CHECK((ppa - pa).norm() < 1e-3);
  }
}

TEST_CASE("boundary-escaping damped iterates are diagnosed") {
  auto d = DomainDescriptor::unit_disc();
  auto f = parse_map("0.9*z + 0.1", 1);  // fixed point sits on the boundary
  try {
    retract_to_fix(f, d, vec1(0), 1e-9);
    FAIL("expected a diagnostic");
  } catch (const error& e) {
    CHECK(e.code() == errc::convergence);
  }
}

TEST_CASE("fixed-set dimension from the eigenstructure") {
  auto f = parse_map("1/z0, z0*z1", 2);
  auto rep = fix_dimension(f, vec2(1.0, 0.3));
  REQUIRE(rep.dim == 1);
  CHECK_FALSE(rep.defective);
  std::vector<double> evs;
  for (auto ev : rep.eigenvalues) evs.push_back(ev.real());
  std::sort(evs.begin(), evs.end());
  CHECK(evs[0] == Catch::Approx(-1.0).margin(1e-10));
  CHECK(evs[1] == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(rep.eigenbasis.size() == 1);
  cvec v = rep.eigenbasis[0];
  CHECK(std::abs(v[1]) == Catch::Approx(1.0).margin(1e-10));
  CHECK((rep.jacobian * v - v).norm() <= 10 * 1e-8 * v.norm());

  auto rep2 = fix_dimension(f, vec2(-1.0, 0.0));
  CHECK(rep2.dim == 0);
  CHECK(rep2.eigenbasis.empty());
  CHECK_FALSE(rep2.defective);

  auto id = HolomorphicMap::identity(2);
  CHECK(fix_dimension(id, vec2(0.1, -0.2)).dim == 2);

  auto shear = parse_map("z0 + z1, z1", 2);  // Jordan block at the origin
  auto rep3 = fix_dimension(shear, vec2(0, 0));
  CHECK(rep3.dim == 1);
  CHECK(rep3.defective);

  CHECK_THROWS_AS(fix_dimension(f, vec2(0.5, 0.5)), error);
}

TEST_CASE("fixed sets are affine along reported basis vectors") {
  auto f = parse_map("z0, -z1", 2);
  auto rep = fix_dimension(f, vec2(0.3, 0));
  REQUIRE(rep.dim == 1);
  double eps = 1e-4;
  cvec probe = rep.base + eps * rep.eigenbasis[0];
  CHECK((f.eval(probe) - probe).norm() < 10 * eps * eps);
}

TEST_CASE("newton sweep separates fixed-point components") {
  auto ann = DomainDescriptor::annulus(2.0);
  auto inv = parse_map("1/z", 1);
  auto found = fix_scan(inv, ann, 48, 3);
  REQUIRE(found.size() == 2);
  CHECK(std::abs(found[0].first[0] - cplx(-1, 0)) < 1e-8);
  CHECK(std::abs(found[1].first[0] - cplx(1, 0)) < 1e-8);
  CHECK(found[0].second.dim == 0);
  CHECK(found[1].second.dim == 0);

  auto d = DomainDescriptor::parse("domain{ |x*y^2| < 1; 0.5 < |x|; |x| < 2 }");
  auto f = parse_map("1/x, x*y", 2);
  auto comps = fix_scan(f, d, 80, 4);
  REQUIRE(comps.size() >= 2);
  bool saw_isolated = false, saw_line = false;
  for (const auto& [p, rep] : comps) {
    if ((p - vec2(-1, 0)).norm() < 1e-6) {
      saw_isolated = true;
      CHECK(rep.dim == 0);
    } else {
      CHECK(std::abs(p[0] - cplx(1, 0)) < 1e-6);
      CHECK(rep.dim == 1);
      saw_line = true;
    }
  }
  CHECK(saw_isolated);
  CHECK(saw_line);
}

TEST_CASE("iterate powers stabilize onto a retraction") {
  auto d = DomainDescriptor::polydisc({1.0, 1.0});
  auto f = parse_map("z0, 0.5*z1", 2);
  auto ra = iterate_limit_retraction(f, d, vec2(0.2, 0), 4096, 1e-9);
  cvec r = ra.eval(vec2(0.3, 0.8));
  CHECK(ra.diagnostics->stabilized);
  CHECK((r - vec2(0.3, 0)).norm() < 1e-9);

  auto proj = parse_map("z0, 0*z1", 2);  // already idempotent
  auto rp = iterate_limit_retraction(proj, d, vec2(0.1, 0), 64, 1e-12);
  cvec q = rp.eval(vec2(-0.4, 0.7));
  CHECK(rp.diagnostics->stabilized);
  CHECK(rp.diagnostics->power_used == 2);
  CHECK((q - vec2(-0.4, 0)).norm() < 1e-12);

  auto rot = parse_map("-z", 1);
  auto rr = iterate_limit_retraction(rot, DomainDescriptor::unit_disc(), vec1(0), 256, 1e-9);
  rr.eval(vec1(0.5));
  CHECK_FALSE(rr.diagnostics->stabilized);

  CHECK_THROWS_AS(iterate_limit_retraction(f, d, vec2(0.3, 0.5), 64, 1e-9), error);
}
