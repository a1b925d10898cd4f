#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "holo/domains.hpp"

using namespace holo;

namespace {

cvec pt(std::initializer_list<cplx> vals) {
  cvec z(static_cast<int>(vals.size()));
  int j = 0;
  for (auto v : vals) z[j++] = v;
  return z;
}

const char* kExampleDomain = "domain{ |x*y^2| < 1; 0.5 < |x|; |x| < 2 }";

// Walk from z along random directions until the slack changes sign, then
// bisect; gives genuine boundary points to validate the gap bound against.
double nearest_boundary_probe(const DomainDescriptor& d, const cvec& z, int directions, std::uint64_t seed) {
  rng g(seed);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < directions; ++k) {
    cvec u(z.size());
    double n2 = 0;
    for (int j = 0; j < z.size(); ++j) {
      u[j] = cplx(g.normal(), g.normal());
      n2 += std::norm(u[j]);
    }
    u /= std::sqrt(n2);
    double lo = 0.0, hi = 1e-3;
    while (d.contains(z + hi * u) && hi < 1e4) {
      lo = hi;
      hi *= 2.0;
    }
    if (hi >= 1e4) continue;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      (d.contains(z + mid * u) ? lo : hi) = mid;
    }
    best = std::min(best, lo);
  }
  return best;
}

}  // namespace

TEST_CASE("membership oracles on the model domains") {
  auto disc = DomainDescriptor::parse("disc");
  CHECK(disc.contains(pt({cplx(0.3, 0)})));
  CHECK_FALSE(disc.contains(pt({cplx(1, 0)})));  // open domain

  auto ann = DomainDescriptor::parse("annulus(2)");
  CHECK(ann.contains(pt({cplx(1, 0)})));
  CHECK_FALSE(ann.contains(pt({cplx(0.4, 0)})));
  CHECK_FALSE(ann.contains(pt({cplx(2.1, 0)})));

  auto ex = DomainDescriptor::parse(kExampleDomain);
  REQUIRE(ex.dim() == 2);
  CHECK(ex.contains(pt({cplx(1, 0), cplx(0.9, 0)})));  // |1*0.81| < 1
  CHECK_FALSE(ex.contains(pt({cplx(0.4, 0), cplx(0, 0)})));
  CHECK_FALSE(ex.contains(pt({cplx(1, 0), cplx(1.1, 0)})));
}

TEST_CASE("contains is monotone in the margin") {
  auto disc = DomainDescriptor::parse("disc");
  auto z = pt({cplx(0.95, 0)});
  CHECK(disc.contains(z, 0.01));
  CHECK(disc.contains(z, 0.04));
  CHECK_FALSE(disc.contains(z, 0.06));
}

TEST_CASE("boundary gaps are exact on model domains") {
  auto disc = DomainDescriptor::parse("disc");
  CHECK(disc.boundary_gap(pt({cplx(0.3, 0)})) == Catch::Approx(0.7).margin(1e-15));

  auto poly = DomainDescriptor::parse("polydisc(1,1)");
  CHECK(poly.boundary_gap(pt({cplx(0.5, 0), cplx(0, 0)})) == Catch::Approx(0.5).margin(1e-15));

  auto ann = DomainDescriptor::parse("annulus(2)");
  CHECK(ann.boundary_gap(pt({cplx(1, 0)})) == Catch::Approx(0.5).margin(1e-15));

  REQUIRE_THROWS_AS(disc.boundary_gap(pt({cplx(1.2, 0)})), error);
}

TEST_CASE("boundary gap never exceeds the distance to probed boundary points") {
  struct Case {
    const char* text;
    cvec z;
  };
  std::vector<Case> cases;
  cases.push_back({"disc", pt({cplx(0.4, 0.2)})});
  cases.push_back({"ball(h,2)", pt({cplx(0.3, 0.1), cplx(-0.2, 0.4)})});
  cases.push_back({"ball(sup,2)", pt({cplx(0.5, 0.2), cplx(-0.1, 0.3)})});
  cases.push_back({"ball(1,2)", pt({cplx(0.2, 0.1), cplx(-0.1, 0.2)})});
  cases.push_back({"ball(p=3,2)", pt({cplx(0.4, 0.0), cplx(0.0, 0.3)})});
  cases.push_back({"polydisc(1,2)", pt({cplx(0.3, 0.3), cplx(1.2, 0)})});
  cases.push_back({"annulus(2)", pt({cplx(0, 1.2)})});
  cases.push_back({kExampleDomain, pt({cplx(1, 0), cplx(0.3, 0)})});
  cases.push_back({kExampleDomain, pt({cplx(-0.8, 0.2), cplx(0.1, 0.4)})});
  for (const auto& c : cases) {
    auto d = DomainDescriptor::parse(c.text);
    REQUIRE(d.contains(c.z));
    double gap = d.boundary_gap(c.z);
    double probe = nearest_boundary_probe(d, c.z, 128, 11);
    INFO(c.text << ": gap " << gap << " probe " << probe);
    CHECK(gap > 0.0);
    CHECK(gap <= probe + 1e-9);
  }
}

TEST_CASE("bounding radii cover every sampled member") {
  const char* texts[] = {"disc", "ball(h,2)", "ball(sup,2)", "ball(1,2)", "ball(p=3,2)",
                         "polydisc(1.5,0.5)", "annulus(2)", kExampleDomain};
  for (const char* text : texts) {
    auto d = DomainDescriptor::parse(text);
    double R = d.bounding_radius();
    REQUIRE(std::isfinite(R));
    for (const auto& z : d.sample(200, 5)) {
      INFO(text);
      CHECK(z.norm() <= R + 1e-9);
    }
  }
  CHECK(DomainDescriptor::parse("disc").bounding_radius() == 1.0);
  CHECK(DomainDescriptor::parse("annulus(2)").bounding_radius() == 2.0);
  CHECK(DomainDescriptor::parse("ball(sup,2)").bounding_radius() == Catch::Approx(std::sqrt(2.0)));
  double exR = DomainDescriptor::parse(kExampleDomain).bounding_radius();
  CHECK(exR > 2.0);
  CHECK(exR < 3.5);
}

TEST_CASE("samples satisfy the membership margin and are seed-deterministic") {
  const char* texts[] = {"disc", "ball(h,3)", "ball(1,2)", "polydisc(1,1)", "annulus(2)", kExampleDomain};
  for (const char* text : texts) {
    auto d = DomainDescriptor::parse(text);
    auto a = d.sample(60, 9);
    auto b = d.sample(60, 9);
    auto c = d.sample(60, 10);
    REQUIRE(a.size() == 60);
    bool identical = true, differs = false;
    for (size_t k = 0; k < a.size(); ++k) {
      INFO(text);
      CHECK(d.contains(a[k], 1e-9));
      identical = identical && (a[k] - b[k]).norm() == 0.0;
      differs = differs || (a[k] - c[k]).norm() > 0.0;
    }
    CHECK(identical);
    CHECK(differs);
  }
}

TEST_CASE("product domains behave factorwise") {
  auto d = DomainDescriptor::parse("product(disc, annulus(2))");
  REQUIRE(d.dim() == 2);
  CHECK(d.contains(pt({cplx(0.5, 0), cplx(1, 0)})));
  CHECK_FALSE(d.contains(pt({cplx(0.5, 0), cplx(0.1, 0)})));
  CHECK(d.boundary_gap(pt({cplx(0.5, 0), cplx(1, 0)})) == Catch::Approx(0.5).margin(1e-15));
  CHECK(d.bounding_radius() == Catch::Approx(std::sqrt(5.0)));
  CHECK_FALSE(d.is_convex());
  CHECK(DomainDescriptor::parse("product(disc, ball(h,2))").is_convex());
  for (const auto& z : d.sample(40, 3)) CHECK(d.contains(z, 1e-9));
}

TEST_CASE("convexity and extreme-boundary declarations") {
  CHECK(DomainDescriptor::parse("disc").is_convex());
  CHECK(DomainDescriptor::parse("polydisc(1,1)").is_convex());
  CHECK_FALSE(DomainDescriptor::parse("annulus(2)").is_convex());
  CHECK_FALSE(DomainDescriptor::parse(kExampleDomain).is_convex());

  CHECK(DomainDescriptor::parse("ball(h,2)").all_boundary_extreme());
  CHECK(DomainDescriptor::parse("ball(p=4,2)").all_boundary_extreme());
  CHECK(DomainDescriptor::parse("disc").all_boundary_extreme());
  CHECK_FALSE(DomainDescriptor::parse("ball(sup,2)").all_boundary_extreme());
  CHECK_FALSE(DomainDescriptor::parse("ball(1,2)").all_boundary_extreme());
}

TEST_CASE("dual peaking functionals have operator norm one and peak") {
  const char* texts[] = {"ball(h,2)", "ball(sup,2)", "ball(1,2)", "ball(p=3,2)", "ball(h,3)"};
  rng g(21);
  for (const char* text : texts) {
    auto d = DomainDescriptor::parse(text);
    for (int rep = 0; rep < 10; ++rep) {
      cvec x(d.dim());
      for (int j = 0; j < d.dim(); ++j) x[j] = cplx(g.uniform(-1, 1), g.uniform(-1, 1));
      double nx = d.ball_norm(x);
      if (nx < 0.1) continue;
      cvec u = d.dual_peak(x);
      cplx peak = (u.array() * x.array()).sum();
      INFO(text);
      CHECK(std::abs(peak - cplx(nx, 0)) < 1e-12 * std::max(1.0, nx));
      for (const auto& w : d.sample(100, rng::derive(3, rep))) {
        cplx v = (u.array() * w.array()).sum();
        CHECK(std::abs(v) <= d.ball_norm(w) * (1.0 + 1e-12) + 1e-15);
      }
    }
  }
}

TEST_CASE("support function dominates sampled members") {
  const char* texts[] = {"ball(h,2)", "ball(1,2)", "polydisc(1.5,0.5)", "annulus(2)"};
  rng g(33);
  for (const char* text : texts) {
    auto d = DomainDescriptor::parse(text);
    for (int rep = 0; rep < 6; ++rep) {
      cvec u(d.dim());
      for (int j = 0; j < d.dim(); ++j) u[j] = cplx(g.normal(), g.normal());
      double h = d.support(u);
      for (const auto& z : d.sample(80, rng::derive(17, rep))) {
        cplx v = (u.array() * z.array()).sum();
        INFO(text);
        CHECK(v.real() <= h + 1e-9);
      }
    }
  }
}

TEST_CASE("hermitian ball automorphism swaps the base point with the origin") {
  rng g(5);
  for (int rep = 0; rep < 12; ++rep) {
    cvec a(2), z(2);
    for (int j = 0; j < 2; ++j) {
      a[j] = 0.5 * cplx(g.uniform(-1, 1), g.uniform(-1, 1));
      z[j] = 0.6 * cplx(g.uniform(-1, 1), g.uniform(-1, 1));
    }
    if (a.norm() >= 0.95 || z.norm() >= 0.95) continue;
    cvec fa = hermitian_ball_automorphism(a, a);
    cvec f0 = hermitian_ball_automorphism(a, cvec::Zero(2));
    CHECK(fa.norm() < 1e-13);
    CHECK((f0 - a).norm() < 1e-13);
    // invariant: 1-|g_a(z)|^2 = (1-|a|^2)(1-|z|^2)/|1-<z,a>|^2
    cvec w = hermitian_ball_automorphism(a, z);
    cplx ip = (z.array() * a.array().conjugate()).sum();
    double rhs = (1.0 - a.squaredNorm()) * (1.0 - z.squaredNorm()) / std::norm(cplx(1, 0) - ip);
    CHECK(std::abs((1.0 - w.squaredNorm()) - rhs) < 1e-12);
    // involution
    CHECK((hermitian_ball_automorphism(a, w) - z).norm() < 1e-12);
  }
}

TEST_CASE("inequality constraints treat poles as outside") {
  auto d = DomainDescriptor::parse("domain{ |1/x| < 2; |x| < 2 }");
  CHECK(d.contains(pt({cplx(1, 0)})));
  CHECK_FALSE(d.contains(pt({cplx(0, 0)})));  // pole of 1/x
  CHECK_FALSE(d.contains(pt({cplx(0.4, 0)})));
}

TEST_CASE("boundedness probe rejects unbounded or empty inequality domains") {
  REQUIRE_THROWS_AS(DomainDescriptor::parse("domain{ 0.5 < |x| }"), error);
  try {
    DomainDescriptor::parse("domain{ |x| < 0.3; 0.7 < |x| }");
    FAIL("expected a sampling error for an empty domain");
  } catch (const error& e) {
    CHECK(e.code() == errc::sampling);
  }
}

TEST_CASE("centers are interior points") {
  const char* texts[] = {"disc", "ball(h,2)", "polydisc(1,1)", "annulus(2)", kExampleDomain,
                         "product(disc, annulus(2))"};
  for (const char* text : texts) {
    auto d = DomainDescriptor::parse(text);
    INFO(text);
    CHECK(d.contains(d.center()));
  }
}

TEST_CASE("domain grammar round trips and rejects malformed input") {
  const char* texts[] = {"disc", "ball(h,2)", "ball(sup,2)", "ball(1,3)", "ball(p=3,2)",
                         "polydisc(1,0.5)", "annulus(2)", "product(disc,annulus(2))"};
  for (const char* text : texts) {
    auto d = DomainDescriptor::parse(text);
    auto e = DomainDescriptor::parse(d.to_string());
    CHECK(d.to_string() == e.to_string());
  }
  REQUIRE_THROWS_AS(DomainDescriptor::parse("annulus(0.5)"), error);
  REQUIRE_THROWS_AS(DomainDescriptor::parse("ball(q,2)"), error);
  REQUIRE_THROWS_AS(DomainDescriptor::parse("disc extra"), error);
  REQUIRE_THROWS_AS(DomainDescriptor::parse("polydisc()"), error);
}
