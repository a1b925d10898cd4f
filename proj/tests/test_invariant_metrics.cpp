#include <catch2/catch_amalgamated.hpp>

#include "holo/analytic_disc.hpp"
#include "holo/invariant_metrics.hpp"

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

TEST_CASE("rational disc evaluation matches the defining formula") {
  std::vector<cvec> coeffs{vec2({0.1, 0.2}, {-0.3, 0.05}), vec2({0.5, 0}, {0.1, -0.4}), vec2({0, 0.25}, {0.2, 0})};
  std::vector<cplx> roots{{0.4, 0.1}, {-0.2, 0.3}};
  AnalyticDisc phi(coeffs, roots);
  cplx zeta(0.35, -0.2);
  cplx den = (cplx(1, 0) - std::conj(roots[0]) * zeta) * (cplx(1, 0) - std::conj(roots[1]) * zeta);
  cvec expected = (coeffs[0] + coeffs[1] * zeta + coeffs[2] * zeta * zeta) / den;
  CHECK((phi.eval(zeta) - expected).norm() < 1e-14);

  // derivative against central differences
  double h = 1e-6;
  cvec fd = (phi.eval(zeta + h) - phi.eval(zeta - h)) / (2 * h);
  CHECK((phi.derivative(zeta) - fd).norm() < 1e-8);
  cvec fdi = (phi.eval(zeta + cplx(0, h)) - phi.eval(zeta - cplx(0, h))) / cplx(0, 2 * h);
  CHECK((phi.derivative(zeta) - fdi).norm() < 1e-8);
}

TEST_CASE("mobius precomposition is exact on coefficients") {
  std::vector<cvec> coeffs{vec2({0.1, -0.1}, {0.2, 0}), vec2({0.3, 0.1}, {0, -0.2}), vec2({-0.05, 0}, {0.1, 0.1})};
  std::vector<cplx> roots{{0.25, -0.15}};
  AnalyticDisc phi(coeffs, roots);
  MobiusTransform m({0.3, 0.1}, std::polar(1.0, 0.7));
  AnalyticDisc composed = phi.compose_mobius(m);
  rng g(42);
  for (int k = 0; k < 24; ++k) {
    cplx zeta = g.disc_point(0.97);
    CHECK((composed.eval(zeta) - phi.eval(m.apply(zeta))).norm() < 1e-12);
  }
}

TEST_CASE("shrink reparametrizes exactly") {
  std::vector<cvec> coeffs{vec1({0.2, 0.1}), vec1({0.7, 0}), vec1({0, 0.3})};
  AnalyticDisc phi(coeffs, {cplx(0.5, 0.2)});
  AnalyticDisc shr = phi.shrink(0.1);
  rng g(7);
  for (int k = 0; k < 16; ++k) {
    cplx zeta = g.disc_point(1.0);
    CHECK(std::abs(shr.eval(zeta)[0] - phi.eval(0.9 * zeta)[0]) < 1e-14);
  }
}

TEST_CASE("containment certification accepts inscribed discs and rejects escapes") {
  auto disc = DomainDescriptor::unit_disc();
  AnalyticDisc radial = AnalyticDisc::affine(vec1(0), vec1(1)).shrink(1e-9);
  double m = certify_containment(radial, disc);
  CHECK(m > 0);
  CHECK(m < 1e-6);

  AnalyticDisc big = AnalyticDisc::affine(vec1(0), vec1(1.2));
  CHECK_THROWS_AS(certify_containment(big, disc), error);

  auto ann = DomainDescriptor::annulus(2.0);
  AnalyticDisc safe = AnalyticDisc::affine(vec1(1.05), vec1(0.1));
  CHECK(containment_slack(safe, ann) > 0);
  // passes through the hole: the boundary circle alone would miss it
  AnalyticDisc through = AnalyticDisc::affine(vec1(0.0), vec1(1.4));
  CHECK(containment_slack(through, ann) < 0);
}

TEST_CASE("disc distances coincide with the poincare distance") {
  auto d = DomainDescriptor::unit_disc();
  cvec z = vec1({0.2, 0.1}), w = vec1({-0.4, 0.3});
  double expect = poincare_distance(z[0], w[0]);
  auto [lo, fn] = caratheodory_lower(d, z, w, 0);
  auto [up, wit] = kobayashi_upper(d, z, w);
  CHECK(lo == Catch::Approx(expect).margin(1e-10));
  CHECK(up == Catch::Approx(expect).margin(1e-7));
  CHECK(lo <= up + 1e-12);
  CHECK(wit.exact);
  CHECK(wit.disc.containment_margin() > 0);
  // witness reproduces its own value and endpoints
  CHECK(poincare_distance(wit.zeta_z, wit.zeta_w) == Catch::Approx(wit.value).margin(1e-12));
  CHECK((wit.disc.eval(wit.zeta_z) - z).norm() < 1e-9);
  CHECK((wit.disc.eval(wit.zeta_w) - w).norm() < 1e-9);
  CHECK(poincare_distance(fn.apply(d, z), fn.apply(d, w)) == Catch::Approx(lo).margin(1e-10));
}

TEST_CASE("hermitian ball bracket matches the automorphism formula") {
  auto d = DomainDescriptor::ball(BallNorm::hermitian, 2);
  cvec z = vec2(0, 0), w = vec2(0.3, 0.4);
  auto [lo, fn] = caratheodory_lower(d, z, w, 0);
  auto [up, wit] = kobayashi_upper(d, z, w);
  double expect = std::atanh(0.5);
  CHECK(lo == Catch::Approx(expect).margin(1e-10));
  CHECK(up == Catch::Approx(expect).margin(1e-7));
  CHECK(wit.exact);

  rng g(11);
  for (int k = 0; k < 5; ++k) {
    cvec a = vec2(g.disc_point(0.6), g.disc_point(0.5));
    cvec b = vec2(g.disc_point(0.6), g.disc_point(0.5));
    if ((a - b).norm() < 1e-6) continue;
    double ref = std::atanh(hermitian_ball_automorphism(a, b).norm());
    auto [l2, f2] = caratheodory_lower(d, a, b, 0);
    auto [u2, w2] = kobayashi_upper(d, a, b);
    CHECK(l2 == Catch::Approx(ref).margin(1e-10));
    CHECK(u2 == Catch::Approx(ref).margin(1e-6));
    CHECK((w2.disc.eval(w2.zeta_z) - a).norm() < 1e-8);
    CHECK((w2.disc.eval(w2.zeta_w) - b).norm() < 1e-8);
  }
}

TEST_CASE("polydisc bracket equals the coordinate maximum") {
  auto d = DomainDescriptor::polydisc({1.0, 0.5});
  cvec z = vec2({0.1, 0}, {0.05, 0.02}), w = vec2({-0.5, 0.2}, {-0.1, 0.1});
  double expect = std::max(poincare_distance(z[0], w[0]), poincare_distance(z[1] / 0.5, w[1] / 0.5));
  auto [lo, fn] = caratheodory_lower(d, z, w, 0);
  auto [up, wit] = kobayashi_upper(d, z, w);
  CHECK(lo == Catch::Approx(expect).margin(1e-10));
  CHECK(up == Catch::Approx(expect).margin(1e-6));
  CHECK(wit.exact);
  CHECK((wit.disc.eval(wit.zeta_z) - z).norm() < 1e-8);
  CHECK((wit.disc.eval(wit.zeta_w) - w).norm() < 1e-8);
  CHECK(poincare_distance(fn.apply(d, z), fn.apply(d, w)) == Catch::Approx(lo).margin(1e-10));
}

TEST_CASE("bracket gap is tight on convex model domains") {
  std::vector<DomainDescriptor> domains{DomainDescriptor::unit_disc(), DomainDescriptor::ball(BallNorm::hermitian, 2),
                                        DomainDescriptor::polydisc({1.0, 1.0})};
  for (const auto& d : domains) {
    auto pts = d.sample(6, 5);
    auto qts = d.sample(6, 9);
    for (size_t k = 0; k < pts.size(); ++k) {
      // keep pairs comfortably interior
      cvec a = 0.8 * pts[k], b = 0.8 * qts[k];
      if ((a - b).norm() < 1e-8) continue;
      auto est = distance_bracket(d, a, b, 1e-6, 500);
      CHECK(est.converged);
      CHECK(est.upper - est.lower < 1e-6);
      CHECK(est.lower <= est.upper + 1e-12);
      CHECK(est.note.empty());
    }
  }
}

TEST_CASE("lower, integrated and upper estimates are ordered on radial pairs") {
  struct Case {
    DomainDescriptor d;
    cvec w;
  };
  std::vector<Case> cases;
  cases.push_back({DomainDescriptor::unit_disc(), vec1(0.7)});
  cases.push_back({DomainDescriptor::ball(BallNorm::hermitian, 2), vec2(0.3, 0.4)});
  cases.push_back({DomainDescriptor::polydisc({1.0, 1.0}), vec2(0.5, 0.2)});
  cases.push_back({DomainDescriptor::ball(BallNorm::one, 2), vec2(0.3, 0.25)});
  cases.push_back({DomainDescriptor::ball(BallNorm::pnorm, 2, 3.0), vec2(0.4, 0.3)});
  for (auto& c : cases) {
    cvec z = cvec::Zero(c.d.dim());
    auto [lo, fn] = caratheodory_lower(c.d, z, c.w, 0);
    auto [up, wit] = kobayashi_upper(c.d, z, c.w, 6, 0);
    double mid = integrated_distance(c.d, z, c.w);
    CAPTURE(c.d.to_string(), lo, mid, up);
    CHECK(lo <= mid + 1e-12);
    CHECK(mid <= up + 1e-6);
    CHECK(lo <= up + 1e-12);
    CHECK(lo > 0);
  }
}

TEST_CASE("annulus bounds stay ordered with a possible gap") {
  auto d = DomainDescriptor::annulus(2.0);
  cvec z = vec1(0.6), w = vec1(1.4);
  auto [lo, fn] = caratheodory_lower(d, z, w, 400);
  auto [up, wit] = kobayashi_upper(d, z, w, 4, 800);
  CHECK(lo > 0);
  CHECK(std::isfinite(up));
  CHECK(lo <= up + 1e-12);
  CHECK(wit.disc.containment_margin() > 0);
  CHECK((wit.disc.eval(wit.zeta_z) - z).norm() < 1e-7);
  CHECK((wit.disc.eval(wit.zeta_w) - w).norm() < 1e-7);
  // the reciprocal functional separates points better than pure scaling here
  cvec z2 = vec1(0.55), w2 = vec1({0, 0.55});
  auto [lo2, fn2] = caratheodory_lower(d, z2, w2, 0);
  CHECK(lo2 > 0);
}

TEST_CASE("holomorphic self-maps contract the bracket") {
  auto d = DomainDescriptor::ball(BallNorm::hermitian, 2);
  auto f = parse_map("0.6*z1, 0.6*z0*z1", 2);
  rng g(3);
  for (int k = 0; k < 4; ++k) {
    cvec a = vec2(g.disc_point(0.6), g.disc_point(0.5));
    cvec b = vec2(g.disc_point(0.6), g.disc_point(0.5));
    if ((a - b).norm() < 1e-6) continue;
    auto [lo, fn] = caratheodory_lower(d, a, b, 0);
    auto [up, wit] = kobayashi_upper(d, f.eval(a), f.eval(b));
    CHECK(up <= lo + 1e-8);
  }
}

TEST_CASE("infinitesimal metrics agree with closed forms") {
  auto disc = DomainDescriptor::unit_disc();
  CHECK(caratheodory_inf_metric(disc, vec1(0.5), vec1(1), 0) == Catch::Approx(4.0 / 3.0).margin(1e-12));
  CHECK(kobayashi_inf_metric(disc, vec1(0.5), vec1(1)) == Catch::Approx(4.0 / 3.0).margin(1e-12));

  auto ball = DomainDescriptor::ball(BallNorm::hermitian, 2);
  rng g(13);
  for (int k = 0; k < 5; ++k) {
    cvec z = vec2(g.disc_point(0.55), g.disc_point(0.55));
    cvec v = vec2({g.normal(), g.normal()}, {g.normal(), g.normal()});
    cplx pair = v[0] * std::conj(z[0]) + v[1] * std::conj(z[1]);
    double s2 = 1.0 - z.squaredNorm();
    double ref = std::sqrt(v.squaredNorm() * s2 + std::norm(pair)) / s2;
    CHECK(caratheodory_inf_metric(ball, z, v, 0) == Catch::Approx(ref).epsilon(1e-12));
    CHECK(kobayashi_inf_metric(ball, z, v) == Catch::Approx(ref).epsilon(1e-12));
  }
  CHECK(caratheodory_inf_metric(ball, vec2(0, 0), vec2(0.3, 0.4), 0) == Catch::Approx(0.5).margin(1e-13));

  auto poly = DomainDescriptor::polydisc({1.0, 0.5});
  cvec z = vec2(0.2, 0.1), v = vec2(0.3, 0.05);
  double expect = std::max(poincare_metric(z[0], v[0]), poincare_metric(z[1] / 0.5, v[1] / 0.5));
  CHECK(caratheodory_inf_metric(poly, z, v, 0) == Catch::Approx(expect).epsilon(1e-12));
  CHECK(kobayashi_inf_metric(poly, z, v) == Catch::Approx(expect).epsilon(1e-12));

  auto one = DomainDescriptor::ball(BallNorm::one, 2);
  CHECK(caratheodory_inf_metric(one, vec2(0, 0), vec2(0.3, -0.4), 0) == Catch::Approx(0.7).margin(1e-12));
  CHECK(kobayashi_inf_metric(one, vec2(0, 0), vec2(0.3, -0.4)) == Catch::Approx(0.7).margin(1e-12));

  // homogeneity and ordering on a non-model domain
  auto ann = DomainDescriptor::annulus(2.0);
  double e1 = caratheodory_inf_metric(ann, vec1(0.8), vec1(1), 200);
  double e2 = caratheodory_inf_metric(ann, vec1(0.8), vec1(2), 200);
  CHECK(e2 == Catch::Approx(2 * e1).epsilon(1e-9));
  double ku = kobayashi_inf_metric(ann, vec1(0.8), vec1(1), 4, 200);
  CHECK(e1 <= ku + 1e-10);
  CHECK(e1 > 0);
}

TEST_CASE("general-domain bracket produces certified witnesses") {
  auto d = DomainDescriptor::parse("domain{ |x*y^2| < 1; 0.5 < |x|; |x| < 2 }");
  cvec z = vec2(1.0, 0.1), w = vec2(1.2, -0.2);
  auto est = distance_bracket(d, z, w, 1e-6, 1500);
  CHECK(est.lower >= 0);
  CHECK(est.lower <= est.upper + 1e-12);
  CHECK(est.upper_witness.disc.containment_margin() > 0);
  CHECK((est.upper_witness.disc.eval(est.upper_witness.zeta_z) - z).norm() < 1e-7);
  CHECK((est.upper_witness.disc.eval(est.upper_witness.zeta_w) - w).norm() < 1e-7);
  if (est.lower > 0) {
    cplx fz = est.lower_witness.apply(d, z), fw = est.lower_witness.apply(d, w);
    CHECK(std::abs(fz) < 1.0);
    CHECK(std::abs(fw) < 1.0);
    CHECK(poincare_distance(fz, fw) == Catch::Approx(est.lower).margin(1e-9));
    // the functional maps sampled domain points into the closed unit disc
    for (const auto& p : d.sample(40, 21)) CHECK(std::abs(est.lower_witness.apply(d, p)) < 1.0 + 1e-9);
  }
}

TEST_CASE("integrated distance falls back to a polyline through the center") {
  auto ann = DomainDescriptor::annulus(2.0);
  cvec z = vec1(0.7), w = vec1(-0.7);
  // the straight chord crosses the hole, the polyline detour does not
  double v = integrated_distance(ann, z, w, 1, 24);
  CHECK(std::isfinite(v));
  CHECK(v > 0);
  auto [lo, fn] = caratheodory_lower(ann, z, w, 200);
  CHECK(lo <= v + 1e-9);
}
