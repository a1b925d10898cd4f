#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <vector>

#include "holo/expr.hpp"

using namespace holo;

namespace {

cvec pt(std::initializer_list<cplx> vals) {
  cvec z(static_cast<int>(vals.size()));
  int j = 0;
  for (auto v : vals) z[j++] = v;
  return z;
}

}  // namespace

TEST_CASE("parse_map handles the rational example map (1/x, x*y)") {
  auto f = parse_map("1/x, x*y", 2);
  REQUIRE(f.arity() == 2);
  REQUIRE(f.dim() == 2);
  auto v = f.eval(pt({cplx(1, 0), cplx(0.3, 0)}));
  CHECK(std::abs(v[0] - cplx(1, 0)) < 1e-15);
  CHECK(std::abs(v[1] - cplx(0.3, 0)) < 1e-15);
}

TEST_CASE("identity map returns its argument") {
  auto f = parse_map("z0", 1);
  auto z = pt({cplx(0.37, -0.2)});
  CHECK(std::abs(f.eval(z)[0] - z[0]) < 1e-16);
  auto id3 = HolomorphicMap::identity(3);
  auto w = pt({cplx(1, 2), cplx(-0.5, 0), cplx(0, 3)});
  CHECK((id3.eval(w) - w).norm() == 0.0);
}

TEST_CASE("disc automorphism (z-a)/(1-a*z) vanishes at a") {
  auto f = parse_map("(z0-0.5)/(1-0.5*z0)", 1);
  CHECK(std::abs(f.eval(pt({cplx(0.5, 0)}))[0]) < 1e-15);
}

TEST_CASE("jacobian of (1/x, x*y) matches the hand derivative") {
  auto f = parse_map("1/x, x*y", 2);
  cmat J = f.jacobian(pt({cplx(1, 0), cplx(0.3, 0)}));
  CHECK(std::abs(J(0, 0) - cplx(-1, 0)) < 1e-15);
  CHECK(std::abs(J(0, 1)) < 1e-15);
  CHECK(std::abs(J(1, 0) - cplx(0.3, 0)) < 1e-15);
  CHECK(std::abs(J(1, 1) - cplx(1, 0)) < 1e-15);

  cmat K = f.jacobian(pt({cplx(-1, 0), cplx(0, 0)}));
  CHECK((K + cmat::Identity(2, 2)).norm() < 1e-15);
}

TEST_CASE("iterate matches the affine closed form") {
  auto f = parse_map("0.5*z0+0.2", 1);
  auto z = f.iterate(pt({cplx(0, 0)}), 10);
  // z_n = 0.4 (1 - 0.5^n)
  CHECK(std::abs(z[0] - cplx(0.4 * (1.0 - std::pow(0.5, 10)), 0)) < 1e-15);
}

TEST_CASE("iterate of the involution 1/z returns to start") {
  auto f = parse_map("1/z", 1);
  auto z = f.iterate(pt({cplx(2, 0)}), 2);
  CHECK(std::abs(z[0] - cplx(2, 0)) < 1e-15);
}

TEST_CASE("iterate guard reports domain escape") {
  auto f = parse_map("z0+1", 1);
  auto guard = [](const cvec& z) { return std::abs(z[0]) < 1.0; };
  REQUIRE_THROWS_AS(f.iterate(pt({cplx(0.5, 0)}), 3, guard), error);
}

TEST_CASE("parser round trips through to_string") {
  const char* cases[] = {
      "z0",
      "1/x, x*y",
      "(z0-0.5)/(1-0.5*z0)",
      "-(x+y)*x",
      "z0^3 - 2*z0^-2 + i",
      "(1.5+2*i)*z1 - z0/(z1+3e-2)",
      "x*y^2",
      "-x^2 + (x - y)*(x + y)",
  };
  for (const char* text : cases) {
    auto f = parse_map(text, 2);
    auto g = parse_map(f.to_string(), 2);
    REQUIRE(f.dim() == g.dim());
    for (int j = 0; j < f.dim(); ++j) {
      INFO(text << " -> " << f.to_string());
      CHECK(f.component(j) == g.component(j));
    }
  }
}

TEST_CASE("forward-mode derivatives match difference quotients") {
  const char* cases[] = {
      "z0^3 - z1/(2+z0)",
      "(z0*z1 - i)/(z1^2 + 3)",
      "z0^-1 + z1^4*z0",
  };
  rng g(42);
  for (const char* text : cases) {
    auto f = parse_map(text, 2);
    for (int rep = 0; rep < 5; ++rep) {
      cvec z = pt({cplx(g.uniform(-0.8, 0.8) + 1.2, g.uniform(-0.3, 0.3)), cplx(g.uniform(-0.8, 0.8), g.uniform(-0.3, 0.3))});
      cmat J = f.jacobian(z);
      const double h = 1e-5;
      for (int c = 0; c < 2; ++c) {
        cvec zp = z, zm = z, zi = z, zj = z;
        zp[c] += cplx(h, 0);
        zm[c] -= cplx(h, 0);
        zi[c] += cplx(0, h);
        zj[c] -= cplx(0, h);
        cplx dr = (f.eval(zp)[0] - f.eval(zm)[0]) / cplx(2 * h, 0);
        cplx di = (f.eval(zi)[0] - f.eval(zj)[0]) / cplx(0, 2 * h);
        CHECK(std::abs(dr - J(0, c)) < 1e-6);
        CHECK(std::abs(di - J(0, c)) < 1e-6);
      }
    }
  }
}

TEST_CASE("symbolic composition obeys the chain rule") {
  auto f = parse_map("z0^2 - z1, z0*z1 + 1", 2);
  auto g = parse_map("z0/(2+z1), z1^3 - i*z0", 2);
  auto fg = f.compose(g);
  rng r(7);
  for (int rep = 0; rep < 8; ++rep) {
    cvec z = pt({cplx(r.uniform(-0.7, 0.7), r.uniform(-0.7, 0.7)), cplx(r.uniform(-0.7, 0.7), r.uniform(-0.7, 0.7))});
    cmat lhs = fg.jacobian(z);
    cmat rhs = f.jacobian(g.eval(z)) * g.jacobian(z);
    CHECK((lhs - rhs).norm() < 1e-10);
    CHECK((fg.eval(z) - f.eval(g.eval(z))).norm() < 1e-12);
  }
}

TEST_CASE("division by a vanishing denominator raises a pole error") {
  auto f = parse_map("1/z0", 1);
  try {
    f.eval(pt({cplx(0, 0)}));
    FAIL("expected a pole error");
  } catch (const error& e) {
    CHECK(e.code() == errc::pole);
  }
  // negative powers share the pole check
  auto h = parse_map("z0^-2", 1);
  REQUIRE_THROWS_AS(h.eval(pt({cplx(0, 0)})), error);
}

TEST_CASE("evaluation statistics flag near-poles softly") {
  auto f = parse_map("1/z0", 1);
  EvalStats stats;
  auto z = pt({cplx(1e-13, 0)});
  f.eval(z, &stats);
  CHECK(stats.soft_pole());
  EvalStats ok;
  f.eval(pt({cplx(0.5, 0)}), &ok);
  CHECK_FALSE(ok.soft_pole());
}

TEST_CASE("negative and zero integer exponents evaluate exactly") {
  auto f = parse_map("z0^-2, z0^0", 1);
  auto v = f.eval(pt({cplx(2, 0)}));
  CHECK(std::abs(v[0] - cplx(0.25, 0)) < 1e-16);
  CHECK(std::abs(v[1] - cplx(1, 0)) < 1e-16);
}

TEST_CASE("variable aliases respect the arity") {
  CHECK_NOTHROW(parse_map("1/z", 1));       // z means z0 in one variable
  REQUIRE_THROWS_AS(parse_map("z", 2), error);
  REQUIRE_THROWS_AS(parse_map("y", 1), error);
  REQUIRE_THROWS_AS(parse_map("z3", 2), error);
  REQUIRE_THROWS_AS(parse_map("w0", 1), error);
}

TEST_CASE("syntax errors carry a position") {
  try {
    parse_map("z0 + ", 1);
    FAIL("expected a parse error");
  } catch (const error& e) {
    CHECK(e.code() == errc::parse);
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }
  REQUIRE_THROWS_AS(parse_map("z0^1.5", 1), error);
  REQUIRE_THROWS_AS(parse_map("(z0", 1), error);
}

TEST_CASE("constant subexpressions fold at parse time") {
  auto e = parse_expression("2*3 + 1", 1);
  REQUIRE(e.is_constant());
  CHECK(std::abs(e.constant_value() - cplx(7, 0)) < 1e-16);
  auto c = parse_expression("(1+2*i)*(1-2*i)", 1);
  REQUIRE(c.is_constant());
  CHECK(std::abs(c.constant_value() - cplx(5, 0)) < 1e-15);
}

TEST_CASE("complex literals survive printing") {
  const char* cases[] = {"i", "-i", "2*i", "(1+i)", "(0.25-3*i)", "1.5", "-2e-3"};
  for (const char* text : cases) {
    auto e = parse_expression(text, 1);
    auto f = parse_expression(e.to_string(), 1);
    INFO(text << " -> " << e.to_string());
    CHECK(e == f);
  }
}
