#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "holo/expr.hpp"

namespace holo {

enum class DomainKind { ball, polydisc, annulus, inequalities, product };
enum class BallNorm { hermitian, sup, one, pnorm };

/** One side-constrained modulus inequality: lower < |expr(z)| and/or |expr(z)| < upper. */
struct ModulusConstraint {
  Expression expr;
  double lower = -1.0;  // -1 marks "no lower bound"
  double upper = std::numeric_limits<double>::infinity();
};

/** Bounded domain descriptor: norm balls, polydiscs, annuli, modulus-inequality
 *  domains and finite products. Membership is by strict inequality (open sets). */
class DomainDescriptor {
 public:
  static DomainDescriptor unit_disc() { return ball(BallNorm::hermitian, 1); }

  static DomainDescriptor ball(BallNorm norm, int dim, double p = 2.0) {
    require(dim >= 1 && dim <= kMaxVars, errc::arity, "unsupported ball dimension");
    if (norm == BallNorm::pnorm) require(p > 1.0 && std::isfinite(p), errc::invalid_argument, "p-norm needs p > 1");
    DomainDescriptor d;
    d.kind_ = DomainKind::ball;
    d.dim_ = dim;
    d.norm_ = norm;
    d.pexp_ = p;
    return d;
  }

  static DomainDescriptor polydisc(std::vector<double> radii) {
    require(!radii.empty() && static_cast<int>(radii.size()) <= kMaxVars, errc::arity, "unsupported polydisc dimension");
    for (double r : radii) require(r > 0 && std::isfinite(r), errc::invalid_argument, "polydisc radii must be positive");
    DomainDescriptor d;
    d.kind_ = DomainKind::polydisc;
    d.dim_ = static_cast<int>(radii.size());
    d.radii_ = std::move(radii);
    return d;
  }

  static DomainDescriptor annulus(double R) {
    require(R > 1.0 && std::isfinite(R), errc::invalid_argument, "annulus needs R > 1");
    DomainDescriptor d;
    d.kind_ = DomainKind::annulus;
    d.dim_ = 1;
    d.outer_ = R;
    return d;
  }

  static DomainDescriptor inequalities(std::vector<ModulusConstraint> cons, int dim) {
    require(dim >= 1 && dim <= kMaxVars, errc::arity, "unsupported dimension");
    require(!cons.empty(), errc::invalid_argument, "empty constraint list");
    DomainDescriptor d;
    d.kind_ = DomainKind::inequalities;
    d.dim_ = dim;
    d.cons_ = std::move(cons);
    d.run_boundedness_probe();
    return d;
  }

  static DomainDescriptor product(std::vector<DomainDescriptor> factors) {
    require(factors.size() >= 2, errc::invalid_argument, "product needs at least two factors");
    DomainDescriptor d;
    d.kind_ = DomainKind::product;
    d.dim_ = 0;
    for (auto& f : factors) d.dim_ += f.dim();
    require(d.dim_ <= kMaxVars, errc::arity, "product dimension too large");
    d.factors_ = std::move(factors);
    return d;
  }

  static DomainDescriptor parse(std::string_view text);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  BallNorm norm() const { return norm_; }
  double pexp() const { return pexp_; }
  double annulus_outer() const { return outer_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<DomainDescriptor>& factors() const { return factors_; }
  const std::vector<ModulusConstraint>& constraints() const { return cons_; }

  bool is_ball() const { return kind_ == DomainKind::ball; }
  bool is_unit_disc() const { return kind_ == DomainKind::ball && dim_ == 1; }

  /** Declared convexity (conservative for inequality domains). */
  bool is_convex() const {
    switch (kind_) {
      case DomainKind::ball:
      case DomainKind::polydisc: return true;
      case DomainKind::product:
        return std::all_of(factors_.begin(), factors_.end(), [](const auto& f) { return f.is_convex(); });
      default: return false;
    }
  }

  /** True when every boundary point is a complex extreme point of the closure
   *  (hermitian balls and strictly convex p-balls; fails for sup/one norms). */
  bool all_boundary_extreme() const {
    if (kind_ != DomainKind::ball) return false;
    if (dim_ == 1) return true;
    return norm_ == BallNorm::hermitian || norm_ == BallNorm::pnorm;
  }

  /** Minimal inequality slack at z; negative or -inf outside, > 0 inside. */
  double slack(const cvec& z) const {
    require(z.size() == dim_, errc::arity, "point dimension mismatch");
    switch (kind_) {
      case DomainKind::ball: return 1.0 - ball_norm(z);
      case DomainKind::polydisc: {
        double s = std::numeric_limits<double>::infinity();
        for (int j = 0; j < dim_; ++j) s = std::min(s, radii_[static_cast<size_t>(j)] - std::abs(z[j]));
        return s;
      }
      case DomainKind::annulus: {
        double m = std::abs(z[0]);
        return std::min(outer_ - m, m - 1.0 / outer_);
      }
      case DomainKind::inequalities: {
        double s = std::numeric_limits<double>::infinity();
        std::span<const cplx> zs{z.data(), static_cast<size_t>(z.size())};
        for (const auto& c : cons_) {
          double m;
          try {
            m = std::abs(c.expr.eval(zs));
          } catch (const error&) {
            return -std::numeric_limits<double>::infinity();
          }
          if (std::isfinite(c.upper)) s = std::min(s, c.upper - m);
          if (c.lower >= 0.0) s = std::min(s, m - c.lower);
        }
        return s;
      }
      case DomainKind::product: {
        double s = std::numeric_limits<double>::infinity();
        int off = 0;
        for (const auto& f : factors_) {
          s = std::min(s, f.slack(z.segment(off, f.dim())));
          off += f.dim();
        }
        return s;
      }
    }
    fail(errc::invalid_argument, "corrupt domain");
  }

  bool contains(const cvec& z, double margin = 0.0) const { return slack(z) > margin; }

  /** Certified lower bound on the Euclidean distance from z to the boundary.
   *  Exact for hermitian/sup balls, polydiscs, annuli and their products;
   *  a Lipschitz bound for one-/p-norm balls and inequality domains. */
  double boundary_gap(const cvec& z) const {
    require(contains(z, 0.0), errc::domain, "boundary_gap requires an interior point");
    switch (kind_) {
      case DomainKind::ball: {
        double g = 1.0 - ball_norm(z);
        switch (norm_) {
          case BallNorm::hermitian:
          case BallNorm::sup: return g;
          case BallNorm::one: return g / std::sqrt(static_cast<double>(dim_));
          case BallNorm::pnorm:
            return pexp_ >= 2.0 ? g : g / std::pow(static_cast<double>(dim_), 1.0 / pexp_ - 0.5);
        }
        return g;
      }
      case DomainKind::polydisc:
      case DomainKind::annulus: return slack(z);
      case DomainKind::inequalities: return inequality_gap(z);
      case DomainKind::product: {
        double g = std::numeric_limits<double>::infinity();
        int off = 0;
        for (const auto& f : factors_) {
          g = std::min(g, f.boundary_gap(z.segment(off, f.dim())));
          off += f.dim();
        }
        return g;
      }
    }
    fail(errc::invalid_argument, "corrupt domain");
  }

  /** Radius of a centered Euclidean ball containing the domain. Exact for the
   *  model kinds, probe-based for inequality domains. */
  double bounding_radius() const {
    switch (kind_) {
      case DomainKind::ball:
        switch (norm_) {
          case BallNorm::hermitian:
          case BallNorm::one: return 1.0;
          case BallNorm::sup: return std::sqrt(static_cast<double>(dim_));
          case BallNorm::pnorm:
            return pexp_ <= 2.0 ? 1.0 : std::pow(static_cast<double>(dim_), 0.5 - 1.0 / pexp_);
        }
        return 1.0;
      case DomainKind::polydisc: {
        double s = 0;
        for (double r : radii_) s += r * r;
        return std::sqrt(s);
      }
      case DomainKind::annulus: return outer_;
      case DomainKind::inequalities: {
        double s = 0;
        for (double b : coord_bounds_) s += b * b;
        return std::sqrt(s);
      }
      case DomainKind::product: {
        double s = 0;
        for (const auto& f : factors_) s += sqr(f.bounding_radius());
        return std::sqrt(s);
      }
    }
    fail(errc::invalid_argument, "corrupt domain");
  }

  /** Per-coordinate modulus bounds (sampling box). */
  std::vector<double> coordinate_bounds() const {
    switch (kind_) {
      case DomainKind::ball: return std::vector<double>(static_cast<size_t>(dim_), 1.0);
      case DomainKind::polydisc: return radii_;
      case DomainKind::annulus: return {outer_};
      case DomainKind::inequalities: return coord_bounds_;
      case DomainKind::product: {
        std::vector<double> b;
        for (const auto& f : factors_) {
          auto fb = f.coordinate_bounds();
          b.insert(b.end(), fb.begin(), fb.end());
        }
        return b;
      }
    }
    fail(errc::invalid_argument, "corrupt domain");
  }

  /** A deterministic interior base point. */
  cvec center() const {
    switch (kind_) {
      case DomainKind::ball:
      case DomainKind::polydisc: return cvec::Zero(dim_);
      case DomainKind::annulus: {
        cvec c(1);
        c[0] = cplx(0.5 * (outer_ + 1.0 / outer_), 0.0);
        return c;
      }
      case DomainKind::inequalities: {
        auto pts = sample(1, 7);
        return pts.front();
      }
      case DomainKind::product: {
        cvec c(dim_);
        int off = 0;
        for (const auto& f : factors_) {
          c.segment(off, f.dim()) = f.center();
          off += f.dim();
        }
        return c;
      }
    }
    fail(errc::invalid_argument, "corrupt domain");
  }

  /** Deterministic member sample; every output satisfies contains(z, 1e-9). */
  std::vector<cvec> sample(int count, std::uint64_t seed) const {
    std::vector<cvec> out;
    out.reserve(static_cast<size_t>(count));
    if (kind_ == DomainKind::product) {
      std::vector<std::vector<cvec>> parts;
      for (size_t i = 0; i < factors_.size(); ++i)
        parts.push_back(factors_[i].sample(count, rng::derive(seed, i)));
      for (int k = 0; k < count; ++k) {
        cvec z(dim_);
        int off = 0;
        for (size_t i = 0; i < factors_.size(); ++i) {
          z.segment(off, factors_[i].dim()) = parts[i][static_cast<size_t>(k)];
          off += factors_[i].dim();
        }
        out.push_back(std::move(z));
      }
      return out;
    }
    if (kind_ == DomainKind::ball && norm_ == BallNorm::hermitian) {
      rng g(seed);
      for (int k = 0; k < count; ++k) {
        cvec z(dim_);
        double n2 = 0;
        for (int j = 0; j < dim_; ++j) {
          z[j] = cplx(g.normal(), g.normal());
          n2 += std::norm(z[j]);
        }
        double r = std::pow(g.uniform(0.0, 1.0), 1.0 / (2.0 * dim_));
        z *= (r * (1.0 - 3e-9) / std::sqrt(std::max(n2, 1e-300)));
        out.push_back(std::move(z));
      }
      return out;
    }
    auto bounds = coordinate_bounds();
    rng g(seed);
    long attempts = 0;
    const long attempt_cap = std::max<long>(1000000, 4000L * count);
    while (static_cast<int>(out.size()) < count) {
      if (++attempts > attempt_cap)
        fail(errc::sampling, "rejection sampling acceptance ratio too low (domain nearly thin or empty)");
      cvec z(dim_);
      for (int j = 0; j < dim_; ++j) z[j] = g.disc_point(bounds[static_cast<size_t>(j)]);
      if (contains(z, 1e-9)) out.push_back(std::move(z));
    }
    return out;
  }

  /** Norm attached to a ball kind. */
  double ball_norm(const cvec& z) const {
    require(kind_ == DomainKind::ball, errc::invalid_argument, "ball_norm on a non-ball domain");
    switch (norm_) {
      case BallNorm::hermitian: return z.norm();
      case BallNorm::sup: {
        double m = 0;
        for (int j = 0; j < z.size(); ++j) m = std::max(m, std::abs(z[j]));
        return m;
      }
      case BallNorm::one: {
        double s = 0;
        for (int j = 0; j < z.size(); ++j) s += std::abs(z[j]);
        return s;
      }
      case BallNorm::pnorm: {
        double s = 0;
        for (int j = 0; j < z.size(); ++j) s += std::pow(std::abs(z[j]), pexp_);
        return std::pow(s, 1.0 / pexp_);
      }
    }
    fail(errc::invalid_argument, "corrupt ball norm");
  }

  /** Peaking dual functional at x != 0: coefficients u with |u . w| <= norm(w)
   *  for all w and u . x = norm(x) (operator norm one). */
  cvec dual_peak(const cvec& x) const {
    require(kind_ == DomainKind::ball, errc::invalid_argument, "dual_peak on a non-ball domain");
    double nx = ball_norm(x);
    require(nx > 1e-14, errc::degeneracy, "dual_peak at the origin");
    cvec u = cvec::Zero(dim_);
    switch (norm_) {
      case BallNorm::hermitian:
        for (int j = 0; j < dim_; ++j) u[j] = std::conj(x[j]) / nx;
        return u;
      case BallNorm::sup: {
        int best = 0;
        for (int j = 1; j < dim_; ++j)
          if (std::abs(x[j]) > std::abs(x[best])) best = j;
        u[best] = std::conj(x[best]) / std::abs(x[best]);
        return u;
      }
      case BallNorm::one:
        for (int j = 0; j < dim_; ++j)
          if (std::abs(x[j]) > 0) u[j] = std::conj(x[j]) / std::abs(x[j]);
        return u;
      case BallNorm::pnorm:
        for (int j = 0; j < dim_; ++j)
          if (std::abs(x[j]) > 0)
            u[j] = std::conj(x[j]) * std::pow(std::abs(x[j]), pexp_ - 2.0) / std::pow(nx, pexp_ - 1.0);
        return u;
    }
    fail(errc::invalid_argument, "corrupt ball norm");
  }

  /** Support function h(u) = sup_D Re <u, z> (coefficientwise pairing, no
   *  conjugation). Exact on model kinds; bounding-radius estimate otherwise. */
  double support(const cvec& u) const {
    switch (kind_) {
      case DomainKind::ball:
        switch (norm_) {
          case BallNorm::hermitian: return u.norm();
          case BallNorm::sup: {
            double s = 0;
            for (int j = 0; j < dim_; ++j) s += std::abs(u[j]);
            return s;
          }
          case BallNorm::one: {
            double m = 0;
            for (int j = 0; j < dim_; ++j) m = std::max(m, std::abs(u[j]));
            return m;
          }
          case BallNorm::pnorm: {
            double q = pexp_ / (pexp_ - 1.0), s = 0;
            for (int j = 0; j < dim_; ++j) s += std::pow(std::abs(u[j]), q);
            return std::pow(s, 1.0 / q);
          }
        }
        break;
      case DomainKind::polydisc: {
        double s = 0;
        for (int j = 0; j < dim_; ++j) s += radii_[static_cast<size_t>(j)] * std::abs(u[j]);
        return s;
      }
      case DomainKind::annulus: return outer_ * std::abs(u[0]);
      case DomainKind::inequalities: return bounding_radius() * u.norm();
      case DomainKind::product: {
        double s = 0;
        int off = 0;
        for (const auto& f : factors_) {
          s += f.support(u.segment(off, f.dim()));
          off += f.dim();
        }
        return s;
      }
    }
    fail(errc::invalid_argument, "corrupt domain");
  }

  std::string to_string() const {
    switch (kind_) {
      case DomainKind::ball: {
        if (dim_ == 1 && norm_ == BallNorm::hermitian) return "disc";
        std::string n = norm_ == BallNorm::hermitian ? "h"
                        : norm_ == BallNorm::sup     ? "sup"
                        : norm_ == BallNorm::one     ? "1"
                                                     : "p=" + detail::format_double(pexp_);
        return "ball(" + n + "," + std::to_string(dim_) + ")";
      }
      case DomainKind::polydisc: {
        std::string s = "polydisc(";
        for (size_t j = 0; j < radii_.size(); ++j) {
          if (j) s += ",";
          s += detail::format_double(radii_[j]);
        }
        return s + ")";
      }
      case DomainKind::annulus: return "annulus(" + detail::format_double(outer_) + ")";
      case DomainKind::inequalities: {
        std::string s = "domain{ ";
        for (size_t j = 0; j < cons_.size(); ++j) {
          if (j) s += "; ";
          const auto& c = cons_[j];
          bool first = true;
          if (c.lower >= 0.0) {
            s += detail::format_double(c.lower) + " < |" + c.expr.to_string() + "|";
            first = false;
          }
          if (std::isfinite(c.upper)) {
            if (!first) s += "; ";
            s += "|" + c.expr.to_string() + "| < " + detail::format_double(c.upper);
          }
        }
        return s + " }";
      }
      case DomainKind::product: {
        std::string s = "product(";
        for (size_t j = 0; j < factors_.size(); ++j) {
          if (j) s += ",";
          s += factors_[j].to_string();
        }
        return s + ")";
      }
    }
    fail(errc::invalid_argument, "corrupt domain");
  }

 private:
  DomainDescriptor() = default;

  double inequality_gap(const cvec& z) const {
    // Lipschitz bound per constraint: |e| moves at most sup ||e'|| per unit of
    // Euclidean motion; gradient norms are estimated on a local sample cloud
    // with a factor-two safety margin, and the result is capped by the cloud
    // radius inside which the estimate was taken.
    std::span<const cplx> zs{z.data(), static_cast<size_t>(z.size())};
    double gap = std::numeric_limits<double>::infinity();
    double cloud = std::numeric_limits<double>::infinity();
    std::vector<double> slacks, g0;
    for (const auto& c : cons_) {
      auto jet_to_grad = [&](const cvec& at) {
        std::span<const cplx> s{at.data(), static_cast<size_t>(at.size())};
        auto jet = c.expr.eval_jet(s);
        double g2 = 0;
        for (int j = 0; j < dim_; ++j) g2 += std::norm(jet.d[static_cast<size_t>(j)]);
        return std::make_pair(std::abs(jet.v), std::sqrt(g2));
      };
      auto [m, g] = jet_to_grad(z);
      double s = std::numeric_limits<double>::infinity();
      if (std::isfinite(c.upper)) s = std::min(s, c.upper - m);
      if (c.lower >= 0.0) s = std::min(s, m - c.lower);
      slacks.push_back(s);
      g0.push_back(g);
      cloud = std::min(cloud, s / std::max(2.0 * g, 1e-12));
    }
    rng g(12345);
    for (size_t ci = 0; ci < cons_.size(); ++ci) {
      double gmax = g0[ci];
      for (int k = 0; k < 16; ++k) {
        cvec y = z;
        for (int j = 0; j < dim_; ++j) y[j] += cloud * cplx(g.normal(), g.normal()) / std::sqrt(2.0 * dim_);
        try {
          std::span<const cplx> ys{y.data(), static_cast<size_t>(y.size())};
          auto jet = cons_[ci].expr.eval_jet(ys);
          double g2 = 0;
          for (int j = 0; j < dim_; ++j) g2 += std::norm(jet.d[static_cast<size_t>(j)]);
          gmax = std::max(gmax, std::sqrt(g2));
        } catch (const error&) {
          return std::min(cloud * 0.5, gap);
        }
      }
      gap = std::min(gap, slacks[ci] / std::max(2.0 * gmax, 1e-12));
    }
    return std::min(gap, cloud);
  }

  void run_boundedness_probe() {
    // Grid escape test: grow the sampling box until members stop tracking the
    // box scale; failure to stabilize below radius ~1e3 reports unboundedness.
    std::vector<double> best(static_cast<size_t>(dim_), 0.0);
    bool seen_any = false;
    for (double radius = 1.0; radius <= 1100.0; radius *= 2.0) {
      rng g(rng::derive(99, static_cast<std::uint64_t>(radius)));
      std::vector<double> mx(static_cast<size_t>(dim_), 0.0);
      int members = 0;
      for (int k = 0; k < 6000; ++k) {
        cvec z(dim_);
        for (int j = 0; j < dim_; ++j) z[j] = g.disc_point(radius);
        if (contains(z, 0.0)) {
          ++members;
          for (int j = 0; j < dim_; ++j) mx[static_cast<size_t>(j)] = std::max(mx[static_cast<size_t>(j)], std::abs(z[j]));
        }
      }
      if (members > 0) {
        seen_any = true;
        for (int j = 0; j < dim_; ++j) best[static_cast<size_t>(j)] = std::max(best[static_cast<size_t>(j)], mx[static_cast<size_t>(j)]);
        double peak = *std::max_element(mx.begin(), mx.end());
        if (peak < 0.6 * radius) {
          for (double& b : best) b = 1.1 * b + 1e-6;
          coord_bounds_ = best;
          return;
        }
      } else if (seen_any) {
        for (double& b : best) b = 1.1 * b + 1e-6;
        coord_bounds_ = best;
        return;
      }
    }
    if (!seen_any) fail(errc::sampling, "no interior point found up to radius 1e3");
    fail(errc::unbounded, "domain fails the boundedness probe (members track the box up to radius 1e3)");
  }

  DomainKind kind_ = DomainKind::ball;
  int dim_ = 1;
  BallNorm norm_ = BallNorm::hermitian;
  double pexp_ = 2.0;
  std::vector<double> radii_;
  double outer_ = 2.0;
  std::vector<ModulusConstraint> cons_;
  std::vector<DomainDescriptor> factors_;
  std::vector<double> coord_bounds_;
};

namespace detail {

inline int scan_domain_dim(std::string_view body) {
  Lexer lex(body);
  int dim = 1;
  while (lex.peek().kind != Token::Kind::end) {
    auto t = lex.take();
    if (t.kind == Token::Kind::ident) {
      if (t.text == "y") dim = std::max(dim, 2);
      if (t.text.size() >= 2 && t.text[0] == 'z') {
        bool digits = true;
        for (size_t k = 1; k < t.text.size(); ++k)
          if (!std::isdigit(static_cast<unsigned char>(t.text[k]))) digits = false;
        if (digits) dim = std::max(dim, std::atoi(t.text.c_str() + 1) + 1);
      }
    }
  }
  return dim;
}

inline double parse_positive_bound(Lexer& lex, int arity) {
  ExprParser p(lex, arity);
  Expression e = p.parse_expression();
  require(e.is_constant(), errc::parse, "inequality bound must be a constant");
  cplx c = e.constant_value();
  require(std::abs(c.imag()) < 1e-14 && c.real() >= 0.0, errc::parse, "inequality bound must be a nonnegative real");
  return c.real();
}

inline DomainDescriptor parse_domain_text(Lexer& lex);

inline DomainDescriptor parse_domain_atom(Lexer& lex) {
  auto t = lex.peek();
  require(t.kind == Token::Kind::ident, errc::parse, "expected a domain keyword");
  lex.take();
  if (t.text == "disc") return DomainDescriptor::unit_disc();
  if (t.text == "ball") {
    lex.expect_punct('(');
    auto n = lex.take();
    BallNorm norm;
    double p = 2.0;
    if (n.kind == Token::Kind::ident && n.text == "h") {
      norm = BallNorm::hermitian;
    } else if (n.kind == Token::Kind::ident && n.text == "sup") {
      norm = BallNorm::sup;
    } else if (n.kind == Token::Kind::number && n.number == 1.0) {
      norm = BallNorm::one;
    } else if (n.kind == Token::Kind::ident && n.text == "p") {
      lex.expect_punct('=');
      auto v = lex.take();
      require(v.kind == Token::Kind::number, errc::parse, "expected a number after p=");
      norm = BallNorm::pnorm;
      p = v.number;
    } else {
      lex.fail_here("expected ball norm h, sup, 1, or p=<num>");
    }
    lex.expect_punct(',');
    auto d = lex.take();
    require(d.kind == Token::Kind::number, errc::parse, "expected the ball dimension");
    lex.expect_punct(')');
    return DomainDescriptor::ball(norm, static_cast<int>(d.number), p);
  }
  if (t.text == "polydisc") {
    lex.expect_punct('(');
    std::vector<double> radii;
    do {
      auto r = lex.take();
      require(r.kind == Token::Kind::number, errc::parse, "expected a polydisc radius");
      radii.push_back(r.number);
    } while (lex.accept_punct(','));
    lex.expect_punct(')');
    return DomainDescriptor::polydisc(std::move(radii));
  }
  if (t.text == "annulus") {
    lex.expect_punct('(');
    auto r = lex.take();
    require(r.kind == Token::Kind::number, errc::parse, "expected the outer radius");
    lex.expect_punct(')');
    return DomainDescriptor::annulus(r.number);
  }
  if (t.text == "product") {
    lex.expect_punct('(');
    std::vector<DomainDescriptor> factors;
    do factors.push_back(parse_domain_text(lex));
    while (lex.accept_punct(','));
    lex.expect_punct(')');
    return DomainDescriptor::product(std::move(factors));
  }
  lex.fail_here("unknown domain keyword '" + t.text + "'");
}

inline DomainDescriptor parse_domain_text(Lexer& lex) { return parse_domain_atom(lex); }

}  // namespace detail

inline DomainDescriptor DomainDescriptor::parse(std::string_view text) {
  // The inequality form needs a two-pass read (dimension inference), so split
  // on the leading keyword first.
  size_t k = 0;
  while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
  if (text.substr(k).starts_with("domain")) {
    size_t open = text.find('{', k);
    size_t close = text.rfind('}');
    require(open != std::string_view::npos && close != std::string_view::npos && close > open, errc::parse,
            "expected domain{ ... }");
    std::string_view body = text.substr(open + 1, close - open - 1);
    int dim = detail::scan_domain_dim(body);
    detail::Lexer lex(body);
    std::vector<ModulusConstraint> cons;
    while (true) {
      if (lex.peek().kind == detail::Token::Kind::end) break;
      if (lex.accept_punct('|')) {
        // |expr| < b
        detail::ExprParser p(lex, dim);
        Expression e = p.parse_expression();
        lex.expect_punct('|');
        lex.expect_punct('<');
        double b = detail::parse_positive_bound(lex, dim);
        ModulusConstraint c;
        c.expr = e;
        c.upper = b;
        cons.push_back(std::move(c));
      } else {
        // lo < |expr|
        double lo = detail::parse_positive_bound(lex, dim);
        lex.expect_punct('<');
        lex.expect_punct('|');
        detail::ExprParser p(lex, dim);
        Expression e = p.parse_expression();
        lex.expect_punct('|');
        ModulusConstraint c;
        c.expr = e;
        c.lower = lo;
        cons.push_back(std::move(c));
      }
      if (!lex.accept_punct(';')) break;
    }
    require(lex.peek().kind == detail::Token::Kind::end, errc::parse, "trailing input after domain{...}");
    return inequalities(std::move(cons), dim);
  }
  detail::Lexer lex(text);
  DomainDescriptor d = detail::parse_domain_text(lex);
  require(lex.peek().kind == detail::Token::Kind::end, errc::parse, "trailing input after domain");
  return d;
}

/** Standard involutive automorphism of the hermitian unit ball exchanging 0
 *  and a; for n = 1 this is z -> (a - z)/(1 - conj(a) z). */
inline cvec hermitian_ball_automorphism(const cvec& a, const cvec& z) {
  double na2 = a.squaredNorm();
  require(na2 < 1.0, errc::domain, "automorphism base point must lie in the open ball");
  if (na2 < 1e-300) return -z;
  cplx ip = (z.array() * a.array().conjugate()).sum();  // <z,a>
  cplx den = cplx(1.0, 0.0) - ip;
  require(std::abs(den) > 1e-14, errc::degeneracy, "automorphism denominator vanished");
  double s = std::sqrt(1.0 - na2);
  cvec Pz = (ip / na2) * a;
  cvec Qz = z - Pz;
  return (a - Pz - s * Qz) / den;
}

}  // namespace holo
