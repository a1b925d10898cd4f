#pragma once

#include <utility>
#include <vector>

#include "holo/disc_geometry.hpp"
#include "holo/domains.hpp"

namespace holo {

namespace detail {

/** Coefficient convolution for scalar polynomials (ascending order). */
inline std::vector<cplx> poly_mul(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  std::vector<cplx> out(a.size() + b.size() - 1, cplx(0, 0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline cplx poly_eval(const std::vector<cplx>& a, cplx z) {
  cplx acc(0, 0);
  for (size_t k = a.size(); k-- > 0;) acc = acc * z + a[k];
  return acc;
}

}  // namespace detail

/** Rational analytic disc phi(zeta) = P(zeta) / prod_j (1 - conj(a_j) zeta)
 *  with P polynomial (vector coefficients) and every a_j in the open unit
 *  disc, so the denominator cannot vanish on the closed disc. Polynomial
 *  discs are the root-free special case. */
class AnalyticDisc {
 public:
  AnalyticDisc() = default;

  AnalyticDisc(std::vector<cvec> coeffs, std::vector<cplx> den_roots)
      : coeffs_(std::move(coeffs)), roots_(std::move(den_roots)) {
    require(!coeffs_.empty(), errc::invalid_argument, "disc needs at least one coefficient");
    for (const auto& c : coeffs_) require(c.size() == coeffs_[0].size(), errc::arity, "ragged disc coefficients");
    for (cplx a : roots_)
      require(std::abs(a) < 1.0 - 1e-9, errc::degeneracy, "denominator root too close to the unit circle");
  }

  static AnalyticDisc constant(const cvec& z) { return AnalyticDisc({z}, {}); }

  /** Affine chord zeta -> z + zeta u. */
  static AnalyticDisc affine(const cvec& z, const cvec& u) { return AnalyticDisc({z, u}, {}); }

  int dim() const { return coeffs_.empty() ? 0 : static_cast<int>(coeffs_[0].size()); }
  int num_degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  int den_degree() const { return static_cast<int>(roots_.size()); }
  const std::vector<cvec>& coefficients() const { return coeffs_; }
  const std::vector<cplx>& den_roots() const { return roots_; }
  double containment_margin() const { return margin_; }
  void set_containment_margin(double m) { margin_ = m; }

  cplx denominator(cplx zeta) const {
    cplx q(1, 0);
    for (cplx a : roots_) q *= cplx(1, 0) - std::conj(a) * zeta;
    return q;
  }

  cvec eval(cplx zeta) const {
    cvec p = cvec::Zero(dim());
    for (size_t k = coeffs_.size(); k-- > 0;) p = (p * zeta + coeffs_[k]).eval();
    return p / denominator(zeta);
  }

  cvec derivative(cplx zeta) const {
    cvec p = cvec::Zero(dim()), dp = cvec::Zero(dim());
    for (size_t k = coeffs_.size(); k-- > 0;) {
      dp = (dp * zeta + p).eval();
      p = (p * zeta + coeffs_[k]).eval();
    }
    cplx q = denominator(zeta), dq(0, 0);
    for (cplx a : roots_) {
      cplx qa = q / (cplx(1, 0) - std::conj(a) * zeta);
      dq -= std::conj(a) * qa;
    }
    return (dp * q - p * dq) / (q * q);
  }

  /** Exact reparametrization phi((1-eps) zeta); keeps the class. */
  AnalyticDisc shrink(double eps) const {
    double s = 1.0 - eps;
    std::vector<cvec> c = coeffs_;
    double pw = 1.0;
    for (auto& ck : c) {
      ck *= pw;
      pw *= s;
    }
    std::vector<cplx> r = roots_;
    for (auto& a : r) a *= s;
    return AnalyticDisc(std::move(c), std::move(r));
  }

  /** Exact precomposition with a disc automorphism: phi(m(zeta)). */
  AnalyticDisc compose_mobius(const MobiusTransform& m) const {
    const cplx a = m.base(), l = m.phase();
    const int d = num_degree(), mdeg = den_degree();
    // linear building blocks
    const std::vector<cplx> lin_shift{-l * a, l};                 // l (zeta - a)
    const std::vector<cplx> lin_outer{cplx(1, 0), -std::conj(a)};  // 1 - conj(a) zeta
    // numerator: sum_k c_k [l(zeta-a)]^k [1-conj(a)zeta]^{maxdeg-k}, maxdeg = max(d, mdeg)
    const int maxdeg = std::max(d, mdeg);
    std::vector<cvec> num(static_cast<size_t>(maxdeg) + 1, cvec::Zero(dim()));
    for (int k = 0; k <= d; ++k) {
      std::vector<cplx> term{cplx(1, 0)};
      for (int j = 0; j < k; ++j) term = detail::poly_mul(term, lin_shift);
      for (int j = 0; j < maxdeg - k; ++j) term = detail::poly_mul(term, lin_outer);
      for (size_t i = 0; i < term.size(); ++i) num[i] += term[i] * coeffs_[static_cast<size_t>(k)];
    }
    // denominator: each factor 1 - conj(a_j) m(zeta) becomes
    //   [(1 + conj(a_j) l a) - (conj(a) + conj(a_j) l) zeta] / (1 - conj(a) zeta),
    // and the remaining (1-conj(a)zeta)^{maxdeg-mdeg} powers keep root a.
    std::vector<cplx> new_roots;
    cplx scale(1, 0);
    for (cplx aj : roots_) {
      cplx c0 = cplx(1, 0) + std::conj(aj) * l * a;
      cplx c1 = std::conj(a) + std::conj(aj) * l;
      require(std::abs(c0) > 1e-14, errc::degeneracy, "degenerate disc reparametrization");
      new_roots.push_back(std::conj(c1 / c0));
      scale *= c0;
    }
    for (int j = 0; j < maxdeg - mdeg; ++j) new_roots.push_back(a);
    for (auto& ck : num) ck /= scale;
    // drop negligible trailing coefficients introduced by the expansion
    while (num.size() > 1 && num.back().norm() < 1e-15 * (num.front().norm() + 1.0)) num.pop_back();
    std::vector<cplx> kept;
    for (cplx r : new_roots)
      if (std::abs(r) > 1e-15) kept.push_back(r);
      else {
        // root at 0 means the factor is the constant 1; nothing to keep
      }
    return AnalyticDisc(std::move(num), std::move(kept));
  }

  std::string to_string() const {
    std::string s = "disc[deg " + std::to_string(num_degree());
    if (!roots_.empty()) s += "/" + std::to_string(den_degree());
    s += "]";
    return s;
  }

 private:
  std::vector<cvec> coeffs_;
  std::vector<cplx> roots_;
  double margin_ = std::numeric_limits<double>::quiet_NaN();
};

struct ContainmentOptions {
  double rim = 1e-9;        // certify the shrunk disc |zeta| <= 1 - rim
  int initial_nodes = 256;  // angular resolution, doubled until stable
  int max_nodes = 4096;
  int rings = 8;  // interior rings, only consulted for lower-bounded constraints
};

namespace detail {

inline bool has_lower_constraints(const DomainDescriptor& d) {
  switch (d.kind()) {
    case DomainKind::annulus: return true;
    case DomainKind::inequalities:
      for (const auto& c : d.constraints())
        if (c.lower >= 0.0) return true;
      return false;
    case DomainKind::product:
      for (const auto& f : d.factors())
        if (has_lower_constraints(f)) return true;
      return false;
    default: return false;
  }
}

}  // namespace detail

/** Minimal membership slack of phi over the closed disc of radius 1 - rim.
 *  Upper-type constraints obey the maximum principle, so the angular boundary
 *  grid (node-doubled until stable) decides; lower-bounded moduli can dip at
 *  interior zeros and get an additional ring sweep. Negative values mean the
 *  disc leaves the domain. */
inline double containment_slack(const AnalyticDisc& phi, const DomainDescriptor& d,
                                const ContainmentOptions& opt = {}) {
  require(phi.dim() == d.dim(), errc::arity, "disc/domain dimension mismatch");
  const double rho = 1.0 - opt.rim;
  auto circle_min = [&](int nodes, double radius) {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nodes; ++k) {
      cplx zeta = std::polar(radius, 2.0 * M_PI * k / nodes);
      m = std::min(m, d.slack(phi.eval(zeta)));
    }
    return m;
  };
  int nodes = opt.initial_nodes;
  double best = circle_min(nodes, rho);
  while (nodes < opt.max_nodes) {
    nodes *= 2;
    double next = circle_min(nodes, rho);
    double drop = best - next;
    best = next;
    if (drop < 1e-12 * std::max(1.0, std::abs(best))) break;
  }
  if (detail::has_lower_constraints(d)) {
    best = std::min(best, d.slack(phi.eval(cplx(0, 0))));
    for (int r = 1; r < opt.rings; ++r)
      best = std::min(best, circle_min(96, rho * r / opt.rings));
  }
  return best;
}

/** Certify phi (after the rim shrink) inside d; stores and returns the margin.
 *  Throws when the disc genuinely leaves the domain. */
inline double certify_containment(AnalyticDisc& phi, const DomainDescriptor& d, const ContainmentOptions& opt = {}) {
  double m = containment_slack(phi, d, opt);
  require(m > 0.0, errc::domain, "analytic disc leaves the domain (margin " + std::to_string(m) + ")");
  phi.set_containment_margin(m);
  return m;
}

}  // namespace holo
