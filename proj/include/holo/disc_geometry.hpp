#pragma once

#include <cmath>
#include <complex>

#include "holo/expr.hpp"

namespace holo {

/** Disc automorphism z -> lambda (z - a)/(1 - conj(a) z), |a| < 1, |lambda| = 1. */
class MobiusTransform {
 public:
  MobiusTransform() = default;
  MobiusTransform(cplx a, cplx lambda) : a_(a), lambda_(lambda) {
    require(std::abs(a_) < 1.0 - 1e-12, errc::degeneracy, "Mobius base point too close to the boundary");
    double m = std::abs(lambda_);
    require(std::abs(m - 1.0) < 1e-9, errc::invalid_argument, "Mobius phase must be unimodular");
    lambda_ /= m;
  }

  static MobiusTransform identity() { return MobiusTransform(cplx(0, 0), cplx(1, 0)); }
  /** Phase-one automorphism sending a to 0. */
  static MobiusTransform centering(cplx a) { return MobiusTransform(a, cplx(1, 0)); }
  static MobiusTransform rotation(cplx lambda) { return MobiusTransform(cplx(0, 0), lambda); }

  cplx base() const { return a_; }
  cplx phase() const { return lambda_; }

  cplx apply(cplx z) const {
    cplx den = cplx(1, 0) - std::conj(a_) * z;
    return lambda_ * (z - a_) / den;  // pole 1/conj(a) lies outside the closed disc
  }

  cplx derivative(cplx z) const {
    cplx den = cplx(1, 0) - std::conj(a_) * z;
    return lambda_ * (cplx(1, 0) - std::norm(a_)) / (den * den);
  }

  /** Group law: (m1 * m2)(z) = m1(m2(z)), renormalized to the canonical form. */
  friend MobiusTransform operator*(const MobiusTransform& m1, const MobiusTransform& m2) {
    cplx l1 = m1.lambda_, l2 = m2.lambda_, a1 = m1.a_, a2 = m2.a_;
    cplx A = l1 * (l2 + a1 * std::conj(a2));
    cplx B = -l1 * (l2 * a2 + a1);
    cplx D = cplx(1, 0) + std::conj(a1) * l2 * a2;
    require(std::abs(A) > 1e-14 && std::abs(D) > 1e-14, errc::degeneracy, "degenerate Mobius composition");
    return MobiusTransform(-B / A, A / D);
  }

  MobiusTransform inverse() const { return MobiusTransform(-lambda_ * a_, std::conj(lambda_)); }

  /** The map as an expression in z0, for symbolic composition. */
  HolomorphicMap as_map() const {
    Expression z = Expression::variable(0);
    Expression num = Expression::constant(lambda_) * (z - Expression::constant(a_));
    Expression den = Expression::constant(cplx(1, 0)) - Expression::constant(std::conj(a_)) * z;
    std::vector<Expression> comps{num / den};
    return HolomorphicMap(std::move(comps), 1);
  }

 private:
  cplx a_{0.0, 0.0};
  cplx lambda_{1.0, 0.0};
};

/** Hyperbolic distance on the unit disc: artanh |(z-w)/(1-conj(w)z)|. */
inline double poincare_distance(cplx z, cplx w) {
  require(std::abs(z) < 1.0 && std::abs(w) < 1.0, errc::domain, "poincare_distance needs points in the open disc");
  cplx den = cplx(1, 0) - std::conj(w) * z;
  return artanh_checked(std::abs((z - w) / den));
}

/** Infinitesimal form |v| / (1 - |z|^2). */
inline double poincare_metric(cplx z, cplx v) {
  double r2 = std::norm(z);
  require(r2 < 1.0, errc::domain, "poincare_metric needs a point in the open disc");
  return std::abs(v) / (1.0 - r2);
}

/** Contraction slack of a one-variable self-map in distance units:
 *  omega(z,w) - omega(f(z),f(w)) >= 0, zero exactly for disc automorphisms. */
inline double schwarz_pick_defect(const HolomorphicMap& f, cplx z, cplx w) {
  require(f.arity() == 1 && f.dim() == 1, errc::arity, "schwarz_pick_defect needs a map of the disc");
  cvec zz(1), ww(1);
  zz[0] = z;
  ww[0] = w;
  cplx fz = f.eval(zz)[0], fw = f.eval(ww)[0];
  require(std::abs(fz) < 1.0 && std::abs(fw) < 1.0, errc::hypothesis,
          "map leaves the disc at the probe points (not a self-map)");
  return poincare_distance(z, w) - poincare_distance(fz, fw);
}

}  // namespace holo
