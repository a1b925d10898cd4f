#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "holo/domains.hpp"
#include "holo/expr.hpp"
#include "holo/numerics.hpp"

namespace holo {

struct FixedPointResult {
  cvec point;
  double residual = 0;  // ||f(p) - p||
  long iterations = 0;
  double contraction_estimate = 1;  // k = R/(R + r)
  double r_used = 0;                // image-to-boundary gap over the sample cloud
  double R_used = 0;                // diameter bound 2 * bounding_radius
};

struct FixDimensionReport {
  cvec base;
  cmat jacobian;
  std::vector<cplx> eigenvalues;
  int dim = 0;  // geometric multiplicity of the eigenvalue 1
  std::vector<cvec> eigenbasis;
  bool defective = false;  // algebraic multiplicity exceeded the geometric one
};

struct RetractionDiagnostics {
  long inner_iterations = 0;
  double lambda_reached = 0;
  long power_used = 0;
  bool stabilized = true;
};

/** Pointwise retraction approximation; eval updates the shared diagnostics. */
struct RetractionApprox {
  std::function<cvec(const cvec&)> eval;
  std::vector<double> lambda_schedule;
  std::shared_ptr<RetractionDiagnostics> diagnostics;
};

namespace detail {

struct PicardOutcome {
  cvec point;
  double residual = std::numeric_limits<double>::infinity();
  long iterations = 0;
  bool converged = false;
  bool stalled = false;  // residual stopped improving (roundoff floor)
};

/** Fixed-point iteration for g with a domain guard; stops once the residual
 *  ||g(z) - z|| drops below tol (measured at the returned point), or flags a
 *  stall when the residual makes no headway over a long window. The progress
 *  bar must sit above the certified per-window contraction factor, otherwise
 *  honest slow convergence at rates near 1 reads as a stall; callers with a
 *  rate certificate k should pass max(0.999, k^64), a quarter of the
 *  guaranteed 256-step exponent. */
inline PicardOutcome picard_iterate(const DomainDescriptor& d, const std::function<cvec(const cvec&)>& g, cvec z,
                                    double tol, long max_iter, double progress_bar = 0.999) {
  PicardOutcome out;
  double window_best = std::numeric_limits<double>::infinity();
  int since_progress = 0;
  for (long it = 0; it <= max_iter; ++it) {
    cvec gz = g(z);
    out.iterations = it;
    out.residual = (gz - z).norm();
    if (out.residual < tol) {
      out.point = std::move(z);
      out.converged = true;
      return out;
    }
    if (out.residual < progress_bar * window_best) {
      window_best = out.residual;
      since_progress = 0;
    } else if (++since_progress >= 256) {
      out.stalled = true;
      out.point = std::move(z);
      return out;
    }
    require(d.contains(gz), errc::hypothesis, "iteration left the domain; the map is not a self-map");
    z = std::move(gz);
  }
  out.point = std::move(z);
  return out;
}

}  // namespace detail

/** Contraction fixed point for a strict holomorphic self-map: the image gap r
 *  is estimated over a sample cloud, the diameter bound R from the bounding
 *  radius, and the iteration runs with the certified-rate cap derived from
 *  k = R/(R+r). */
inline FixedPointResult earle_hamilton(const HolomorphicMap& f, const DomainDescriptor& d, const cvec& z0,
                                       double tol = 1e-10, long max_iter = 100000, int samples = 4096) {
  require(f.arity() == d.dim() && f.dim() == d.dim(), errc::arity, "map/domain dimension mismatch");
  require(d.contains(z0), errc::domain, "start point is not interior");
  require(tol > 0, errc::invalid_argument, "tolerance must be positive");

  auto cloud = d.sample(samples, 17);
  cloud.push_back(z0);
  cloud.push_back(d.center());
  double r = std::numeric_limits<double>::infinity();
  for (const auto& s : cloud) {
    cvec img = f.eval(s);
    require(d.contains(img), errc::hypothesis, "image point escaped: the map is not compactly contained");
    r = std::min(r, d.boundary_gap(img));
  }
  require(r > 0, errc::hypothesis, "image touches the boundary: no strict containment certificate");
  double R = 2.0 * d.bounding_radius();
  double k = R / (R + r);

  FixedPointResult res;
  res.r_used = r;
  res.R_used = R;
  res.contraction_estimate = k;

  double step0 = (f.eval(z0) - z0).norm();
  long cap = max_iter;
  if (step0 > tol) {
    double bound = std::ceil(std::log(tol / step0) / std::log(k)) + 64;
    cap = std::min<long>(max_iter, static_cast<long>(std::max(bound, 64.0)));
  }
  auto g = [&](const cvec& z) -> cvec { return f.eval(z); };
  auto out = detail::picard_iterate(d, g, z0, tol, cap, std::max(0.999, std::pow(k, 64.0)));
  require(out.converged, errc::convergence,
          "fixed-point iteration missed tolerance after " + std::to_string(out.iterations) +
              " steps (residual " + std::to_string(out.residual) + ")");
  res.point = out.point;
  res.residual = out.residual;
  res.iterations = out.iterations;
  return res;
}

/** Fixed point of the damped map z -> a + lambda (f(z) - a) on a convex
 *  domain. The image gap (1-lambda) * boundary_gap(a) is exact by convexity,
 *  so no sampling is needed. */
inline cvec lambda_fixed_point(const HolomorphicMap& f, const DomainDescriptor& d, const cvec& a, double lambda,
                               double tol = 1e-10, long max_iter = 200000, long* iterations_out = nullptr,
                               const cvec* warm_start = nullptr) {
  require(f.arity() == d.dim() && f.dim() == d.dim(), errc::arity, "map/domain dimension mismatch");
  require(d.is_convex(), errc::hypothesis, "the damped family needs a declared-convex domain");
  require(d.contains(a), errc::domain, "anchor point is not interior");
  require(lambda >= 0 && lambda < 1, errc::invalid_argument, "lambda must lie in [0,1)");
  if (iterations_out) *iterations_out = 0;
  if (lambda == 0) return a;

  double r = (1.0 - lambda) * d.boundary_gap(a);
  double R = 2.0 * d.bounding_radius();
  double k = R / (R + r);
  auto g = [&](const cvec& z) -> cvec { return a + lambda * (f.eval(z) - a); };

  cvec start = warm_start ? *warm_start : a;
  if (!d.contains(start)) start = a;
  double step0 = (g(start) - start).norm();
  long cap = max_iter;
  if (step0 > tol) {
    double bound = std::ceil(std::log(tol / step0) / std::log(k)) + 64;
    cap = std::min<long>(max_iter, static_cast<long>(std::max(bound, 64.0)));
  }
  auto out = detail::picard_iterate(d, g, start, tol, cap, std::max(0.999, std::pow(k, 64.0)));
  if (iterations_out) *iterations_out = out.iterations;
  if (out.stalled && !out.converged) {
    // double precision cannot push the residual below ~ ulp/(1-lambda); a
    // stall at that scale is the best attainable value, not a failure
    double plateau = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + a.norm() + R) /
                     std::max(1.0 - lambda, 1e-18);
    if (out.residual <= plateau) return out.point;
  }
  require(out.converged, errc::convergence, "damped fixed-point iteration missed tolerance (lambda " +
                                                std::to_string(lambda) + ", residual " +
                                                std::to_string(out.residual) + ")");
  return out.point;
}

/** Retraction value lim_{lambda -> 1} of the damped fixed points, following
 *  the geometric schedule lambda_k = 1 - 2^{-k} with warm starts and a Cauchy
 *  stop. Iterates drifting to the boundary signal an empty fixed-point set.
 *  Each damped stage contracts at rate about lambda_k, so stage k costs on
 *  the order of 2^k map evaluations and roundoff caps the attainable stage
 *  point accuracy near eps / (1 - lambda_k); driving tol below ~1e-6 costs
 *  tens of millions of evaluations when f has a neutral direction at the
 *  limit. */
inline cvec retract_to_fix(const HolomorphicMap& f, const DomainDescriptor& d, const cvec& a, double tol = 1e-8,
                           long budget = 2000000, std::vector<double>* schedule_out = nullptr,
                           long* inner_iterations_out = nullptr) {
  require(d.contains(a), errc::domain, "anchor point is not interior");
  if ((f.eval(a) - a).norm() < tol) return a;  // already fixed: the family is constant in the limit

  cvec prev = a;
  long used = 0;
  double bdry_floor = std::max(1e-9, 1e-6 * d.bounding_radius());
  for (int k = 1; k <= 50; ++k) {
    require(used < budget, errc::budget, "retraction budget exhausted during the damped solves");
    double lambda = 1.0 - std::pow(2.0, -k);
    double inner_tol = std::max(0.5 * tol * (1.0 - lambda), 64.0 * std::numeric_limits<double>::epsilon());
    long inner = 0;
    cvec p = lambda_fixed_point(f, d, a, lambda, inner_tol, budget - used, &inner, &prev);
    used += inner;
    if (schedule_out) schedule_out->push_back(lambda);
    if (inner_iterations_out) *inner_iterations_out = used;
    if (d.boundary_gap(p) < bdry_floor)
      fail(errc::convergence, "damped fixed points approach the boundary; the fixed-point set appears empty");
    double diff = (p - prev).norm();
    prev = p;
    if (k >= 2 && diff < tol && (f.eval(p) - p).norm() < 10.0 * tol) return p;
  }
  fail(errc::budget, "lambda schedule exhausted before the Cauchy criterion held");
}

/** Eigenstructure of f'(a) at a fixed point: dimension of the fixed-point set
 *  equals the geometric multiplicity of the eigenvalue 1. */
inline FixDimensionReport fix_dimension(const HolomorphicMap& f, const cvec& a, double eig_tol = 1e-8) {
  require(f.arity() == f.dim(), errc::arity, "fix_dimension needs a self-map shape");
  require((f.eval(a) - a).norm() < 1e-8, errc::hypothesis, "base point is not fixed to 1e-8");
  FixDimensionReport rep;
  rep.base = a;
  rep.jacobian = f.jacobian(a);
  const int n = f.dim();

  Eigen::ComplexEigenSolver<cmat> es(rep.jacobian);
  require(es.info() == Eigen::Success, errc::convergence, "eigendecomposition failed");
  for (int j = 0; j < n; ++j) rep.eigenvalues.push_back(es.eigenvalues()[j]);

  int algebraic = 0;
  for (cplx ev : rep.eigenvalues)
    if (std::abs(ev - cplx(1, 0)) < std::max(eig_tol, 1e-12)) ++algebraic;

  cmat shifted = rep.jacobian - cmat::Identity(n, n);
  Eigen::JacobiSVD<cmat> svd(shifted, Eigen::ComputeFullV);
  double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  double cut = std::max(eig_tol, 1e-12) * std::max(1.0, smax);
  int rank = 0;
  for (int j = 0; j < svd.singularValues().size(); ++j)
    if (svd.singularValues()[j] > cut) ++rank;
  rep.dim = n - rank;
  for (int j = rank; j < n; ++j) rep.eigenbasis.push_back(svd.matrixV().col(j));
  rep.defective = algebraic > rep.dim;
  return rep;
}

/** Damped-Newton sweep for fixed points from sampled starts, deduplicated by
 *  cluster radius and annotated with the local eigenstructure. */
inline std::vector<std::pair<cvec, FixDimensionReport>> fix_scan(const HolomorphicMap& f, const DomainDescriptor& d,
                                                                 int grid_count = 64, uint64_t seed = 0,
                                                                 double tol = 1e-10) {
  require(f.arity() == d.dim() && f.dim() == d.dim(), errc::arity, "map/domain dimension mismatch");
  auto starts = d.sample(grid_count, seed);
  starts.push_back(d.center());

  auto F = [&](const cvec& z) -> cvec { return f.eval(z) - z; };
  auto J = [&](const cvec& z) -> cmat { return f.jacobian(z) - cmat::Identity(d.dim(), d.dim()); };
  NewtonOptions opt;
  opt.tol = tol;
  opt.max_iter = 120;

  std::vector<cvec> found;
  for (const auto& s : starts) {
    try {
      auto out = damped_newton(F, J, s, opt);
      if (!out.converged) continue;
      if (!d.contains(out.point)) continue;
      if ((f.eval(out.point) - out.point).norm() > 100 * tol) continue;
      bool dup = false;
      for (const auto& p : found)
        if ((p - out.point).norm() < 1e-5) {
          dup = true;
          break;
        }
      if (!dup) found.push_back(out.point);
    } catch (const error&) {
      continue;  // divergent start; the sweep is best-effort
    }
  }
  std::sort(found.begin(), found.end(), [](const cvec& a, const cvec& b) {
    for (int j = 0; j < a.size(); ++j) {
      if (a[j].real() != b[j].real()) return a[j].real() < b[j].real();
      if (a[j].imag() != b[j].imag()) return a[j].imag() < b[j].imag();
    }
    return false;
  });

  std::vector<std::pair<cvec, FixDimensionReport>> out;
  for (const auto& p : found) out.emplace_back(p, fix_dimension(f, p));
  return out;
}

/** Iterate-power retraction: evaluates f^{2m}(z) with m doubling until both
 *  the doubling step and one extra application stabilize. Non-stabilizing
 *  orbits (rotations) are reported through the diagnostics, not silently. */
inline RetractionApprox iterate_limit_retraction(const HolomorphicMap& f, const DomainDescriptor& d, const cvec& a,
                                                 long budget = 4096, double tol = 1e-9) {
  require(f.arity() == d.dim() && f.dim() == d.dim(), errc::arity, "map/domain dimension mismatch");
  require((f.eval(a) - a).norm() < tol, errc::hypothesis, "anchor point must be fixed to tolerance");
  RetractionApprox ra;
  ra.diagnostics = std::make_shared<RetractionDiagnostics>();
  auto diag = ra.diagnostics;
  ra.eval = [f, d, budget, tol, diag](const cvec& z) -> cvec {
    auto guard = [&](const cvec& p) { return d.contains(p); };
    diag->stabilized = false;
    diag->power_used = 0;
    cvec u = f.iterate(z, 1, guard);
    long m = 1;
    while (2 * m <= budget) {
      cvec v = f.iterate(u, static_cast<int>(m), guard);  // v = f^{2m}(z)
      diag->power_used = 2 * m;
      cvec fv = f.eval(v);
      if ((v - u).norm() < tol && (fv - v).norm() < tol) {
        diag->stabilized = true;
        return v;
      }
      u = std::move(v);
      m *= 2;
    }
    return u;  // diagnostic: not stabilized within budget
  };
  return ra;
}

}  // namespace holo
