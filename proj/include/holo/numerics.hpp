#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <vector>

#include "holo/common.hpp"

namespace holo {

struct QuadratureRule {
  std::vector<double> nodes;    // on [0,1]
  std::vector<double> weights;  // summing to 1
};

/** Gauss-Legendre rule mapped to [0,1]; nodes by Newton on the recurrence. */
inline QuadratureRule gauss_legendre(int n) {
  require(n >= 1 && n <= 4096, errc::invalid_argument, "unsupported quadrature order");
  QuadratureRule q;
  q.nodes.resize(static_cast<size_t>(n));
  q.weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p1 = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      p1 = 1.0;
      double p2 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * k + 1.0) * x * p2 - k * p3) / (k + 1.0);
      }
      dp = n * (x * p1 - p2) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[static_cast<size_t>(i)] = 0.5 * (1.0 - x);  // reversed to ascending order
    q.weights[static_cast<size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

/** Budgeted derivative-free simplex minimizer (deterministic given the start).
 *  Returns the best point found; `evals` reports consumed objective calls. */
struct SimplexResult {
  rvec point;
  double value = std::numeric_limits<double>::infinity();
  long evals = 0;
};

inline SimplexResult nelder_mead(const std::function<double(const rvec&)>& F, rvec start, double step, long budget,
                                 double ftol = 0.0) {
  const int m = static_cast<int>(start.size());
  SimplexResult res;
  if (m == 0) {
    res.point = start;
    res.value = F(start);
    res.evals = 1;
    return res;
  }
  std::vector<rvec> x(static_cast<size_t>(m + 1), start);
  std::vector<double> f(static_cast<size_t>(m + 1));
  auto eval = [&](const rvec& p) {
    ++res.evals;
    return F(p);
  };
  f[0] = eval(x[0]);
  for (int j = 0; j < m; ++j) {
    x[static_cast<size_t>(j + 1)][j] += step;
    f[static_cast<size_t>(j + 1)] = eval(x[static_cast<size_t>(j + 1)]);
  }
  auto order = [&] {
    for (size_t i = 1; i < x.size(); ++i) {
      rvec px = x[i];
      double pf = f[i];
      size_t k = i;
      while (k > 0 && f[k - 1] > pf) {
        x[k] = x[k - 1];
        f[k] = f[k - 1];
        --k;
      }
      x[k] = px;
      f[k] = pf;
    }
  };
  order();
  while (res.evals < budget) {
    if (f[static_cast<size_t>(m)] - f[0] <= ftol) break;
    rvec centroid = rvec::Zero(m);
    for (int i = 0; i < m; ++i) centroid += x[static_cast<size_t>(i)];
    centroid /= static_cast<double>(m);
    rvec xr = centroid + (centroid - x[static_cast<size_t>(m)]);
    double fr = eval(xr);
    if (fr < f[0]) {
      rvec xe = centroid + 2.0 * (centroid - x[static_cast<size_t>(m)]);
      double fe = eval(xe);
      if (fe < fr) {
        x[static_cast<size_t>(m)] = xe;
        f[static_cast<size_t>(m)] = fe;
      } else {
        x[static_cast<size_t>(m)] = xr;
        f[static_cast<size_t>(m)] = fr;
      }
    } else if (fr < f[static_cast<size_t>(m - 1)]) {
      x[static_cast<size_t>(m)] = xr;
      f[static_cast<size_t>(m)] = fr;
    } else {
      rvec xc = centroid + 0.5 * (x[static_cast<size_t>(m)] - centroid);
      double fc = eval(xc);
      if (fc < f[static_cast<size_t>(m)]) {
        x[static_cast<size_t>(m)] = xc;
        f[static_cast<size_t>(m)] = fc;
      } else {
        for (int i = 1; i <= m; ++i) {
          x[static_cast<size_t>(i)] = x[0] + 0.5 * (x[static_cast<size_t>(i)] - x[0]);
          f[static_cast<size_t>(i)] = eval(x[static_cast<size_t>(i)]);
          if (res.evals >= budget) break;
        }
      }
    }
    order();
  }
  res.point = x[0];
  res.value = f[0];
  return res;
}

/** Largest t in [0, hi] with pred(t) true, assuming pred(0); bisection to xtol. */
inline double bisect_largest(const std::function<bool(double)>& pred, double hi, double xtol) {
  require(hi > 0, errc::invalid_argument, "empty bisection interval");
  if (pred(hi)) return hi;
  double lo = 0.0;
  while (hi - lo > xtol) {
    double mid = 0.5 * (lo + hi);
    (pred(mid) ? lo : hi) = mid;
  }
  return lo;
}

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 80;
  double sv_floor = 1e-10;  // singular values below floor * sigma_max are dropped
};

struct NewtonResult {
  cvec point;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/** Damped Newton for F(z) = 0 with pseudo-inverse steps: singular directions
 *  (e.g. along a fixed-point manifold) are removed instead of amplified. */
inline NewtonResult damped_newton(const std::function<cvec(const cvec&)>& F, const std::function<cmat(const cvec&)>& J,
                                  cvec z0, const NewtonOptions& opt = {}) {
  NewtonResult r;
  r.point = std::move(z0);
  cvec Fz;
  try {
    Fz = F(r.point);
  } catch (const error&) {
    return r;
  }
  r.residual = Fz.norm();
  for (int it = 0; it < opt.max_iter; ++it) {
    if (r.residual < opt.tol) {
      r.converged = true;
      return r;
    }
    cmat Jz;
    try {
      Jz = J(r.point);
    } catch (const error&) {
      return r;
    }
    Eigen::JacobiSVD<cmat> svd(Jz, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double smax = sv.size() ? sv[0] : 0.0;
    if (smax <= 0.0) return r;
    cvec tmp = svd.matrixU().adjoint() * Fz;
    for (int k = 0; k < sv.size(); ++k) tmp[k] = sv[k] > opt.sv_floor * smax ? tmp[k] / sv[k] : cplx(0, 0);
    cvec step = svd.matrixV() * tmp;
    double damping = 1.0;
    bool accepted = false;
    for (int half = 0; half < 30; ++half) {
      cvec cand = r.point - damping * step;
      cvec Fc;
      try {
        Fc = F(cand);
      } catch (const error&) {
        damping *= 0.5;
        continue;
      }
      double rc = Fc.norm();
      if (rc < r.residual) {
        r.point = cand;
        Fz = Fc;
        r.residual = rc;
        accepted = true;
        break;
      }
      damping *= 0.5;
    }
    ++r.iterations;
    if (!accepted) return r;
  }
  r.converged = r.residual < opt.tol;
  return r;
}

}  // namespace holo
