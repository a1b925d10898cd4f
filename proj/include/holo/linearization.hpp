#pragma once
// Linearizing charts at fixed points: the explicit chart attached to a
// holomorphic retraction, iterate- and group-averaged charts that conjugate
// a map to its derivative, and the circle-average extraction of the linear
// part of a self-map of a circled domain.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "holo/common.hpp"
#include "holo/domains.hpp"
#include "holo/expr.hpp"
#include "holo/numerics.hpp"

namespace holo {

namespace detail {

/** Deterministic cloud around z0 with each coordinate offset in a disc. */
inline std::vector<cvec> probe_cloud(const cvec& z0, double radius, int count, unsigned seed = 0) {
  rng gen(seed);
  std::vector<cvec> out;
  out.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    cvec z = z0;
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] += gen.disc_point(radius);
    out.push_back(std::move(z));
  }
  return out;
}

}  // namespace detail

/** Local chart u with u(base) = 0 and u'(base) = id, carrying the linear map
 *  it conjugates to and the largest conjugacy error observed on the probe
 *  cloud used during construction. */
struct ChartApprox {
  std::function<cvec(const cvec&)> forward;
  std::function<cmat(const cvec&)> forward_jacobian;
  cvec base;
  cmat linear_part;
  double conjugacy_defect = 0.0;

  cvec eval(const cvec& z) const { return forward(z); }

  /** Inverse by damped Newton on u(z) = w with the exact chart Jacobian,
   *  started at the base point. Valid for w in the chart's local range. */
  cvec inverse(const cvec& w, double tol = 1e-12, int max_steps = 64) const {
    cvec z = base;
    cvec r = forward(z) - w;
    for (int k = 0; k < max_steps && r.norm() > tol; ++k) {
      cvec step = forward_jacobian(z).partialPivLu().solve(r);
      double t = 1.0;
      bool moved = false;
      for (int h = 0; h < 40; ++h, t *= 0.5) {
        cvec zt = z - t * step;
        cvec rt = forward(zt) - w;
        if (rt.norm() < r.norm()) {
          z = std::move(zt);
          r = std::move(rt);
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    require(r.norm() <= std::max(tol, 1e-10), errc::convergence, "chart inverse did not converge");
    return z;
  }
};

/** Chart linearizing a holomorphic retraction rho near a fixed point z0 of
 *  its image: u = id + (2 P1 - id) o (rho - P1) in coordinates centered at
 *  z0, where P1 = rho'(z0) must be idempotent. Satisfies u o rho = P1 o u,
 *  so the retraction becomes the linear projector P1 in the chart. */
inline ChartApprox cartan_chart(const HolomorphicMap& rho, const cvec& z0, double probe_radius = 0.05,
                                int probe_count = 64) {
  require(rho.dim() == rho.arity(), errc::arity, "retraction must be a self-map shape");
  require(static_cast<int>(z0.size()) == rho.arity(), errc::arity, "base point dimension mismatch");
  require((rho.eval(z0) - z0).norm() < 1e-10, errc::hypothesis, "base point is not fixed by the map");
  const int n = rho.dim();
  cmat P1 = rho.jacobian(z0);
  require((P1 * P1 - P1).norm() < 1e-8, errc::hypothesis,
          "linear part at the base point is not idempotent; the map is not a retraction");

  auto cloud = detail::probe_cloud(z0, probe_radius, probe_count, 3);
  double retr_defect = 0.0;
  int usable = 0;
  for (const cvec& z : cloud) {
    try {
      cvec rz = rho.eval(z);
      retr_defect = std::max(retr_defect, (rho.eval(rz) - rz).norm());
      ++usable;
    } catch (const error&) {
      // probe outside the evaluation region; skipped
    }
  }
  require(usable > 0, errc::domain, "no probe point was evaluable near the base point");
  require(retr_defect < 1e-8, errc::hypothesis, "map is not idempotent on the probe cloud");

  cmat refl = 2.0 * P1 - cmat::Identity(n, n);
  auto fwd = [rho, z0, P1, refl](const cvec& z) -> cvec {
    return (z - z0) + refl * ((rho.eval(z) - z0) - P1 * (z - z0));
  };
  auto jac = [rho, P1, refl, n](const cvec& z) -> cmat {
    return cmat::Identity(n, n) + refl * (rho.jacobian(z) - P1);
  };
  ChartApprox chart{std::move(fwd), std::move(jac), z0, P1, 0.0};
  for (const cvec& z : cloud) {
    try {
      chart.conjugacy_defect =
          std::max(chart.conjugacy_defect, (chart.forward(rho.eval(z)) - P1 * chart.forward(z)).norm());
    } catch (const error&) {
    }
  }
  return chart;
}

/** Averaged chart phi_n(z) = (1/n) sum_{p<n} A^{-p} (f^p(z) - a) at a fixed
 *  point a of f with A = f'(a) invertible. For f an automorphism near a the
 *  conjugacy error phi_n o f - A phi_n decays like 1/n; the observed probe
 *  maximum is recorded in conjugacy_defect. */
inline ChartApprox iterate_average_chart(const HolomorphicMap& f, const cvec& a, int n, double probe_radius = 0.05,
                                         int probe_count = 64) {
  require(n >= 1, errc::domain, "average length must be positive");
  require(f.dim() == f.arity(), errc::arity, "map must be a self-map shape");
  require(static_cast<int>(a.size()) == f.arity(), errc::arity, "base point dimension mismatch");
  require((f.eval(a) - a).norm() < 1e-10, errc::hypothesis, "base point is not fixed by the map");
  const int dim = f.dim();
  cmat A = f.jacobian(a);
  Eigen::FullPivLU<cmat> lu(A);
  require(lu.isInvertible(), errc::hypothesis, "derivative at the base point is singular");
  cmat Ainv = lu.inverse();

  auto fwd = [f, a, Ainv, n, dim](const cvec& z) -> cvec {
    cvec acc = cvec::Zero(dim);
    cvec zp = z;
    cmat Minv = cmat::Identity(dim, dim);
    for (int p = 0; p < n; ++p) {
      acc += Minv * (zp - a);
      if (p + 1 < n) {
        zp = f.eval(zp);
        Minv = Ainv * Minv;
      }
    }
    return acc / static_cast<double>(n);
  };
  auto jac = [f, Ainv, n, dim](const cvec& z) -> cmat {
    cmat acc = cmat::Zero(dim, dim);
    cvec zp = z;
    cmat Minv = cmat::Identity(dim, dim);
    cmat chain = cmat::Identity(dim, dim);
    for (int p = 0; p < n; ++p) {
      acc += Minv * chain;
      if (p + 1 < n) {
        chain = f.jacobian(zp) * chain;
        zp = f.eval(zp);
        Minv = Ainv * Minv;
      }
    }
    return acc / static_cast<double>(n);
  };
  ChartApprox chart{std::move(fwd), std::move(jac), a, A, 0.0};

  int usable = 0;
  for (const cvec& z : detail::probe_cloud(a, probe_radius, probe_count, 5)) {
    try {
      chart.conjugacy_defect =
          std::max(chart.conjugacy_defect, (chart.forward(f.eval(z)) - A * chart.forward(z)).norm());
      ++usable;
    } catch (const error&) {
      // orbit left the evaluation region; probe dropped
    }
  }
  require(usable > 0, errc::domain, "every probe orbit left the evaluation region");
  return chart;
}

/** Uniform-average chart phi(z) = (1/|G|) sum_g g'(a)^{-1} (g(z) - a) for a
 *  finite group of maps fixing a. Conjugates every member simultaneously:
 *  phi o g = g'(a) o phi. Closure of the list under composition is checked
 *  on probes; linear_part of the result is the identity (= phi'(a)). */
inline ChartApprox finite_group_average_chart(const std::vector<HolomorphicMap>& maps, const cvec& a,
                                              double probe_radius = 0.05, int probe_count = 16) {
  require(!maps.empty(), errc::domain, "map list is empty");
  const int dim = maps.front().dim();
  for (const auto& g : maps) {
    require(g.dim() == dim && g.arity() == dim, errc::arity, "group elements must share a self-map shape");
    require((g.eval(a) - a).norm() < 1e-10, errc::hypothesis, "every group element must fix the base point");
  }
  auto cloud = detail::probe_cloud(a, probe_radius, probe_count, 7);

  for (const auto& g : maps) {
    for (const auto& h : maps) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& m : maps) {
        double dev = 0.0;
        for (const cvec& z : cloud) dev = std::max(dev, (g.eval(h.eval(z)) - m.eval(z)).norm());
        best = std::min(best, dev);
      }
      require(best < 1e-8, errc::hypothesis, "compositions leave the list; the maps do not form a group");
    }
  }

  std::vector<cmat> deriv, deriv_inv;
  for (const auto& g : maps) {
    cmat Ag = g.jacobian(a);
    Eigen::FullPivLU<cmat> lu(Ag);
    require(lu.isInvertible(), errc::hypothesis, "group element has singular derivative at the base point");
    deriv.push_back(Ag);
    deriv_inv.push_back(lu.inverse());
  }

  const double scale = 1.0 / static_cast<double>(maps.size());
  auto fwd = [maps, a, deriv_inv, dim, scale](const cvec& z) -> cvec {
    cvec acc = cvec::Zero(dim);
    for (size_t k = 0; k < maps.size(); ++k) acc += deriv_inv[k] * (maps[k].eval(z) - a);
    return scale * acc;
  };
  auto jac = [maps, deriv_inv, dim, scale](const cvec& z) -> cmat {
    cmat acc = cmat::Zero(dim, dim);
    for (size_t k = 0; k < maps.size(); ++k) acc += deriv_inv[k] * maps[k].jacobian(z);
    return scale * acc;
  };
  ChartApprox chart{std::move(fwd), std::move(jac), a, cmat::Identity(dim, dim), 0.0};
  for (size_t k = 0; k < maps.size(); ++k) {
    for (const cvec& z : cloud) {
      chart.conjugacy_defect = std::max(
          chart.conjugacy_defect, (chart.forward(maps[k].eval(z)) - deriv[k] * chart.forward(z)).norm());
    }
  }
  return chart;
}

/** Circle average of a self-map of a circled domain fixing the origin. */
struct CircledLinearPart {
  cmat linear;        // degree-1 coefficient of theta -> f(e^{i theta} z)
  double defect;      // max ||f(z) - linear z|| over the sample cloud
  int nodes;          // node count at which the quadrature stabilized
};

/** Extracts the linear part L of f via the periodic trapezoid rule applied
 *  to (1/2pi) integral of f(e^{i theta} z) e^{-i theta} d theta, column by
 *  column; nodes are doubled until L stabilizes. For f the restriction of a
 *  linear automorphism the defect vanishes to quadrature accuracy; a large
 *  defect certifies that f is not linear. */
inline CircledLinearPart circled_linear_part(const HolomorphicMap& f, int nodes = 256,
                                             const std::vector<double>& radii = {0.25, 0.5}) {
  require(f.dim() == f.arity(), errc::arity, "map must be a self-map shape");
  require(!radii.empty(), errc::domain, "radius grid is empty");
  const int n = f.dim();
  require(f.eval(cvec::Zero(n)).norm() < 1e-10, errc::hypothesis, "map must fix the origin");
  double r = *std::max_element(radii.begin(), radii.end());
  require(r > 0.0, errc::domain, "radii must be positive");

  auto extract = [&](int count) -> cmat {
    cmat L(n, n);
    for (int k = 0; k < n; ++k) {
      cvec col = cvec::Zero(n);
      for (int j = 0; j < count; ++j) {
        cplx w = std::polar(1.0, 2.0 * M_PI * j / count);
        cvec z = cvec::Zero(n);
        z[k] = r * w;
        col += f.eval(z) * std::conj(w);
      }
      L.col(k) = col / (static_cast<double>(count) * r);
    }
    return L;
  };

  int used = std::max(nodes, 4);
  cmat L = extract(used);
  while (used < 8192) {
    cmat L2 = extract(2 * used);
    double dev = (L2 - L).norm();
    L = std::move(L2);
    used *= 2;
    if (dev <= 1e-13 * std::max(1.0, L.norm())) break;
  }

  double defect = 0.0;
  rng gen(11);
  for (double rad : radii) {
    for (int k = 0; k < n; ++k) {
      cvec z = cvec::Zero(n);
      z[k] = rad;
      defect = std::max(defect, (f.eval(z) - L * z).norm());
    }
    for (int s = 0; s < 32; ++s) {
      cvec z(n);
      for (int j = 0; j < n; ++j) z[j] = gen.disc_point(rad);
      defect = std::max(defect, (f.eval(z) - L * z).norm());
    }
  }
  return {std::move(L), defect, used};
}

/** Max probe residual ||f(z) - z|| for a map with f(a) = a and f'(a) = id.
 *  For a true holomorphic self-map of a bounded domain this must vanish
 *  identically, so a nonzero residual certifies that the self-map hypothesis
 *  fails. Probes mix interior samples with points pushed close to the
 *  boundary along rays from a; if some image escapes the domain (or is not
 *  evaluable) the optional self_map_ok flag is cleared. */
inline double cartan_uniqueness_residual(const HolomorphicMap& f, const DomainDescriptor& d, const cvec& a,
                                         int samples = 200, unsigned seed = 0, bool* self_map_ok = nullptr) {
  require(f.dim() == f.arity() && f.dim() == d.dim(), errc::arity, "map and domain dimensions must match");
  require(d.contains(a), errc::domain, "base point is not interior");
  require((f.eval(a) - a).norm() < 1e-10, errc::hypothesis, "base point is not fixed by the map");
  const int n = d.dim();
  require((f.jacobian(a) - cmat::Identity(n, n)).norm() < 1e-8, errc::hypothesis,
          "derivative at the base point is not the identity");

  rng gen(seed);
  std::vector<cvec> cloud;
  cloud.reserve(static_cast<size_t>(samples) + 96);
  const double R = d.bounding_radius();
  for (int k = 0, tries = 0; k < samples && tries < 50 * samples; ++tries) {
    cvec z = d.center();
    for (int j = 0; j < n; ++j) z[j] += gen.disc_point(R);
    if (!d.contains(z)) continue;
    cloud.push_back(std::move(z));
    ++k;
  }
  for (int k = 0; k < 32; ++k) {
    cvec dir(n);
    for (int j = 0; j < n; ++j) dir[j] = gen.unit();
    dir /= dir.norm();
    double reach = bisect_largest([&](double t) -> bool { return d.contains(a + t * dir); }, 2.0 * R, 1e-9);
    for (double frac : {0.9, 0.99, 0.999}) {
      cvec z = a + (frac * reach) * dir;
      if (d.contains(z)) cloud.push_back(std::move(z));
    }
  }
  require(!cloud.empty(), errc::domain, "no interior probe could be sampled");

  double residual = 0.0;
  bool ok = true;
  for (const cvec& z : cloud) {
    try {
      cvec fz = f.eval(z);
      residual = std::max(residual, (fz - z).norm());
      if (!d.contains(fz)) ok = false;
    } catch (const error&) {
      ok = false;
    }
  }
  if (self_map_ok) *self_map_ok = ok;
  return residual;
}

}  // namespace holo
