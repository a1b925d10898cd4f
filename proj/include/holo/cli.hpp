#pragma once
// Command-line front end: flag parsing, job dispatch, and report assembly.
// Structured results go to JSON (one document per run), sweeps to CSV with
// an error column so a failing grid row does not abort the run.

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "holo/domains.hpp"
#include "holo/expr.hpp"
#include "holo/fixed_points.hpp"
#include "holo/geodesics.hpp"
#include "holo/invariant_metrics.hpp"
#include "holo/linearization.hpp"

namespace holo::cli {

using json = nlohmann::ordered_json;

struct JobSpec {
  std::string command;
  std::string domain_text;
  std::string map_text;
  std::string from_text, to_text, point_text, vector_text;
  double tol = 1e-8;
  long budget = 20000;
  int degree = 6;
  unsigned long seed = 0;
  std::string out_path;
  bool no_timestamp = false;
  int average = 0;        // linearize: iterate-average chart length (0 = retraction chart)
  std::string kind;       // sweep family: lambda | omega | average-defect
  std::string grid_text;  // comma list or start:stop:count
};

namespace detail {

inline json num_pair(cplx z) { return json::array({z.real(), z.imag()}); }

inline json vec_json(const cvec& v) {
  json a = json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) a.push_back(num_pair(v[j]));
  return a;
}

inline json mat_json(const cmat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(num_pair(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

/** Components are full constant expressions, so "0.3, 0.1+0.2*i" works. */
inline cvec parse_components(const std::string& text, const std::string& flag) {
  require(!text.empty(), errc::invalid_argument, "missing required flag " + flag);
  auto m = parse_map(text, 0);
  return m.eval(cvec(0));
}

inline std::string iso_timestamp() {
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

inline std::vector<double> parse_grid(const std::string& text) {
  require(!text.empty(), errc::invalid_argument, "sweep needs --grid");
  std::vector<double> vals;
  if (text.find(':') != std::string::npos) {
    double start = 0, stop = 0;
    long count = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    in >> start >> c1 >> stop >> c2 >> count;
    require(!in.fail() && c1 == ':' && c2 == ':' && count >= 1, errc::parse,
            "grid range must be start:stop:count");
    for (long k = 0; k < count; ++k)
      vals.push_back(count == 1 ? start : start + (stop - start) * static_cast<double>(k) / (count - 1));
    return vals;
  }
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    require(!item.empty(), errc::parse, "empty grid entry");
    vals.push_back(std::stod(item));
  }
  require(!vals.empty(), errc::invalid_argument, "empty grid");
  return vals;
}

inline void emit(const JobSpec& job, const std::string& text) {
  if (job.out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream f(job.out_path);
    require(f.good(), errc::invalid_argument, "cannot open output path " + job.out_path);
    f << text << "\n";
  }
}

inline json header(const JobSpec& job) {
  json r;
  r["command"] = job.command;
  if (!job.domain_text.empty()) r["domain"] = job.domain_text;
  if (!job.map_text.empty()) r["map"] = job.map_text;
  r["tol"] = job.tol;
  r["budget"] = job.budget;
  r["degree"] = job.degree;
  r["seed"] = job.seed;
  if (!job.no_timestamp) r["timestamp"] = iso_timestamp();
  return r;
}

inline DomainDescriptor need_domain(const JobSpec& job) {
  require(!job.domain_text.empty(), errc::invalid_argument, "missing required flag --domain");
  return DomainDescriptor::parse(job.domain_text);
}

inline HolomorphicMap need_map(const JobSpec& job, int arity) {
  require(!job.map_text.empty(), errc::invalid_argument, "missing required flag --map");
  return parse_map(job.map_text, arity);
}

inline json disc_json(const AnalyticDisc& disc) {
  json d;
  json coeffs = json::array();
  for (const cvec& c : disc.coefficients()) coeffs.push_back(vec_json(c));
  d["coefficients"] = std::move(coeffs);
  json roots = json::array();
  for (cplx a : disc.den_roots()) roots.push_back(num_pair(a));
  d["den_roots"] = std::move(roots);
  d["containment_margin"] = disc.containment_margin();
  return d;
}

inline json run_distance(const JobSpec& job) {
  auto d = need_domain(job);
  cvec a = parse_components(job.from_text, "--from");
  cvec b = parse_components(job.to_text, "--to");
  auto est = distance_bracket(d, a, b, job.tol, job.budget);
  json r = header(job);
  r["from"] = vec_json(a);
  r["to"] = vec_json(b);
  r["lower"] = est.lower;
  r["upper"] = est.upper;
  r["gap"] = est.upper - est.lower;
  r["converged"] = est.converged;
  if (!est.note.empty()) r["note"] = est.note;
  r["functional"] = est.lower_witness.describe();
  r["zeta_from"] = num_pair(est.upper_witness.zeta_z);
  r["zeta_to"] = num_pair(est.upper_witness.zeta_w);
  return r;
}

inline json run_metric(const JobSpec& job) {
  auto d = need_domain(job);
  cvec z = parse_components(job.point_text, "--point");
  cvec v = parse_components(job.vector_text, "--vector");
  json r = header(job);
  r["point"] = vec_json(z);
  r["vector"] = vec_json(v);
  r["lower"] = caratheodory_inf_metric(d, z, v, job.budget);
  r["upper"] = kobayashi_inf_metric(d, z, v, job.degree, job.budget);
  return r;
}

inline json run_fixpoint(const JobSpec& job) {
  auto d = need_domain(job);
  auto f = need_map(job, d.dim());
  cvec z0 = job.point_text.empty() ? d.center() : parse_components(job.point_text, "--point");
  auto res = earle_hamilton(f, d, z0, job.tol, job.budget);
  json r = header(job);
  r["point"] = vec_json(res.point);
  r["residual"] = res.residual;
  r["iterations"] = res.iterations;
  r["contraction_estimate"] = res.contraction_estimate;
  return r;
}

inline json run_retract(const JobSpec& job) {
  auto d = need_domain(job);
  auto f = need_map(job, d.dim());
  cvec a = parse_components(job.point_text, "--point");
  std::vector<double> schedule;
  long inner = 0;
  cvec p = retract_to_fix(f, d, a, job.tol, job.budget, &schedule, &inner);
  json r = header(job);
  r["anchor"] = vec_json(a);
  r["point"] = vec_json(p);
  r["residual"] = (f.eval(p) - p).norm();
  r["lambda_schedule"] = schedule;
  r["inner_iterations"] = inner;
  return r;
}

inline json run_scan(const JobSpec& job) {
  auto d = need_domain(job);
  auto f = need_map(job, d.dim());
  auto found = fix_scan(f, d, 80, job.seed);
  json r = header(job);
  json clusters = json::array();
  for (const auto& [p, rep] : found) {
    json c;
    c["point"] = vec_json(p);
    c["dim"] = rep.dim;
    c["residual"] = (f.eval(p) - p).norm();
    c["defective"] = rep.defective;
    clusters.push_back(std::move(c));
  }
  r["clusters"] = std::move(clusters);
  return r;
}

inline json run_linearize(const JobSpec& job) {
  cvec a = parse_components(job.point_text, "--point");
  auto f = need_map(job, static_cast<int>(a.size()));
  ChartApprox chart =
      job.average > 0 ? iterate_average_chart(f, a, job.average) : cartan_chart(f, a);
  json r = header(job);
  r["base"] = vec_json(chart.base);
  r["linear_part"] = mat_json(chart.linear_part);
  r["conjugacy_defect"] = chart.conjugacy_defect;
  if (job.average > 0) r["average_length"] = job.average;
  return r;
}

inline json run_geodesic(const JobSpec& job) {
  auto d = need_domain(job);
  cvec a = parse_components(job.from_text, "--from");
  cvec b = parse_components(job.to_text, "--to");
  auto g = geodesic_search(d, a, b, job.degree, job.budget, std::max(job.tol, 1e-10));
  json r = header(job);
  r["from"] = vec_json(a);
  r["to"] = vec_json(b);
  r["verified"] = g.verified;
  r["defect"] = g.defect;
  r["lower"] = g.lower;
  r["upper"] = g.upper;
  r["zeta_from"] = num_pair(g.zeta_a);
  r["zeta_to"] = num_pair(g.zeta_b);
  r["disc"] = disc_json(g.disc);
  r["certificate"] = g.certificate.describe();
  return r;
}

inline json run_extreme(const JobSpec& job) {
  auto d = need_domain(job);
  cvec x = parse_components(job.point_text, "--point");
  auto rep = complex_extreme_test(d, x, job.budget);
  json r = header(job);
  r["point"] = vec_json(x);
  r["is_extreme"] = rep.is_extreme;
  if (!rep.is_extreme) {
    r["witness"] = vec_json(rep.witness);
    r["witness_norm"] = rep.witness_norm;
    r["slack"] = rep.slack;
  }
  return r;
}

inline std::string run_sweep(const JobSpec& job) {
  auto grid = parse_grid(job.grid_text);
  std::ostringstream csv;
  if (job.kind == "omega") {
    csv << "r,omega,error\n";
    for (double r : grid) {
      csv << format_number(r) << ",";
      try {
        csv << format_number(poincare_distance(cplx(0, 0), cplx(r, 0))) << ",";
      } catch (const error& e) {
        csv << "," << csv_quote(e.what());
      }
      csv << "\n";
    }
  } else if (job.kind == "lambda") {
    auto d = need_domain(job);
    auto f = need_map(job, d.dim());
    cvec a = parse_components(job.point_text, "--point");
    csv << "lambda";
    for (int j = 0; j < d.dim(); ++j) csv << ",re" << j << ",im" << j;
    csv << ",error\n";
    for (double lam : grid) {
      csv << format_number(lam);
      try {
        cvec p = lambda_fixed_point(f, d, a, lam, job.tol);
        for (Eigen::Index j = 0; j < p.size(); ++j)
          csv << "," << format_number(p[j].real()) << "," << format_number(p[j].imag());
        csv << ",";
      } catch (const error& e) {
        for (int j = 0; j < d.dim(); ++j) csv << ",,";
        csv << "," << csv_quote(e.what());
      }
      csv << "\n";
    }
  } else if (job.kind == "average-defect") {
    cvec a = parse_components(job.point_text, "--point");
    auto f = need_map(job, static_cast<int>(a.size()));
    csv << "n,defect,error\n";
    for (double nv : grid) {
      int n = static_cast<int>(nv);
      csv << n << ",";
      try {
        csv << format_number(iterate_average_chart(f, a, n).conjugacy_defect) << ",";
      } catch (const error& e) {
        csv << "," << csv_quote(e.what());
      }
      csv << "\n";
    }
  } else {
    fail(errc::invalid_argument, "unknown sweep kind '" + job.kind + "' (expected lambda, omega, or average-defect)");
  }
  return csv.str();
}

inline int run(const JobSpec& job) {
  if (job.command == "sweep") {
    std::string csv = run_sweep(job);
    // CSV already ends with a newline per row
    if (job.out_path.empty()) {
      std::cout << csv;
    } else {
      std::ofstream f(job.out_path);
      require(f.good(), errc::invalid_argument, "cannot open output path " + job.out_path);
      f << csv;
    }
    return 0;
  }
  json r;
  if (job.command == "distance") r = run_distance(job);
  else if (job.command == "metric") r = run_metric(job);
  else if (job.command == "fixpoint") r = run_fixpoint(job);
  else if (job.command == "retract") r = run_retract(job);
  else if (job.command == "scan") r = run_scan(job);
  else if (job.command == "linearize") r = run_linearize(job);
  else if (job.command == "geodesic") r = run_geodesic(job);
  else if (job.command == "extreme") r = run_extreme(job);
  else fail(errc::invalid_argument, "unknown command '" + job.command + "'");
  emit(job, r.dump(2));
  return 0;
}

}  // namespace detail

/** Parses flags, dispatches the job, and maps failures to exit codes:
 *  0 success, 2 violated mathematical hypotheses, 1 everything else. */
inline int run_main(int argc, char** argv) {
  CLI::App app{"invariant pseudodistances, holomorphic fixed points, and complex geodesics"};
  app.require_subcommand(1);
  JobSpec job;

  auto add_common = [&job](CLI::App* s) {
    s->add_option("--domain", job.domain_text, "domain text, e.g. ball(h,2) or annulus(2)");
    s->add_option("--map", job.map_text, "holomorphic map expression");
    s->add_option("--from", job.from_text, "start point components");
    s->add_option("--to", job.to_text, "end point components");
    s->add_option("--point", job.point_text, "base point components");
    s->add_option("--vector", job.vector_text, "tangent vector components");
    s->add_option("--tol", job.tol, "tolerance")->capture_default_str();
    s->add_option("--budget", job.budget, "evaluation budget")->capture_default_str();
    s->add_option("--degree", job.degree, "analytic disc degree")->capture_default_str();
    s->add_option("--seed", job.seed, "random seed")->capture_default_str();
    s->add_option("--out", job.out_path, "write the report to this path instead of stdout");
    s->add_flag("--no-timestamp", job.no_timestamp, "omit the timestamp field");
  };

  add_common(app.add_subcommand("distance", "two-sided invariant distance bracket"));
  add_common(app.add_subcommand("metric", "infinitesimal metric bounds at a point"));
  add_common(app.add_subcommand("fixpoint", "contraction fixed point of a strict self-map"));
  add_common(app.add_subcommand("retract", "limit retraction value of the damped family"));
  add_common(app.add_subcommand("scan", "multi-start fixed point scan with dimensions"));
  auto* lin = app.add_subcommand("linearize", "linearizing chart at a fixed point");
  add_common(lin);
  lin->add_option("--average", job.average, "iterate-average chart length (default: retraction chart)");
  add_common(app.add_subcommand("geodesic", "complex geodesic search between two points"));
  add_common(app.add_subcommand("extreme", "complex extreme point test on a ball boundary"));
  auto* sweep = app.add_subcommand("sweep", "CSV sweep over a scalar grid");
  add_common(sweep);
  sweep->add_option("--kind", job.kind, "sweep family: lambda, omega, or average-defect");
  sweep->add_option("--grid", job.grid_text, "comma list or start:stop:count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  job.command = app.get_subcommands().front()->get_name();
  try {
    return detail::run(job);
  } catch (const error& e) {
    json err;
    err["error"]["category"] = errc_name(e.code());
    err["error"]["message"] = e.what();
    try {
      detail::emit(job, err.dump(2));
    } catch (...) {
      std::cerr << err.dump(2) << "\n";
    }
    return e.code() == errc::hypothesis ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace holo::cli
