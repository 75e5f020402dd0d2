#include "gapscope/tracer.hpp"

#include "gapscope/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>
#include <thread>

namespace gapscope {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

struct Fit {
  double limit = 0.0;
  double residual = 0.0;
  double exponent = 0.0;
  std::string model;
};

Fit fit_window(const std::vector<double>& t, const std::vector<double>& v, std::size_t lo,
               std::size_t hi) {
  const std::size_t k = hi - lo;
  Fit f;
  double vmin = v[lo], vmax = v[lo];
  for (std::size_t i = lo; i < hi; ++i) {
    vmin = std::min(vmin, v[i]);
    vmax = std::max(vmax, v[i]);
  }
  if (vmax - vmin <= 1e-10 * (1.0 + std::abs(v[hi - 1]))) {
    f.limit = v[hi - 1];
    f.residual = vmax - vmin;
    f.model = "constant";
    return f;
  }

  // Successive differences of one sign decay like t^p for a power law.
  bool same_sign = true;
  const double s0 = v[lo] - v[lo + 1];
  for (std::size_t i = lo; i + 1 < hi; ++i) {
    const double d = v[i] - v[i + 1];
    if (d == 0.0 || (d > 0.0) != (s0 > 0.0)) same_sign = false;
  }
  if (same_sign && k >= 3) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto m = static_cast<double>(k - 1);
    for (std::size_t i = lo; i + 1 < hi; ++i) {
      const double x = std::log(t[i]);
      const double y = std::log(std::abs(v[i] - v[i + 1]));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double den = m * sxx - sx * sx;
    const double p = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
    if (p > 0.05 && p < 8.0) {
      Eigen::MatrixXd B(static_cast<Eigen::Index>(k), 2);
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(k));
      for (std::size_t i = lo; i < hi; ++i) {
        B(static_cast<Eigen::Index>(i - lo), 0) = 1.0;
        B(static_cast<Eigen::Index>(i - lo), 1) = std::pow(t[i], p);
        rhs(static_cast<Eigen::Index>(i - lo)) = v[i];
      }
      const Eigen::VectorXd c = B.colPivHouseholderQr().solve(rhs);
      f.limit = c(0);
      f.residual = (B * c - rhs).cwiseAbs().maxCoeff();
      f.exponent = p;
      f.model = "power";
      return f;
    }
  }

  const double dv = v[hi - 1] - v[hi - 2];
  f.limit = v[hi - 1] + dv * t[hi - 1] / (t[hi - 2] - t[hi - 1]);
  f.residual = std::abs(dv);
  f.model = "linear";
  return f;
}

unsigned worker_count(unsigned jobs, std::size_t tasks) {
  unsigned n = jobs ? jobs : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(tasks, 1)));
}

// Runs fn(i) for i < count on a bounded pool; rethrows the first failure in
// index order.
template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = worker_count(jobs, count);
  if (n <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// (ε, η) on the ray of angle θ; the endpoints are exact boundary rays.
std::pair<double, double> ray_point(double theta, double t) {
  if (theta == 0.0) return {t, 0.0};
  if (theta == kHalfPi) return {0.0, t};
  return {t * std::cos(theta), t * std::sin(theta)};
}

template <class Point>
ThetaRow descend(const SdpInstance& inst, double theta, const std::vector<double>& ts, Point point,
                 const SolveOptions& opts) {
  ThetaRow row;
  row.theta = theta;
  row.t = ts;
  bool stopped = false;
  for (double t : ts) {
    const auto [eps, eta] = point(t);
    ValueSample s;
    s.eps = eps;
    s.eta = eta;
    s.boundary = eps == 0.0 || eta == 0.0;
    if (stopped) {
      s.status = "Skipped";
    } else {
      try {
        s = value_at(inst, eps, eta, opts);
      } catch (const ValueDisagreement&) {
        s.status = "Disagreement";
      }
      if (!s.converged) stopped = true;
    }
    row.samples.push_back(s);
  }
  std::vector<double> tc, vc;
  for (std::size_t i = 0; i < row.samples.size() && row.samples[i].converged; ++i) {
    tc.push_back(ts[i]);
    vc.push_back(row.samples[i].value);
  }
  if (tc.size() >= 3) row.limit = extrapolate(tc, vc);
  row.limit.points = tc.size();
  return row;
}

LimitEstimate limit_or_throw(const ThetaRow& row) {
  if (!row.limit.ok()) throw TooFewConvergedPoints(row.theta, row.limit.points);
  return row.limit;
}

}  // namespace

void TSchedule::validate() const {
  if (!(t0 > 0.0)) throw InvalidArgument("t0 must be positive");
  if (!(ratio > 0.0) || !(ratio < 1.0)) throw InvalidArgument("ratio must lie in (0,1)");
  if (steps < 2) throw InvalidArgument("schedule needs at least 3 points");
}

std::vector<double> TSchedule::values() const {
  validate();
  std::vector<double> out;
  for (int k = 0; k <= steps; ++k) out.push_back(t0 * std::pow(ratio, k));
  return out;
}

ValueSample value_at(const SdpInstance& inst, double eps, double eta, const SolveOptions& opts) {
  const PerturbedPair pair = perturb(inst, eps, eta);
  const PairValue pv = solve_pair(pair, opts);
  ValueSample s;
  s.eps = eps;
  s.eta = eta;
  s.value = pv.value;
  s.primal_res = pv.result.primal_res;
  s.dual_res = pv.result.dual_res;
  s.gap = pv.result.gap;
  s.status = std::string(to_string(pv.result.status));
  s.converged = pv.result.status == Status::Optimal;
  s.boundary = pv.boundary;
  return s;
}

LimitEstimate extrapolate(const std::vector<double>& t, const std::vector<double>& v,
                          std::size_t window) {
  if (t.size() != v.size()) throw DimensionMismatch("t and v differ in length");
  if (t.size() < 3) throw InsufficientData("extrapolation needs at least 3 samples");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(v[i]) || !(t[i] > 0.0)) throw InvalidArgument("samples must be finite, t > 0");
    if (i && !(t[i] < t[i - 1])) throw InvalidArgument("t must be strictly decreasing");
  }
  const std::size_t n = t.size();
  const std::size_t k = std::min(std::max<std::size_t>(window, 3), n);
  const Fit f = fit_window(t, v, n - k, n);
  LimitEstimate out;
  out.value = f.limit;
  out.model = f.model;
  out.exponent = f.exponent;
  out.points = n;
  if (f.model == "linear") {
    out.error = f.residual;
    return out;
  }
  double shift = std::abs(v[n - 1] - v[n - 2]);
  if (n > k) {
    shift = std::abs(f.limit - fit_window(t, v, n - k - 1, n - 1).limit);
  } else if (k > 3) {
    shift = std::abs(f.limit - fit_window(t, v, n - k + 1, n).limit);
  }
  out.error = f.model == "constant" ? f.residual : std::max(f.residual, shift);
  return out;
}

std::size_t GapProfile::failed_rows() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.limit.ok() ? 0 : 1;
  return n;
}

std::vector<double> default_theta_grid(std::size_t points) {
  if (points < 2) throw InvalidArgument("theta grid needs at least 2 points");
  std::vector<double> g;
  const double last = static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k)
    g.push_back(std::numbers::pi / 4 * (1.0 - std::cos(static_cast<double>(k) * std::numbers::pi / last)));
  g.front() = 0.0;
  g.back() = kHalfPi;
  return g;
}

GapProfile trace_theta(const SdpInstance& inst, const std::vector<double>& theta_grid,
                       const TSchedule& sched, const TraceOptions& opts) {
  const std::vector<double> ts = sched.values();
  for (std::size_t i = 0; i < theta_grid.size(); ++i) {
    if (!(theta_grid[i] >= 0.0) || !(theta_grid[i] <= kHalfPi))
      throw DomainError("theta must lie in [0, pi/2]");
    if (i && !(theta_grid[i] > theta_grid[i - 1])) throw InvalidArgument("theta grid must increase");
  }
  // Boundary rays go last unless the grid already contains them.
  std::vector<double> thetas = theta_grid;
  const bool has0 = !theta_grid.empty() && theta_grid.front() == 0.0;
  const bool has_pi2 = !theta_grid.empty() && theta_grid.back() == kHalfPi;
  if (!has0) thetas.push_back(0.0);
  if (!has_pi2) thetas.push_back(kHalfPi);

  std::vector<ThetaRow> rows(thetas.size());
  parallel_for(thetas.size(), opts.jobs, [&](std::size_t i) {
    const double th = thetas[i];
    rows[i] = descend(inst, th, ts, [th](double t) { return ray_point(th, t); }, opts.solver);
  });

  GapProfile p;
  p.theta_grid = theta_grid;
  p.rows.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(theta_grid.size()));
  std::size_t extra = theta_grid.size();
  p.vp_ray = has0 ? rows.front() : rows[extra++];
  p.vd_ray = has_pi2 ? rows[theta_grid.size() - 1] : rows[extra];
  if (opts.strict) {
    for (const auto& r : p.rows) limit_or_throw(r);
    limit_or_throw(p.vp_ray);
    limit_or_throw(p.vd_ray);
  }
  return p;
}

LimitEstimate tilde_v(const SdpInstance& inst, double beta, const TSchedule& sched,
                      const SolveOptions& opts) {
  if (!(beta >= 0.0)) throw DomainError("beta must be nonnegative");
  const bool inf = std::isinf(beta);
  const double theta = inf ? kHalfPi : std::atan(beta);
  const ThetaRow row = descend(
      inst, theta, sched.values(),
      [&](double t) { return inf ? std::pair{0.0, t} : std::pair{t, t * beta}; }, opts);
  return limit_or_throw(row);
}

LimitEstimate bar_v(const SdpInstance& inst, double alpha, const TSchedule& sched,
                    const SolveOptions& opts) {
  if (!(alpha >= 0.0)) throw DomainError("alpha must be nonnegative");
  const bool inf = std::isinf(alpha);
  const double theta = inf ? 0.0 : std::atan2(1.0, alpha);
  const ThetaRow row = descend(
      inst, theta, sched.values(),
      [&](double t) { return inf ? std::pair{t, 0.0} : std::pair{t * alpha, t}; }, opts);
  return limit_or_throw(row);
}

std::vector<double> default_alpha_grid() {
  std::vector<double> a;
  for (int i = 0; i < 10; ++i) a.push_back(0.25 * std::pow(16.0, i / 9.0));
  return a;
}

AlphaScan alpha_scan(const SdpInstance& inst, double t, const std::vector<double>& alphas,
                     const SolveOptions& opts) {
  if (!(t > 0.0)) throw InvalidArgument("t must be positive");
  AlphaScan s;
  s.t = t;
  s.alphas = alphas;
  s.tol = 1e3 * opts.tol_gap;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0) || (i && !(alphas[i] > alphas[i - 1])))
      throw InvalidArgument("alphas must be positive and increasing");
    try {
      const ValueSample v = value_at(inst, t * alphas[i], t, opts);
      s.values.push_back(v.value);
      s.status.push_back(v.status);
    } catch (const ValueDisagreement&) {
      s.values.push_back(std::numeric_limits<double>::quiet_NaN());
      s.status.push_back("Disagreement");
    }
  }
  s.monotone = s.concave = true;
  for (std::size_t i = 0; i + 1 < s.values.size(); ++i) {
    const double tol = s.tol * (1.0 + std::abs(s.values[i]));
    if (!(s.values[i + 1] >= s.values[i] - tol)) s.monotone = false;
    if (i + 2 < s.values.size()) {
      const double h1 = alphas[i + 1] - alphas[i], h2 = alphas[i + 2] - alphas[i + 1];
      const double s1 = (s.values[i + 1] - s.values[i]) / h1;
      const double s2 = (s.values[i + 2] - s.values[i + 1]) / h2;
      if (!(s2 <= s1 + 2.0 * tol / std::min(h1, h2))) s.concave = false;
    }
  }
  return s;
}

StructureReport structure_report(const GapProfile& profile, std::optional<AlphaScan> alpha) {
  StructureReport rep;
  rep.alpha = std::move(alpha);
  std::vector<const ThetaRow*> ok;
  for (const auto& r : profile.rows)
    if (r.limit.ok()) ok.push_back(&r);

  for (std::size_t k = 0; k + 1 < ok.size(); ++k) {
    const LimitEstimate& a = ok[k]->limit;
    const LimitEstimate& b = ok[k + 1]->limit;
    const double bars = a.error + b.error + 1e-9;
    if (b.value - a.value > bars) {
      rep.monotonicity_violations.push_back(k);
      rep.monotonicity_ok = false;
    }
    if (!(a.value - b.value > bars - 1e-9)) rep.strictly_decreasing = false;
  }

  const double vp = profile.vp_hat(), vd = profile.vd_hat();
  std::vector<const ThetaRow*> interior;
  for (const auto* r : ok)
    if (r->theta > 0.0 && r->theta < kHalfPi) interior.push_back(r);
  auto line_at = [](const ThetaRow* a, const ThetaRow* b, double x) {
    const double slope = (b->limit.value - a->limit.value) / (b->theta - a->theta);
    return a->limit.value + slope * (x - a->theta);
  };
  if (interior.size() >= 2) {
    rep.interior_limit_0 = line_at(interior[0], interior[1], 0.0);
    rep.interior_limit_pi2 = line_at(interior[interior.size() - 2], interior.back(), kHalfPi);
    rep.score_0 = std::abs(rep.interior_limit_0 - vp);
    rep.score_pi2 = std::abs(rep.interior_limit_pi2 - vd);
  }

  if (!ok.empty()) {
    double lo = ok[0]->limit.value, hi = lo;
    for (const auto* r : ok) {
      lo = std::min(lo, r->limit.value);
      hi = std::max(hi, r->limit.value);
      const double v = r->limit.value, e = r->limit.error;
      if (v + e < vd - 1e-2 || v - e > vp + 1e-2) rep.sandwich_ok = false;
    }
    rep.spread = hi - lo;
  }

  if (std::isfinite(vp) && std::isfinite(vd)) {
    if (vp - vd <= 1e-6) {
      rep.range_coverage = 1.0;
    } else {
      std::vector<double> pts{vd, vp};
      for (const auto* r : ok) pts.push_back(std::clamp(r->limit.value, vd, vp));
      std::sort(pts.begin(), pts.end());
      double gap = 0.0;
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) gap = std::max(gap, pts[i + 1] - pts[i]);
      rep.range_coverage = 1.0 - gap / (vp - vd);
    }
  }
  return rep;
}

void write_samples_csv(const GapProfile& profile, std::ostream& out) {
  out << "theta,t,eps,eta,v,primal_res,dual_res,gap,status\n";
  auto emit = [&](const ThetaRow& row) {
    for (std::size_t i = 0; i < row.samples.size(); ++i) {
      const ValueSample& s = row.samples[i];
      out << format_double(row.theta) << ',' << format_double(row.t[i]) << ',' << format_double(s.eps)
          << ',' << format_double(s.eta) << ',' << format_double(s.value) << ','
          << format_double(s.primal_res) << ',' << format_double(s.dual_res) << ','
          << format_double(s.gap) << ',' << s.status << '\n';
    }
  };
  for (const auto& r : profile.rows) emit(r);
  if (profile.theta_grid.empty() || profile.theta_grid.front() != 0.0) emit(profile.vp_ray);
  if (profile.theta_grid.empty() || profile.theta_grid.back() != kHalfPi) emit(profile.vd_ray);
}

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json profile_to_json(const GapProfile& profile, const StructureReport& report) {
  Json va = Json::array(), err = Json::array();
  for (const auto& r : profile.rows) {
    va.push_back(number_or_null(r.limit.value));
    err.push_back(number_or_null(r.limit.error));
  }
  return {{"theta_grid", profile.theta_grid},
          {"va_hat", std::move(va)},
          {"err", std::move(err)},
          {"vp_hat", number_or_null(profile.vp_hat())},
          {"vd_hat", number_or_null(profile.vd_hat())},
          {"discontinuity_scores",
           {{"0", number_or_null(report.score_0)}, {"pi/2", number_or_null(report.score_pi2)}}},
          {"monotonicity_ok", report.monotonicity_ok}};
}

Json report_to_json(const StructureReport& report) {
  Json j = {{"monotonicity_violations", report.monotonicity_violations},
            {"monotonicity_ok", report.monotonicity_ok},
            {"strictly_decreasing", report.strictly_decreasing},
            {"interior_limit_0", number_or_null(report.interior_limit_0)},
            {"interior_limit_pi2", number_or_null(report.interior_limit_pi2)},
            {"score_0", number_or_null(report.score_0)},
            {"score_pi2", number_or_null(report.score_pi2)},
            {"range_coverage", report.range_coverage},
            {"spread", report.spread},
            {"sandwich_ok", report.sandwich_ok}};
  if (report.alpha) {
    Json vals = Json::array();
    for (double v : report.alpha->values) vals.push_back(number_or_null(v));
    j["alpha_scan"] = {{"t", report.alpha->t},
                       {"alphas", report.alpha->alphas},
                       {"values", std::move(vals)},
                       {"status", report.alpha->status},
                       {"monotone", report.alpha->monotone},
                       {"concave", report.alpha->concave}};
  }
  return j;
}

void write_gnuplot(const GapProfile& profile, std::ostream& out) {
  out << "# theta va_hat err\n";
  for (const auto& r : profile.rows)
    if (r.limit.ok())
      out << format_double(r.theta) << ' ' << format_double(r.limit.value) << ' '
          << format_double(r.limit.error) << '\n';
}

}  // namespace gapscope
