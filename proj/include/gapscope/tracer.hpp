#pragma once

#include "gapscope/ipm.hpp"
#include "gapscope/sdp.hpp"
#include "gapscope/sdpa.hpp"

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gapscope {

// Geometric schedule t_k = t0·ratioᵏ, k = 0..steps.
struct TSchedule {
  double t0 = 1e-1;
  double ratio = 0.5;
  int steps = 14;

  void validate() const;
  std::vector<double> values() const;
};

struct ValueSample {
  double eps = 0.0;
  double eta = 0.0;
  double value = std::numeric_limits<double>::quiet_NaN();
  double primal_res = 0.0;
  double dual_res = 0.0;
  double gap = 0.0;
  std::string status;  // solver status, "Disagreement" or "Skipped"
  bool converged = false;
  bool boundary = false;
};

// v(ε, η) through solve_pair; boundary calls carry the flag. Solver errors
// propagate, including ValueDisagreement.
ValueSample value_at(const SdpInstance& inst, double eps, double eta, const SolveOptions& opts = {});

struct LimitEstimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  double error = std::numeric_limits<double>::infinity();
  std::string model = "none";  // "constant", "power", "linear" or "none"
  double exponent = 0.0;
  std::size_t points = 0;
  bool ok() const { return model != "none"; }
};

// Fits v(t) ≈ v∞ + c·t^p over the last `window` points. The error estimate is
// heuristic: the larger of the fit residual and the change of the limit when
// the window slides back one point. Throws InsufficientData below 3 points.
LimitEstimate extrapolate(const std::vector<double>& t, const std::vector<double>& v,
                          std::size_t window = 5);

struct TraceOptions {
  SolveOptions solver;
  unsigned jobs = 0;  // 0: hardware concurrency
  bool strict = true;  // throw TooFewConvergedPoints instead of recording a gap
};

struct ThetaRow {
  double theta = 0.0;
  std::vector<double> t;
  std::vector<ValueSample> samples;
  LimitEstimate limit;
};

struct GapProfile {
  std::vector<double> theta_grid;
  std::vector<ThetaRow> rows;     // aligned with theta_grid
  ThetaRow vp_ray;                // θ = 0, v(t, 0)
  ThetaRow vd_ray;                // θ = π/2, v(0, t)
  double vp_hat() const { return vp_ray.limit.value; }
  double vd_hat() const { return vd_ray.limit.value; }
  double gap_hat() const { return vp_hat() - vd_hat(); }
  std::size_t failed_rows() const;
};

// 33 Chebyshev-spaced angles θ_k = π/4·(1 − cos(kπ/32)); endpoints exact.
std::vector<double> default_theta_grid(std::size_t points = 33);

// Traces v(t cos θ, t sin θ) down the schedule for each θ. The descent stops
// at the first unconverged t; later cells are recorded as "Skipped".
GapProfile trace_theta(const SdpInstance& inst, const std::vector<double>& theta_grid,
                       const TSchedule& sched = {}, const TraceOptions& opts = {});

// ṽ(β) = lim v(t, tβ) and v̄(α) = lim v(tα, t); infinity selects the boundary ray.
LimitEstimate tilde_v(const SdpInstance& inst, double beta, const TSchedule& sched = {},
                      const SolveOptions& opts = {});
LimitEstimate bar_v(const SdpInstance& inst, double alpha, const TSchedule& sched = {},
                    const SolveOptions& opts = {});

// α ↦ v(tα, t) at fixed t.
struct AlphaScan {
  double t = 0.0;
  std::vector<double> alphas;
  std::vector<double> values;
  std::vector<std::string> status;
  bool monotone = false;  // nondecreasing within tol
  bool concave = false;   // divided second differences ≤ tol
  double tol = 0.0;
};
AlphaScan alpha_scan(const SdpInstance& inst, double t, const std::vector<double>& alphas,
                     const SolveOptions& opts = {});
// 10 log-spaced values in [1/4, 4].
std::vector<double> default_alpha_grid();

struct StructureReport {
  std::vector<std::size_t> monotonicity_violations;  // k with va[k+1] above va[k] beyond error bars
  bool monotonicity_ok = true;
  bool strictly_decreasing = true;   // every margin exceeds the summed error bars
  double interior_limit_0 = std::numeric_limits<double>::quiet_NaN();
  double interior_limit_pi2 = std::numeric_limits<double>::quiet_NaN();
  double score_0 = std::numeric_limits<double>::quiet_NaN();    // |θ→0 limit − v(t,0) ray limit|
  double score_pi2 = std::numeric_limits<double>::quiet_NaN();  // |θ→π/2 limit − v(0,t) ray limit|
  double range_coverage = 0.0;       // 1 − largest uncovered gap / (vp − vd)
  double spread = 0.0;               // max − min of va_hat over converged rows
  bool sandwich_ok = true;           // [va ± err] meets [vd − 1e-2, vp + 1e-2]
  std::optional<AlphaScan> alpha;
};

StructureReport structure_report(const GapProfile& profile,
                                 std::optional<AlphaScan> alpha = std::nullopt);

// theta,t,eps,eta,v,primal_res,dual_res,gap,status
void write_samples_csv(const GapProfile& profile, std::ostream& out);
// {theta_grid, va_hat[], err[], vp_hat, vd_hat, discontinuity_scores, monotonicity_ok}
Json profile_to_json(const GapProfile& profile, const StructureReport& report);
Json report_to_json(const StructureReport& report);
// Two columns "theta va_hat" for gnuplot.
void write_gnuplot(const GapProfile& profile, std::ostream& out);

}  // namespace gapscope
