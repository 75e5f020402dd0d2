#pragma once

#include "gapscope/facial.hpp"
#include "gapscope/tracer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gapscope {

// Constants of the bound ‖Y‖ ≤ κ·X₂₂•Y and the estimates built on it. All
// zero when the reduced problem has no trailing block (Slater holds).
struct BoundConstants {
  double kappa = 0.0;  // 1/λmin(X₂₂)
  double M = 0.0;      // κ·(X₂₂•I)
  double K = 0.0;      // M·(vp − vd + 2)
  double vp = 0.0;
  double vd = 0.0;
  Matrix X22;
};

// X: the reducing direction of a one-step dual chain, in original coordinates.
// Throws PreconditionViolated for chains longer than one step and
// NotRankComplement when X₂₂ is not positive definite.
BoundConstants estimate_constants(const ReducedInstance& red, const SymMatrix& X, double vp,
                                  double vd);

// max bᵀy − τ/(Mα) s.t. L(y) + tαI ⪰ 0 and [[I, vec L12(y)], [·, τ]] ⪰ 0, as
// a dual-form instance in (y, τ). Without a trailing block τ is omitted.
SdpInstance build_rd1(const ReducedInstance& red, const BoundConstants& c, double alpha, double t);
// Same LMI with τ fixed to Kα, i.e. l12²(y) ≤ Kα.
SdpInstance build_rd2(const ReducedInstance& red, const BoundConstants& c, double alpha, double t);

struct CheckLine {
  std::string name;
  Json params;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs − lhs
  bool pass = false;
  std::string status = "ok";  // "ok", a solver status, or "precondition"
};

struct CheckReport {
  std::string name;
  std::vector<CheckLine> lines;
  bool pass() const;
  bool skipped() const;
};

Json to_json(const CheckLine& line);
Json to_json(const CheckReport& report);

struct HarnessOptions {
  SolveOptions solver;
  double slack_tol = 1e-6;
};

// v(0,t) ≤ v(tα,t) ≤ u1 + t²αn + tc, u1 ≤ u2 and u2 ≤ v(tα,0), with
// c = C•I of the rescaled data.
CheckReport verify_sandwich(const ReducedInstance& red, const BoundConstants& c, double alpha,
                            double t, const HarnessOptions& opts = {});

// l12²(y) ≤ Kα at the RD1 solution. Throws ThresholdNotMet unless
// v(tα, 0) ≤ vp + 1/2.
CheckReport verify_l12_bound(const ReducedInstance& red, const BoundConstants& c, double alpha,
                             double t, const HarnessOptions& opts = {});

// The same bound at a caller-supplied y; throws InvalidArgument when y
// violates L(y) + tαI ⪰ 0.
CheckLine check_l12_at(const ReducedInstance& red, const BoundConstants& c, double alpha, double t,
                       const Vector& y, const HarnessOptions& opts = {});

// λmax(L22(y) + tαI) ≤ tαM on `count` solver-generated feasible points of
// D(tα, t), cycling through ts and alphas.
CheckReport verify_m_bound(const ReducedInstance& red, const BoundConstants& c,
                           const std::vector<double>& ts, const std::vector<double>& alphas,
                           std::size_t count = 50, std::uint64_t seed = 1,
                           const HarnessOptions& opts = {});

// ‖Y‖ ≤ κ·X₂₂•Y on `count` random PSD matrices.
CheckReport verify_kappa_bound(const BoundConstants& c, std::size_t count = 100,
                               std::uint64_t seed = 1);

// u2(α, t) and its extrapolated limit ū(α) as t ↓ 0.
double u1_value(const ReducedInstance& red, const BoundConstants& c, double alpha, double t,
                const SolveOptions& opts = {});
double u2_value(const ReducedInstance& red, const BoundConstants& c, double alpha, double t,
                const SolveOptions& opts = {});
LimitEstimate u_bar(const ReducedInstance& red, const BoundConstants& c, double alpha,
                    const TSchedule& sched = {}, const SolveOptions& opts = {});

struct HarnessRun {
  std::size_t steps = 0;  // dual chain length
  BoundConstants constants;
  std::vector<CheckReport> reports;
  bool pass() const;
};

// Every check on α ∈ alphas, t ∈ ts. vp/vd are traced when not supplied.
// Chains longer than one step yield reports with status "precondition".
HarnessRun run_harness(const SdpInstance& inst, std::optional<double> vp, std::optional<double> vd,
                       const std::vector<double>& alphas = {0.5, 1.0, 2.0},
                       const std::vector<double>& ts = {1e-2, 1e-3},
                       const HarnessOptions& opts = {});

}  // namespace gapscope
