#pragma once

#include "gapscope/sdp.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace gapscope {

using LogSink = std::function<void(std::string_view)>;

struct SolveOptions {
  double tol_gap = 1e-9;   // relative duality gap
  double tol_feas = 1e-9;  // relative residuals
  int max_iters = 200;
  double step_fraction = 0.98;
  LogSink log;  // optional per-iteration diagnostics

  void validate() const;
};

enum class Status { Optimal, MaxIters, NumericalFailure, Unbounded, InfeasibleDetected };

std::string_view to_string(Status s);

struct SolveResult {
  SymMatrix X;
  std::vector<double> y;
  SymMatrix S;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;  // primal_value − dual_value
  double primal_res = 0.0;
  double dual_res = 0.0;
  Status status = Status::NumericalFailure;
  int iters = 0;
};

// Infeasible-start primal-dual path following with Nesterov–Todd scaling and
// Mehrotra predictor-corrector steps. Deterministic for fixed inputs.
SolveResult solve(const SdpInstance& inst, const SolveOptions& opts = {});

struct PairValue {
  SolveResult result;
  double value = 0.0;  // midpoint of primal and dual values
  bool boundary = false;
};

// Throws ValueDisagreement when the primal and dual values differ by more than
// 10·tol_gap·(1+|pv|+|dv|).
PairValue solve_pair(const PerturbedPair& pair, const SolveOptions& opts = {});

}  // namespace gapscope
