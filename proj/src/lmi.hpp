#pragma once

// Internal helpers shared by the reduction, harness and tracer code: dual-form
// LMI solves over dense data and affine parametrization of linear equations.

#include "gapscope/ipm.hpp"
#include "gapscope/linalg.hpp"

#include <vector>

namespace gapscope::detail {

// max gᵀz  s.t.  F0 − Σ zₖFₖ ⪰ 0.
struct LmiProblem {
  Matrix F0;
  std::vector<Matrix> F;
  Vector g;
};

struct LmiResult {
  Status status = Status::NumericalFailure;
  Vector z;          // full length, zero on dropped dependent coordinates
  double value = 0;  // gᵀz at the returned point
  SolveResult raw;   // empty when no solve was needed
};

// Constant objectives and empty variable lists are handled without the IPM;
// a dependent Fₖ with inconsistent gₖ reports Unbounded.
LmiResult solve_lmi(const LmiProblem& p, const SolveOptions& opts);

// Solution set {y0 + N w} of E y = f by SVD; residual is ‖E y0 − f‖∞.
struct AffineSet {
  Vector y0;
  Matrix N;
  double residual = 0.0;
};
AffineSet solve_affine(const Matrix& E, const Vector& f, double cutoff = 1e-10);

// Block-diagonal assembly of square blocks.
Matrix block_diag(const std::vector<Matrix>& blocks);

// Entries of the upper triangle (or all entries when !symmetric) as a vector.
Vector flatten(const Matrix& M, bool symmetric);

}  // namespace gapscope::detail
