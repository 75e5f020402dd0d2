#include "lmi.hpp"

#include "gapscope/errors.hpp"
#include "gapscope/sdp.hpp"

#include <cmath>

namespace gapscope::detail {

Matrix block_diag(const std::vector<Matrix>& blocks) {
  Eigen::Index n = 0;
  for (const auto& B : blocks) n += B.rows();
  Matrix out = Matrix::Zero(n, n);
  Eigen::Index off = 0;
  for (const auto& B : blocks) {
    out.block(off, off, B.rows(), B.cols()) = B;
    off += B.rows();
  }
  return out;
}

Vector flatten(const Matrix& M, bool symmetric) {
  std::vector<double> v;
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < (symmetric ? j + 1 : M.rows()); ++i) v.push_back(M(i, j));
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

AffineSet solve_affine(const Matrix& E, const Vector& f, double cutoff) {
  AffineSet s;
  const Eigen::Index k = E.cols();
  if (E.rows() == 0 || k == 0) {
    s.y0 = Vector::Zero(k);
    s.N = Matrix::Identity(k, k);
    s.residual = E.rows() == 0 ? 0.0 : f.cwiseAbs().maxCoeff();
    return s;
  }
  Eigen::JacobiSVD<Matrix> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff * std::max(smax, 1.0)) ++rank;
  const Matrix U = svd.matrixU().leftCols(rank);
  const Matrix V = svd.matrixV();
  s.y0 = V.leftCols(rank) * (sv.head(rank).cwiseInverse().asDiagonal() * (U.transpose() * f));
  s.N = V.rightCols(k - rank);
  s.residual = (E * s.y0 - f).cwiseAbs().maxCoeff();
  return s;
}

LmiResult solve_lmi(const LmiProblem& p, const SolveOptions& opts) {
  const auto k = static_cast<Eigen::Index>(p.F.size());
  LmiResult out;
  out.z = Vector::Zero(k);

  // Pure feasibility check when there is nothing to optimize over.
  bool all_zero = true;
  for (const auto& Fk : p.F)
    if (Fk.norm() > 0.0) all_zero = false;
  if (all_zero) {
    if (k > 0 && p.g.norm() > 0.0) {
      out.status = Status::Unbounded;
      return out;
    }
    out.status = min_eig(p.F0) >= -opts.tol_feas * (1.0 + p.F0.norm()) ? Status::Optimal
                                                                        : Status::InfeasibleDetected;
    return out;
  }

  std::vector<SymMatrix> A;
  A.reserve(p.F.size());
  for (const auto& Fk : p.F) A.push_back(SymMatrix::from_dense(symmetrize(Fk)));
  std::vector<double> b(p.g.data(), p.g.data() + k);
  try {
    const SdpInstance inst("lmi", SymMatrix::from_dense(symmetrize(p.F0)), std::move(A), b);
    out.raw = solve(inst, opts);
    const auto& basis = inst.basis_indices();
    for (std::size_t i = 0; i < basis.size(); ++i)
      out.z(static_cast<Eigen::Index>(basis[i])) = out.raw.y[i];
    out.status = out.raw.status;
    out.value = p.g.dot(out.z);
  } catch (const InconsistentConstraints&) {
    // A direction leaves the slack unchanged while moving the objective.
    out.status = Status::Unbounded;
  }
  return out;
}

}  // namespace gapscope::detail
