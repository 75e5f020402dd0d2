#include "gapscope/ipm.hpp"

#include "gapscope/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace gapscope {

namespace {

double inner(const Matrix& A, const Matrix& B) { return (A.array() * B.array()).sum(); }

// Largest α with Λ + αΔ ⪰ 0 (Λ = diag(lam) ≻ 0).
double max_step(const Vector& lam, const Matrix& D) {
  const Vector s = lam.cwiseSqrt().cwiseInverse();
  const Matrix T = s.asDiagonal() * D * s.asDiagonal();
  const double e = min_eig(T);
  return e < 0.0 ? -1.0 / e : std::numeric_limits<double>::infinity();
}

struct Direction {
  Matrix dXs;  // scaled: R⁻¹ ΔX R⁻ᵀ
  Matrix dSs;  // scaled: Rᵀ ΔS R
  Vector dy;
};

class NewtonSystem {
 public:
  NewtonSystem(const std::vector<Matrix>& G, const Matrix& Rd_scaled, const Vector& rp,
               const Vector& lam)
      : G_(G), RdS_(Rd_scaled), rp_(rp), lam_(lam) {
    const auto m = static_cast<Eigen::Index>(G.size());
    Matrix M(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j <= i; ++j)
        M(i, j) = M(j, i) = inner(G[static_cast<std::size_t>(i)], G[static_cast<std::size_t>(j)]);
    llt_.compute(M);
    if (llt_.info() != Eigen::Success) {
      const double shift = 1e-14 * std::max(M.norm(), 1e-300);
      llt_.compute(M + shift * Matrix::Identity(m, m));
      if (llt_.info() != Eigen::Success) {
        ldlt_.compute(M + shift * Matrix::Identity(m, m));
        use_ldlt_ = true;
        ok_ = ldlt_.info() == Eigen::Success;
      }
    }
  }

  bool ok() const { return ok_; }

  // Solves for the direction with scaled complementarity right-hand side Rc.
  Direction solve(const Matrix& Rc) const {
    const Eigen::Index n = lam_.size();
    Matrix D(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) D(i, j) = 2.0 * Rc(i, j) / (lam_(i) + lam_(j));
    const Matrix T = D - RdS_;
    Vector rhs(static_cast<Eigen::Index>(G_.size()));
    for (std::size_t i = 0; i < G_.size(); ++i)
      rhs(static_cast<Eigen::Index>(i)) = rp_(static_cast<Eigen::Index>(i)) - inner(G_[i], T);
    Direction d;
    d.dy = use_ldlt_ ? Vector(ldlt_.solve(rhs)) : Vector(llt_.solve(rhs));
    d.dSs = RdS_;
    for (std::size_t j = 0; j < G_.size(); ++j) d.dSs -= d.dy(static_cast<Eigen::Index>(j)) * G_[j];
    d.dXs = D - d.dSs;
    return d;
  }

 private:
  const std::vector<Matrix>& G_;
  const Matrix& RdS_;
  const Vector& rp_;
  const Vector& lam_;
  Eigen::LLT<Matrix> llt_;
  Eigen::LDLT<Matrix> ldlt_;
  bool use_ldlt_ = false;
  bool ok_ = true;
};

bool finite(const Matrix& M) { return M.allFinite(); }

}  // namespace

void SolveOptions::validate() const {
  if (!(tol_gap > 0.0) || !(tol_feas > 0.0) || max_iters <= 0)
    throw InvalidArgument("solver tolerances and iteration limit must be positive");
  if (!(step_fraction > 0.0) || !(step_fraction < 1.0))
    throw InvalidArgument("step_fraction must lie in (0,1)");
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::MaxIters: return "MaxIters";
    case Status::NumericalFailure: return "NumericalFailure";
    case Status::Unbounded: return "Unbounded";
    case Status::InfeasibleDetected: return "InfeasibleDetected";
  }
  return "Unknown";
}

SolveResult solve(const SdpInstance& inst, const SolveOptions& opts) {
  opts.validate();
  const auto n = static_cast<Eigen::Index>(inst.n());
  const auto m = static_cast<Eigen::Index>(inst.m());
  const Matrix C = inst.C().dense();
  const std::vector<Matrix> A = dense_constraints(inst);
  const Vector b = Eigen::Map<const Vector>(inst.b().data(), m);
  const double normC = C.norm();
  const double normb = b.norm();
  const double rho = 1.0 + normC + normb;
  const double scale_feas = 1.0 + normb + normC;

  Matrix X = rho * Matrix::Identity(n, n);
  Matrix S = rho * Matrix::Identity(n, n);
  Vector y = Vector::Zero(m);
  const Matrix I = Matrix::Identity(n, n);

  SolveResult res;
  auto record = [&](Status st, int it) {
    res.X = SymMatrix::from_dense(X);
    res.S = SymMatrix::from_dense(S);
    res.y.assign(y.data(), y.data() + m);
    res.status = st;
    res.iters = it;
    return res;
  };

  int tiny_steps = 0;
  for (int it = 0;; ++it) {
    Vector AX(m);
    for (Eigen::Index i = 0; i < m; ++i) AX(i) = inner(A[static_cast<std::size_t>(i)], X);
    const Vector rp = b - AX;
    Matrix Rd = C - S;
    for (Eigen::Index i = 0; i < m; ++i) Rd -= y(i) * A[static_cast<std::size_t>(i)];
    const double pv = inner(C, X);
    const double dv = b.dot(y);
    const double xs = inner(X, S);
    const double mu = xs / static_cast<double>(n);
    res.primal_value = pv;
    res.dual_value = dv;
    res.gap = pv - dv;
    res.primal_res = m > 0 ? rp.cwiseAbs().maxCoeff() : 0.0;
    res.dual_res = Rd.norm();
    const double scale_gap = 1.0 + std::abs(pv) + std::abs(dv);

    if (opts.log) {
      char line[160];
      std::snprintf(line, sizeof line, "it %3d  pv % .10e  dv % .10e  pres %.2e  dres %.2e  mu %.2e",
                    it, pv, dv, res.primal_res, res.dual_res, mu);
      opts.log(line);
    }

    if (std::abs(pv - dv) <= opts.tol_gap * scale_gap && xs <= opts.tol_gap * scale_gap &&
        res.primal_res <= opts.tol_feas * scale_feas && res.dual_res <= opts.tol_feas * scale_feas)
      return record(Status::Optimal, it);
    if (res.dual_res <= 1e-6 * scale_feas && dv >= 1e9 * scale_feas)
      return record(Status::Unbounded, it);
    if (res.primal_res <= 1e-6 * scale_feas && pv <= -1e9 * scale_feas)
      return record(Status::Unbounded, it);
    // Growing iterates with vanishing residuals signal non-attainment, not
    // infeasibility; those runs continue until the conditioning gives out.
    const double growth = std::max({X.norm(), S.norm(), y.norm()}) / rho;
    const bool residuals_small =
        res.primal_res <= 1e-6 * scale_feas && res.dual_res <= 1e-6 * scale_feas;
    if (growth >= 1e12 && !residuals_small) return record(Status::InfeasibleDetected, it);
    if (growth >= 1e16) return record(Status::NumericalFailure, it);
    if (it >= opts.max_iters) return record(Status::MaxIters, it);

    // Nesterov–Todd scaling point: W = RRᵀ with RᵀSR = R⁻¹XR⁻ᵀ = Λ.
    Eigen::LLT<Matrix> cx(X), cs(S);
    if (cx.info() != Eigen::Success || cs.info() != Eigen::Success)
      return record(Status::NumericalFailure, it);
    const Matrix LX = cx.matrixL();
    const Matrix LS = cs.matrixL();
    Eigen::JacobiSVD<Matrix> svd(LS.transpose() * LX, Eigen::ComputeFullV);
    const Vector lam = svd.singularValues();
    if (!(lam.minCoeff() > 0.0) || !lam.allFinite()) return record(Status::NumericalFailure, it);
    const Matrix R = LX * svd.matrixV() * lam.cwiseSqrt().cwiseInverse().asDiagonal();

    std::vector<Matrix> G;
    G.reserve(static_cast<std::size_t>(m));
    for (const auto& Ai : A) G.push_back(symmetrize(R.transpose() * Ai * R));
    const Matrix RdS = symmetrize(R.transpose() * Rd * R);
    NewtonSystem sys(G, RdS, rp, lam);
    if (!sys.ok()) return record(Status::NumericalFailure, it);

    const Matrix L2 = lam.array().square().matrix().asDiagonal();
    const Direction aff = sys.solve(-L2);
    if (!finite(aff.dXs) || !finite(aff.dSs) || !aff.dy.allFinite())
      return record(Status::NumericalFailure, it);
    const double ap_aff = std::min(1.0, max_step(lam, aff.dXs));
    const double ad_aff = std::min(1.0, max_step(lam, aff.dSs));
    const Matrix Lam = lam.asDiagonal();
    const double mu_aff =
        inner(Lam + ap_aff * aff.dXs, Lam + ad_aff * aff.dSs) / static_cast<double>(n);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    const Matrix cross = aff.dXs * aff.dSs;
    const Matrix Rc = sigma * mu * I - L2 - 0.5 * (cross + cross.transpose());
    const Direction dir = sys.solve(Rc);
    if (!finite(dir.dXs) || !finite(dir.dSs) || !dir.dy.allFinite())
      return record(Status::NumericalFailure, it);
    const double ap = std::min(1.0, opts.step_fraction * max_step(lam, dir.dXs));
    const double ad = std::min(1.0, opts.step_fraction * max_step(lam, dir.dSs));

    Matrix dS = Rd;
    for (Eigen::Index i = 0; i < m; ++i) dS -= dir.dy(i) * A[static_cast<std::size_t>(i)];
    X = symmetrize(X + ap * (R * dir.dXs * R.transpose()));
    S = symmetrize(S + ad * dS);
    y += ad * dir.dy;

    if (std::max(ap, ad) < 1e-10) {
      if (++tiny_steps >= 5) return record(Status::NumericalFailure, it + 1);
    } else {
      tiny_steps = 0;
    }
  }
}

PairValue solve_pair(const PerturbedPair& pair, const SolveOptions& opts) {
  PairValue out;
  out.result = solve(pair.primal(), opts);
  out.boundary = pair.boundary();
  const double pv = out.result.primal_value;
  const double dv = out.result.dual_value;
  if (std::abs(pv - dv) > 10.0 * opts.tol_gap * (1.0 + std::abs(pv) + std::abs(dv)))
    throw ValueDisagreement("primal value " + std::to_string(pv) + " and dual value " +
                            std::to_string(dv) + " disagree (status " +
                            std::string(to_string(out.result.status)) + ")");
  out.value = 0.5 * (pv + dv);
  return out;
}

}  // namespace gapscope
