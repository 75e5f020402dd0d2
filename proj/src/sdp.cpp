#include "gapscope/sdp.hpp"

#include "gapscope/errors.hpp"

#include <cmath>

namespace gapscope {

namespace {

constexpr double kDependencyTol = 1e-10;
constexpr double kConsistencyTol = 1e-9;

}  // namespace

SdpInstance::SdpInstance(std::string name, SymMatrix C, std::vector<SymMatrix> A,
                         std::vector<double> b)
    : name_(std::move(name)), C_(std::move(C)), input_m_(A.size()) {
  if (A.size() != b.size()) throw DimensionMismatch("|A| and |b| differ");
  if (A.empty()) throw InvalidArgument("instance needs at least one constraint");
  if (C_.n() == 0) throw InvalidArgument("instance dimension must be positive");
  for (const auto& Ai : A)
    if (Ai.n() != C_.n()) throw DimensionMismatch("constraint matrix dimension differs from C");
  for (double v : b)
    if (!std::isfinite(v)) throw InvalidArgument("b entry is not finite");

  // Greedy basis selection in svec space (modified Gram-Schmidt, two passes).
  const auto N = static_cast<Eigen::Index>(C_.n() * (C_.n() + 1) / 2);
  std::vector<Vector> q;
  Matrix kept(0, N);
  std::vector<double> kept_b;
  for (std::size_t i = 0; i < A.size(); ++i) {
    const Vector row = svec(A[i]);
    Vector r = row;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qk : q) r -= qk.dot(r) * qk;
    const double rn = r.norm();
    if (rn > kDependencyTol * std::max(1.0, row.norm())) {
      q.push_back(r / rn);
      kept.conservativeResize(kept.rows() + 1, N);
      kept.row(kept.rows() - 1) = row.transpose();
      kept_b.push_back(b[i]);
      basis_.push_back(i);
      A_.push_back(A[i]);
      b_.push_back(b[i]);
      continue;
    }
    double combo = 0.0, scale = std::abs(b[i]);
    if (kept.rows() > 0) {
      const Vector c = kept.transpose().colPivHouseholderQr().solve(row);
      for (Eigen::Index k = 0; k < c.size(); ++k) {
        combo += c(k) * kept_b[static_cast<std::size_t>(k)];
        scale += std::abs(c(k) * kept_b[static_cast<std::size_t>(k)]);
      }
    }
    if (std::abs(combo - b[i]) > kConsistencyTol * (1.0 + scale))
      throw InconsistentConstraints("constraint " + std::to_string(i) +
                                    " is dependent with an inconsistent right-hand side");
  }
  if (A_.empty()) throw InvalidArgument("all constraint matrices vanish");
}

Matrix SdpInstance::slack(const Vector& y) const {
  if (static_cast<std::size_t>(y.size()) != m()) throw DimensionMismatch("y has wrong length");
  Matrix S = C_.dense();
  for (std::size_t i = 0; i < m(); ++i) S -= y(static_cast<Eigen::Index>(i)) * A_[i].dense();
  return S;
}

Vector SdpInstance::apply(const Matrix& X) const {
  Vector r(static_cast<Eigen::Index>(m()));
  for (std::size_t i = 0; i < m(); ++i)
    r(static_cast<Eigen::Index>(i)) = (A_[i].dense().array() * X.array()).sum();
  return r;
}

PerturbedPair perturb(const SdpInstance& inst, double eps, double eta) {
  if (!(eps >= 0.0) || !(eta >= 0.0)) throw NegativeParameter("eps and eta must be nonnegative");
  SymMatrix C = inst.C();
  if (eps != 0.0) C += eps * SymMatrix::identity(inst.n());
  std::vector<double> b = inst.b();
  if (eta != 0.0)
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += eta * inst.A(i).trace();
  return PerturbedPair(std::make_shared<const SdpInstance>(inst),
                       SdpInstance(inst.name(), std::move(C), inst.A(), std::move(b)), eps, eta);
}

double DualizedInstance::offset(double eps, double eta) const {
  const auto n = static_cast<double>(C.n());
  return dot(C, x_star) + eta * C.trace() + eps * x_star.trace() + eps * eta * n;
}

Matrix null_space(const Matrix& R, double cutoff) {
  const Eigen::Index N = R.cols();
  if (R.rows() == 0) return Matrix::Identity(N, N);
  Eigen::JacobiSVD<Matrix> svd(R, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > cutoff * std::max(smax, 1.0)) ++rank;
  return svd.matrixV().rightCols(N - rank);
}

DualizedInstance dualize(const SdpInstance& inst, std::optional<SymMatrix> x_star) {
  const std::size_t n = inst.n();
  const auto N = static_cast<Eigen::Index>(n * (n + 1) / 2);
  Matrix R(static_cast<Eigen::Index>(inst.m()), N);
  Vector b(static_cast<Eigen::Index>(inst.m()));
  for (std::size_t i = 0; i < inst.m(); ++i) {
    R.row(static_cast<Eigen::Index>(i)) = svec(inst.A(i)).transpose();
    b(static_cast<Eigen::Index>(i)) = inst.b()[i];
  }

  SymMatrix xs;
  if (x_star) {
    if (x_star->n() != n) throw DimensionMismatch("X* dimension differs");
    xs = *x_star;
  } else {
    const Vector x = R.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    xs = smat(x);
  }
  const Vector res = R * svec(xs) - b;
  if (res.cwiseAbs().maxCoeff() > 1e-9 * (1.0 + b.norm()))
    throw NoFeasiblePoint("affine system Aⁱ•X = bᵢ is inconsistent");

  const Matrix Z = null_space(R, 1e-10);
  if (Z.cols() == 0) throw InvalidArgument("constraint map has trivial null space");
  std::vector<SymMatrix> Aperp;
  std::vector<double> bt;
  for (Eigen::Index k = 0; k < Z.cols(); ++k) {
    Aperp.push_back(smat(Z.col(k)));
    bt.push_back(dot(inst.C(), Aperp.back()));
  }
  DualizedInstance out{SdpInstance(inst.name() + "-dualized", xs, std::move(Aperp), std::move(bt)),
                       inst.C(), xs, static_cast<std::size_t>(Z.cols())};
  return out;
}

ObjectiveResiduals objective_and_residuals(const SdpInstance& inst, const SymMatrix& X,
                                           const std::vector<double>& y, const SymMatrix& S) {
  if (X.n() != inst.n() || S.n() != inst.n() || y.size() != inst.m())
    throw DimensionMismatch("triple dimensions do not match instance");
  ObjectiveResiduals r;
  r.primal_value = dot(inst.C(), X);
  for (std::size_t i = 0; i < inst.m(); ++i) {
    r.dual_value += inst.b()[i] * y[i];
    r.primal_res = std::max(r.primal_res, std::abs(dot(inst.A(i), X) - inst.b()[i]));
  }
  SymMatrix Rd = inst.C() - S;
  for (std::size_t i = 0; i < inst.m(); ++i) Rd -= y[i] * inst.A(i);
  r.dual_res = Rd.norm();
  return r;
}

std::vector<Matrix> dense_constraints(const SdpInstance& inst) {
  std::vector<Matrix> out;
  out.reserve(inst.m());
  for (const auto& Ai : inst.A()) out.push_back(Ai.dense());
  return out;
}

}  // namespace gapscope
