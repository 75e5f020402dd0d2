#include "gapscope/facial.hpp"

#include "gapscope/errors.hpp"
#include "lmi.hpp"

#include <cmath>

namespace gapscope {

namespace {

using detail::AffineSet;
using detail::flatten;
using detail::solve_affine;

double inner(const Matrix& A, const Matrix& B) { return (A.array() * B.array()).sum(); }

// Feasibility system C − Σ yₖAₖ ⪰ 0 of one side.
struct LmiData {
  Matrix C;
  std::vector<Matrix> A;
};

LmiData side_data(const SdpInstance& inst, Side side) {
  if (side == Side::Dual) return {inst.C().dense(), dense_constraints(inst)};
  const DualizedInstance d = dualize(inst);
  return {d.instance.C().dense(), dense_constraints(d.instance)};
}

double data_scale(const LmiData& d) {
  double s = 1.0 + d.C.norm();
  for (const auto& Ak : d.A) s = std::max(s, 1.0 + Ak.norm());
  return s;
}

// Orthonormal basis of span(B) in canonical form: pivoted QR of the projector,
// each column's largest-magnitude entry made positive.
Matrix canonical_basis(const Matrix& B) {
  const Eigen::Index n = B.rows(), q = B.cols();
  if (q == 0) return Matrix(n, 0);
  const Matrix P = B * B.transpose();
  Eigen::ColPivHouseholderQR<Matrix> qr(P);
  Matrix Q = qr.householderQ() * Matrix::Identity(n, q);
  for (Eigen::Index j = 0; j < q; ++j) {
    Eigen::Index imax = 0;
    Q.col(j).cwiseAbs().maxCoeff(&imax);
    if (Q(imax, j) < 0.0) Q.col(j) *= -1.0;
  }
  return Q;
}

// Nearest p/q with q ≤ 16 when one lies within 1e-4. Degenerate auxiliary
// problems leave O(√gap) noise in the IPM output, well above roundoff.
bool round_rational(double x, double& out) {
  for (int q = 1; q <= 16; ++q) {
    const double p = std::round(x * q);
    if (std::abs(x - p / q) <= 1e-4) {
      out = p / q;
      return true;
    }
  }
  return false;
}

std::size_t count_rank(const Vector& eig, double thr) {
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < eig.size(); ++i)
    if (eig(i) > thr) ++k;
  return k;
}

// Cleans an IPM output into a direction with exact zero eigenvalues and
// orthogonality to the constraint data at working precision.
Matrix purify(const Matrix& X, const std::vector<Matrix>& B, double rank_tol) {
  const Eigen::Index q = X.rows();
  SymEig e = sym_eig(symmetrize(X));
  const double thr = rank_tol * (e.values.maxCoeff() + 1.0);
  const std::size_t rank = count_rank(e.values, thr);
  Vector lam = e.values;
  for (Eigen::Index i = 0; i < q; ++i)
    if (lam(i) <= thr) lam(i) = 0.0;
  Matrix s = e.vectors * lam.asDiagonal() * e.vectors.transpose();
  s = symmetrize(s);

  // Exact data often has a small-rational direction; accept it only when it
  // verifiably keeps every property.
  const double dmax = s.diagonal().maxCoeff();
  if (dmax > 0.0) {
    Matrix r(q, q);
    bool ok = true;
    for (Eigen::Index i = 0; i < q && ok; ++i)
      for (Eigen::Index j = 0; j < q && ok; ++j) ok = round_rational(s(i, j) / dmax, r(i, j));
    if (ok) {
      r = symmetrize(r);
      bool ortho = true;
      for (const auto& Bk : B) ortho = ortho && std::abs(inner(r, Bk)) <= 1e-12 * (1.0 + Bk.norm());
      const Vector re = sym_eig(r).values;
      const std::size_t rr = count_rank(re, rank_tol * (re.maxCoeff() + 1.0));
      if (ortho && re.minCoeff() >= -1e-14 && rr >= 1 && rr <= rank) return r / r.trace();
    }
  }

  // Alternating projection between the orthogonal complement of B (with unit
  // trace) and the rank-`rank` PSD matrices.
  const auto N = static_cast<Eigen::Index>(q * (q + 1) / 2);
  Matrix R(static_cast<Eigen::Index>(B.size()) + 1, N);
  Vector f = Vector::Zero(R.rows());
  for (std::size_t k = 0; k < B.size(); ++k) R.row(static_cast<Eigen::Index>(k)) = svec(B[k]).transpose();
  R.row(R.rows() - 1) = svec(Matrix(Matrix::Identity(q, q))).transpose();
  f(f.size() - 1) = s.trace();
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(R);
  for (int round = 0; round < 5; ++round) {
    Vector v = svec(s);
    v -= cod.solve(R * v - f);
    const Matrix t = smat(v).dense();
    SymEig te = sym_eig(t);
    Vector tl = te.values;
    for (Eigen::Index i = 0; i < q; ++i)
      if (i < q - static_cast<Eigen::Index>(rank) || tl(i) < 0.0) tl(i) = 0.0;
    s = symmetrize(te.vectors * tl.asDiagonal() * te.vectors.transpose());
  }
  return s / s.trace();
}

struct Step {
  Matrix face_part;  // PSD direction on the current face, trace 1
  Matrix full;       // extended to the whole space, orthogonal to the data
  Matrix range;      // new complement columns (full space), descending eigenvalue
  Matrix face;       // basis of the reduced face
};

class Reducer {
 public:
  Reducer(LmiData data, const FrOptions& opts)
      : d_(std::move(data)),
        opts_(opts),
        n_(d_.C.rows()),
        Q_(Matrix::Identity(n_, n_)),
        W_(n_, 0),
        scale_(data_scale(d_)) {}

  std::optional<Step> step() {
    if (Q_.cols() == 0) return std::nullopt;
    const auto k = static_cast<Eigen::Index>(d_.A.size());

    // y with (C − Σ yA)W = 0 keeps the slack inside the current face.
    Matrix E(n_ * W_.cols(), k);
    for (Eigen::Index j = 0; j < k; ++j) E.col(j) = flatten(d_.A[static_cast<std::size_t>(j)] * W_, false);
    const AffineSet aff = solve_affine(E, flatten(d_.C * W_, false), opts_.equation_cutoff);
    if (aff.residual > 1e-8 * scale_)
      throw InfeasibleDetected("face equations are inconsistent (residual " +
                               std::to_string(aff.residual) + ")");

    Matrix slack0 = d_.C;
    for (Eigen::Index j = 0; j < k; ++j) slack0 -= aff.y0(j) * d_.A[static_cast<std::size_t>(j)];
    const Matrix Ccur = symmetrize(Q_.transpose() * slack0 * Q_);
    std::vector<Matrix> Acur;
    for (Eigen::Index c = 0; c < aff.N.cols(); ++c) {
      Matrix M = Matrix::Zero(n_, n_);
      for (Eigen::Index j = 0; j < k; ++j) M += aff.N(j, c) * d_.A[static_cast<std::size_t>(j)];
      Acur.push_back(symmetrize(Q_.transpose() * M * Q_));
    }

    const auto X = auxiliary(Ccur, Acur);
    if (!X) return std::nullopt;

    std::vector<Matrix> orth = Acur;
    orth.push_back(Ccur);
    Step st;
    st.face_part = purify(*X, orth, opts_.rank_tol);
    const SymEig e = sym_eig(st.face_part);
    const double thr = opts_.rank_tol * (e.values.maxCoeff() + 1.0);
    const auto q = Q_.cols();
    const auto rank = static_cast<Eigen::Index>(count_rank(e.values, thr));
    // Ascending eigenvalues: the leading q − rank vectors span the null space.
    const Matrix null_vecs = e.vectors.leftCols(q - rank);
    Matrix range_vecs(q, rank);
    for (Eigen::Index i = 0; i < rank; ++i) range_vecs.col(i) = e.vectors.col(q - 1 - i);

    st.full = extend(st.face_part);
    st.face = canonical_basis(Q_ * null_vecs);
    st.range = Q_ * range_vecs;
    Matrix W(n_, W_.cols() + rank);
    W << st.range, W_;
    W_ = W;
    Q_ = st.face;
    return st;
  }

  const Matrix& face() const { return Q_; }
  const Matrix& complement() const { return W_; }
  const LmiData& data() const { return d_; }

 private:
  // min Ccur•X s.t. Acurⱼ•X = 0, I•X = 1, X ⪰ 0. Its value is max over z of
  // λmin(Ccur − Σ zAcur), so a positive value certifies an interior point.
  std::optional<Matrix> auxiliary(const Matrix& Ccur, const std::vector<Matrix>& Acur) {
    const auto q = Ccur.rows();
    std::vector<SymMatrix> A;
    std::vector<double> b;
    for (const auto& M : Acur) {
      A.push_back(SymMatrix::from_dense(M));
      b.push_back(0.0);
    }
    A.push_back(SymMatrix::identity(static_cast<std::size_t>(q)));
    b.push_back(1.0);
    SolveResult res;
    try {
      res = solve(SdpInstance("aux", SymMatrix::from_dense(Ccur), std::move(A), std::move(b)),
                  opts_.solver);
    } catch (const InconsistentConstraints&) {
      return std::nullopt;  // I ∈ span(Acur): some z makes the slack definite
    }
    if (res.status == Status::Unbounded || res.status == Status::InfeasibleDetected)
      return std::nullopt;
    const double value = 0.5 * (res.primal_value + res.dual_value);
    if (res.status != Status::Optimal) {
      const bool usable = res.primal_res <= 1e-7 && std::abs(res.gap) <= 1e-6 * (1.0 + std::abs(value));
      if (!usable)
        throw AuxiliarySolveFailed("auxiliary solve ended with status " +
                                   std::string(to_string(res.status)));
    }
    const double tol = opts_.slater_tol * (1.0 + Ccur.norm());
    if (res.dual_value > tol) return std::nullopt;
    if (value < -tol)
      throw InfeasibleDetected("auxiliary problem has negative value " + std::to_string(value));
    return res.X.dense();
  }

  // Full-space direction Q s Qᵀ plus the minimum-norm correction on blocks
  // touching earlier ranges that restores orthogonality to C and every Aₖ.
  Matrix extend(const Matrix& s) const {
    const Matrix base = Q_ * s * Q_.transpose();
    const Eigen::Index w = W_.cols();
    if (w == 0) return symmetrize(base);
    std::vector<Matrix> basis;
    for (Eigen::Index i = 0; i < Q_.cols(); ++i)
      for (Eigen::Index j = 0; j < w; ++j) {
        const Matrix u = Q_.col(i) * W_.col(j).transpose();
        basis.push_back(u + u.transpose());
      }
    for (Eigen::Index i = 0; i < w; ++i)
      for (Eigen::Index j = i; j < w; ++j) {
        const Matrix u = W_.col(i) * W_.col(j).transpose();
        basis.push_back(i == j ? Matrix(u) : Matrix(u + u.transpose()));
      }
    std::vector<const Matrix*> targets{&d_.C};
    for (const auto& Ak : d_.A) targets.push_back(&Ak);
    Matrix G(static_cast<Eigen::Index>(targets.size()), static_cast<Eigen::Index>(basis.size()));
    Vector h(static_cast<Eigen::Index>(targets.size()));
    for (std::size_t t = 0; t < targets.size(); ++t) {
      h(static_cast<Eigen::Index>(t)) = -inner(*targets[t], base);
      for (std::size_t c = 0; c < basis.size(); ++c)
        G(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = inner(*targets[t], basis[c]);
    }
    const Vector x = G.completeOrthogonalDecomposition().solve(h);
    Matrix out = base;
    for (std::size_t c = 0; c < basis.size(); ++c) out += x(static_cast<Eigen::Index>(c)) * basis[c];
    return symmetrize(out);
  }

  LmiData d_;
  FrOptions opts_;
  Eigen::Index n_;
  Matrix Q_;
  Matrix W_;
  double scale_;
};

SymMatrix clean(const Matrix& M) {
  Matrix c = M;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (std::abs(c.data()[i]) < 1e-15) c.data()[i] = 0.0;  // also clears −0
  return SymMatrix::from_dense(c);
}

}  // namespace

std::string_view to_string(Side s) { return s == Side::Primal ? "primal" : "dual"; }

Side side_from_string(std::string_view s) {
  if (s == "primal") return Side::Primal;
  if (s == "dual") return Side::Dual;
  throw InvalidArgument("side must be 'primal' or 'dual', got '" + std::string(s) + "'");
}

std::optional<SymMatrix> find_reducing_direction(const SdpInstance& inst, Side side,
                                                 const FrOptions& opts) {
  Reducer red(side_data(inst, side), opts);
  const auto st = red.step();
  if (!st) return std::nullopt;
  return clean(st->full);
}

FaceChain facial_reduction(const SdpInstance& inst, Side side, const FrOptions& opts) {
  Reducer red(side_data(inst, side), opts);
  const LmiData& d = red.data();
  FaceChain chain;
  chain.side = side;
  chain.ranks.push_back(inst.n());
  while (chain.directions.size() < inst.n()) {
    const auto st = red.step();
    if (!st) break;
    DirectionResidual res;
    res.objective = std::abs(inner(st->full, d.C));
    for (const auto& Ak : d.A) res.max_constraint = std::max(res.max_constraint, std::abs(inner(st->full, Ak)));
    res.face_min_eig = min_eig(st->face_part);
    chain.directions.push_back(clean(st->full));
    chain.face_directions.push_back(clean(st->face_part));
    chain.residuals.push_back(res);
    chain.ranks.push_back(static_cast<std::size_t>(st->face.cols()));
  }
  chain.sd_upper = chain.directions.size();
  chain.r = static_cast<std::size_t>(red.face().cols());
  const auto n = static_cast<Eigen::Index>(inst.n());
  Matrix basis(n, n);
  basis << red.face(), red.complement();
  chain.V = basis.transpose();
  for (Eigen::Index i = 0; i < chain.V.size(); ++i)
    if (std::abs(chain.V.data()[i]) < 1e-15) chain.V.data()[i] = 0.0;
  return chain;
}

std::size_t singularity_degree(const FaceChain& chain) { return chain.sd_upper; }

Json to_json(const FaceChain& chain) {
  Json dirs = Json::array();
  for (const auto& s : chain.directions) dirs.push_back(to_json(s));
  Json res = Json::array();
  for (const auto& r : chain.residuals)
    res.push_back({{"max_constraint", r.max_constraint},
                   {"objective", r.objective},
                   {"face_min_eig", r.face_min_eig}});
  return {{"side", std::string(to_string(chain.side))},
          {"steps", chain.sd_upper},
          {"directions", std::move(dirs)},
          {"ranks", chain.ranks},
          {"r", chain.r},
          {"V", to_json(chain.V)},
          {"residuals", std::move(res)}};
}

// ---------------------------------------------------------------------------

ReducedInstance::ReducedInstance(SdpInstance base, BlockSplit split, Matrix V, std::size_t steps)
    : base_(std::move(base)), split_(split), V_(std::move(V)), steps_(steps) {
  if (split_.n != base_.n()) throw DimensionMismatch("split dimension differs from instance");
}

Matrix ReducedInstance::L(const Vector& y) const { return base_.slack(y); }
Matrix ReducedInstance::L11(const Vector& y) const { return block11(L(y), split_); }
Matrix ReducedInstance::L12(const Vector& y) const { return block12(L(y), split_); }
Matrix ReducedInstance::L22(const Vector& y) const { return block22(L(y), split_); }

namespace {

// Affine parametrization y = y0 + N w of L12(y) = S12, L22(y) + s11·I = S22.
AffineSet rd_equalities(const ReducedInstance& red, const PerturbationS& S) {
  const BlockSplit& sp = red.split();
  const SdpInstance& base = red.base();
  const auto m = static_cast<Eigen::Index>(base.m());
  const auto kk = static_cast<Eigen::Index>(sp.k());
  const auto r = static_cast<Eigen::Index>(sp.r);
  const Matrix C = base.C().dense();
  const Eigen::Index rows12 = r * kk;
  const Eigen::Index rows22 = kk * (kk + 1) / 2;
  Matrix E(rows12 + rows22, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Matrix Aj = base.A(static_cast<std::size_t>(j)).dense();
    E.col(j) << flatten(block12(Aj, sp), false), flatten(block22(Aj, sp), true);
  }
  const Matrix S12 = S.S12.size() ? S.S12 : Matrix::Zero(r, kk);
  const Matrix S22 = S.S22.size() ? S.S22 : Matrix::Zero(kk, kk);
  if (S12.rows() != r || S12.cols() != kk || S22.rows() != kk || S22.cols() != kk)
    throw DimensionMismatch("perturbation blocks do not match the split");
  Vector f(rows12 + rows22);
  f << flatten(block12(C, sp) - S12, false),
      flatten(block22(C, sp) + S.s11 * Matrix::Identity(kk, kk) - S22, true);
  AffineSet aff = solve_affine(E, f, 1e-10);
  if (aff.residual > 1e-8 * (1.0 + f.norm()))
    throw NotInPerturbationSpace(aff.residual, "equality constraints of RD(S) are inconsistent");
  return aff;
}

// Data of L11(y0 + N w) + shift·I as an LMI in w.
detail::LmiProblem rd_lmi(const ReducedInstance& red, const AffineSet& aff, double shift) {
  const BlockSplit& sp = red.split();
  const SdpInstance& base = red.base();
  const auto r = static_cast<Eigen::Index>(sp.r);
  detail::LmiProblem p;
  p.F0 = block11(red.L(aff.y0), sp) + shift * Matrix::Identity(r, r);
  std::vector<Matrix> A11;
  for (const auto& Aj : base.A()) A11.push_back(block11(Aj.dense(), sp));
  for (Eigen::Index c = 0; c < aff.N.cols(); ++c) {
    Matrix F = Matrix::Zero(r, r);
    for (std::size_t j = 0; j < A11.size(); ++j) F += aff.N(static_cast<Eigen::Index>(j), c) * A11[j];
    p.F.push_back(F);
  }
  const Vector b = Eigen::Map<const Vector>(base.b().data(), static_cast<Eigen::Index>(base.m()));
  p.g = aff.N.transpose() * b;
  return p;
}

}  // namespace

ReducedInstance reduce_to_rd(const SdpInstance& inst, const FaceChain& chain, const FrOptions& opts) {
  if (chain.side != Side::Dual) throw InvalidArgument("reduce_to_rd needs a dual-side chain");
  if (chain.V.rows() != static_cast<Eigen::Index>(inst.n()))
    throw DimensionMismatch("chain does not match instance");
  std::vector<SymMatrix> A;
  for (const auto& Ai : inst.A()) A.push_back(congruence(Ai, chain.V));
  ReducedInstance red(SdpInstance(inst.name() + "-rescaled", congruence(inst.C(), chain.V),
                                  std::move(A), inst.b()),
                      BlockSplit(chain.r, inst.n()), chain.V, chain.sd_upper);

  const AffineSet aff = rd_equalities(red, PerturbationS{});
  const auto r = static_cast<Eigen::Index>(chain.r);
  Vector y = aff.y0;
  if (r > 0) {
    // max λ s.t. L11(y0 + Nw) − λI ⪰ 0, λ ≤ 1.
    const detail::LmiProblem base = rd_lmi(red, aff, 0.0);
    detail::LmiProblem p;
    Matrix one = Matrix::Ones(1, 1);
    p.F0 = detail::block_diag({base.F0, one});
    for (const auto& F : base.F) p.F.push_back(detail::block_diag({F, Matrix::Zero(1, 1)}));
    p.F.push_back(detail::block_diag({Matrix::Identity(r, r), one}));
    p.g = Vector::Zero(static_cast<Eigen::Index>(p.F.size()));
    p.g(p.g.size() - 1) = 1.0;
    const detail::LmiResult res = detail::solve_lmi(p, opts.solver);
    if (res.status == Status::Optimal || res.status == Status::MaxIters ||
        res.status == Status::NumericalFailure)
      y = aff.y0 + aff.N * res.z.head(aff.N.cols());
  }
  red.witness_ = y;
  red.witness_min_eig_ = r > 0 ? min_eig(red.L11(y)) : 1.0;
  if (!(red.witness_min_eig_ > 1e-9))
    throw WitnessNotFound("no interior point of the reduced problem (λmin " +
                          std::to_string(red.witness_min_eig_) + ")");
  return red;
}

PerturbationS decompose_perturbation(const ReducedInstance& red, const SymMatrix& S) {
  if (S.n() != red.n()) throw DimensionMismatch("S dimension differs from the reduced instance");
  const Matrix D = S.dense();
  const BlockSplit& sp = red.split();
  const auto r = static_cast<Eigen::Index>(sp.r);
  PerturbationS out;
  const Matrix S11 = block11(D, sp);
  out.s11 = r > 0 ? S11.trace() / static_cast<double>(r) : 0.0;
  const double off = (S11 - out.s11 * Matrix::Identity(r, r)).norm();
  if (off > 1e-10 * (1.0 + D.norm()))
    throw NotInPerturbationSpace(off, "S11 is not a multiple of the identity");
  out.S12 = block12(D, sp);
  out.S22 = block22(D, sp);
  rd_equalities(red, out);  // throws when the L-part is not attainable
  return out;
}

RdSolution solve_rd(const ReducedInstance& red, const PerturbationS& S, const SolveOptions& opts) {
  const AffineSet aff = rd_equalities(red, S);
  const SdpInstance& base = red.base();
  const Vector b = Eigen::Map<const Vector>(base.b().data(), static_cast<Eigen::Index>(base.m()));
  RdSolution out;
  if (red.r() == 0) {
    out.y = aff.y0;
    out.value = b.dot(aff.y0);
    out.status = (aff.N.transpose() * b).norm() > 1e-12 ? Status::Unbounded : Status::Optimal;
    return out;
  }
  const detail::LmiResult res = detail::solve_lmi(rd_lmi(red, aff, S.s11), opts);
  out.status = res.status;
  out.y = aff.y0 + aff.N * res.z;
  out.value = b.dot(out.y);
  return out;
}

RdSolution solve_rd(const ReducedInstance& red, const SolveOptions& opts) {
  return solve_rd(red, PerturbationS{}, opts);
}

double w_of_S(const ReducedInstance& red, const PerturbationS& S, const SolveOptions& opts) {
  const RdSolution sol = solve_rd(red, S, opts);
  if (sol.status != Status::Optimal)
    throw SolverFailure("RD(S) solve ended with status " + std::string(to_string(sol.status)));
  return sol.value;
}

}  // namespace gapscope
