#include "gapscope/linalg.hpp"

#include "gapscope/errors.hpp"

#include <cmath>
#include <numbers>

namespace gapscope {

namespace {

void check_finite(double v) {
  if (!std::isfinite(v)) throw InvalidArgument("matrix entry is not finite");
}

}  // namespace

SymMatrix::SymMatrix(std::size_t n) : n_(n), packed_(n * (n + 1) / 2, 0.0) {}

SymMatrix SymMatrix::from_dense(const Matrix& M) {
  if (M.rows() != M.cols()) throw DimensionMismatch("symmetric matrix must be square");
  SymMatrix S(static_cast<std::size_t>(M.rows()));
  for (std::size_t j = 0; j < S.n_; ++j)
    for (std::size_t i = 0; i <= j; ++i) S.set(i, j, M(i, j));
  return S;
}

SymMatrix SymMatrix::from_packed(std::size_t n, std::vector<double> packed) {
  if (packed.size() != n * (n + 1) / 2) throw DimensionMismatch("packed length does not match n");
  for (double v : packed) check_finite(v);
  SymMatrix S;
  S.n_ = n;
  S.packed_ = std::move(packed);
  return S;
}

SymMatrix SymMatrix::identity(std::size_t n) {
  SymMatrix S(n);
  for (std::size_t i = 0; i < n; ++i) S.set(i, i, 1.0);
  return S;
}

SymMatrix SymMatrix::unit(std::size_t n, std::size_t i, std::size_t j) {
  SymMatrix S(n);
  S.set(i, j, 1.0);
  return S;
}

SymMatrix SymMatrix::diagonal(const std::vector<double>& d) {
  SymMatrix S(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) S.set(i, i, d[i]);
  return S;
}

double SymMatrix::operator()(std::size_t i, std::size_t j) const {
  return packed_[index(i, j)];
}

void SymMatrix::set(std::size_t i, std::size_t j, double v) {
  if (i >= n_ || j >= n_) throw DimensionMismatch("index out of range");
  check_finite(v);
  packed_[index(i, j)] = v;
}

Matrix SymMatrix::dense() const {
  Matrix M(n_, n_);
  for (std::size_t j = 0; j < n_; ++j)
    for (std::size_t i = 0; i <= j; ++i) M(i, j) = M(j, i) = packed_[index(i, j)];
  return M;
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

double SymMatrix::norm() const { return std::sqrt(dot(*this, *this)); }

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  if (o.n_ != n_) throw DimensionMismatch("dimension mismatch in +");
  for (std::size_t k = 0; k < packed_.size(); ++k) packed_[k] += o.packed_[k];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  if (o.n_ != n_) throw DimensionMismatch("dimension mismatch in -");
  for (std::size_t k = 0; k < packed_.size(); ++k) packed_[k] -= o.packed_[k];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (double& v : packed_) v *= s;
  return *this;
}

BlockSplit::BlockSplit(std::size_t r_, std::size_t n_) : r(r_), n(n_) {
  if (r > n) throw InvalidArgument("block split rank exceeds dimension");
}

double dot(const SymMatrix& A, const SymMatrix& B) {
  if (A.n() != B.n()) throw DimensionMismatch("dimension mismatch in dot");
  double s = 0.0;
  for (std::size_t j = 0; j < A.n(); ++j) {
    for (std::size_t i = 0; i < j; ++i) s += 2.0 * A(i, j) * B(i, j);
    s += A(j, j) * B(j, j);
  }
  return s;
}

Vector svec(const SymMatrix& M) {
  const std::size_t n = M.n();
  Vector v(n * (n + 1) / 2);
  std::size_t k = 0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i, ++k)
      v(k) = (i == j) ? M(i, j) : M(i, j) * std::numbers::sqrt2;
  return v;
}

Vector svec(const Matrix& M) {
  const auto n = static_cast<std::size_t>(M.rows());
  Vector v(n * (n + 1) / 2);
  std::size_t k = 0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i, ++k)
      v(k) = (i == j) ? M(i, j) : M(i, j) * std::numbers::sqrt2;
  return v;
}

SymMatrix smat(const Vector& v) {
  const auto len = static_cast<std::size_t>(v.size());
  const auto n = static_cast<std::size_t>((std::sqrt(8.0 * static_cast<double>(len) + 1.0) - 1.0) / 2.0 + 0.5);
  if (n * (n + 1) / 2 != len) throw DimensionMismatch("vector length is not triangular");
  std::vector<double> packed(len);
  std::size_t k = 0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i, ++k)
      packed[k] = (i == j) ? v(k) : v(k) / std::numbers::sqrt2;
  return SymMatrix::from_packed(n, std::move(packed));
}

SymEig sym_eig(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M));
  SymEig out{es.eigenvalues(), es.eigenvectors()};
  for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) {
    Eigen::Index imax = 0;
    out.vectors.col(c).cwiseAbs().maxCoeff(&imax);
    if (out.vectors(imax, c) < 0) out.vectors.col(c) *= -1.0;
  }
  return out;
}

double min_eig(const Matrix& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eig(const Matrix& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(M.rows() - 1);
}

double min_eig(const SymMatrix& M) { return min_eig(M.dense()); }
double max_eig(const SymMatrix& M) { return max_eig(M.dense()); }

bool is_psd(const SymMatrix& M, double tol) { return min_eig(M) >= -tol; }

Matrix block11(const Matrix& M, const BlockSplit& s) {
  return M.topLeftCorner(s.r, s.r);
}
Matrix block12(const Matrix& M, const BlockSplit& s) {
  return M.topRightCorner(s.r, s.k());
}
Matrix block22(const Matrix& M, const BlockSplit& s) {
  return M.bottomRightCorner(s.k(), s.k());
}

SymMatrix schur_complement(const SymMatrix& M, const BlockSplit& split, double tol) {
  if (split.n != M.n()) throw DimensionMismatch("split does not match matrix");
  const Matrix D = M.dense();
  const Matrix M22 = block22(D, split);
  if (split.k() > 0 && min_eig(M22) <= tol * (1.0 + M22.norm()))
    throw SingularBlock("trailing block is not positive definite");
  const Matrix M12 = block12(D, split);
  Matrix out = block11(D, split);
  if (split.k() > 0) out -= M12 * Eigen::LLT<Matrix>(M22).solve(M12.transpose());
  return SymMatrix::from_dense(symmetrize(out));
}

SymMatrix congruence(const SymMatrix& M, const Matrix& V) {
  if (V.rows() != V.cols() || static_cast<std::size_t>(V.cols()) != M.n())
    throw DimensionMismatch("congruence needs square V matching M");
  if (V.rows() > 0) {
    Eigen::JacobiSVD<Matrix> svd(V);
    const Vector& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (!(smin > 0.0) || sv(0) / smin >= 1e12) throw IllConditioned("congruence matrix is ill-conditioned");
  }
  return SymMatrix::from_dense(symmetrize(V * M.dense() * V.transpose()));
}

}  // namespace gapscope
