#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace gapscope {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dense real symmetric matrix holding the upper triangle, column-major.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n);  // zero matrix
  // Reads the upper triangle of M; the lower triangle is ignored.
  static SymMatrix from_dense(const Matrix& M);
  static SymMatrix from_packed(std::size_t n, std::vector<double> packed);
  static SymMatrix identity(std::size_t n);
  // Symmetric unit matrix: 1 at (i,j) and (j,i).
  static SymMatrix unit(std::size_t n, std::size_t i, std::size_t j);
  static SymMatrix diagonal(const std::vector<double>& d);

  std::size_t n() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const;
  void set(std::size_t i, std::size_t j, double v);
  const std::vector<double>& packed() const { return packed_; }

  Matrix dense() const;
  double trace() const;
  double norm() const;  // Frobenius

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  bool operator==(const SymMatrix& o) const { return n_ == o.n_ && packed_ == o.packed_; }

 private:
  static std::size_t index(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    return j * (j + 1) / 2 + i;
  }
  std::size_t n_ = 0;
  std::vector<double> packed_;
};

struct BlockSplit {
  std::size_t r = 0;
  std::size_t n = 0;

  BlockSplit() = default;
  BlockSplit(std::size_t r, std::size_t n);
  std::size_t k() const { return n - r; }
};

// Trace inner product A • B.
double dot(const SymMatrix& A, const SymMatrix& B);

Vector svec(const SymMatrix& M);
SymMatrix smat(const Vector& v);
Vector svec(const Matrix& M);  // symmetric dense input, upper triangle used

double min_eig(const SymMatrix& M);
double max_eig(const SymMatrix& M);
double min_eig(const Matrix& M);
double max_eig(const Matrix& M);
bool is_psd(const SymMatrix& M, double tol);

// M11 − M12 M22⁻¹ M12ᵀ with respect to the trailing (n−r) block.
SymMatrix schur_complement(const SymMatrix& M, const BlockSplit& split, double tol = 1e-12);

// V M Vᵀ.
SymMatrix congruence(const SymMatrix& M, const Matrix& V);

Matrix block11(const Matrix& M, const BlockSplit& s);
Matrix block12(const Matrix& M, const BlockSplit& s);
Matrix block22(const Matrix& M, const BlockSplit& s);

inline Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

// Eigen-decomposition with ascending eigenvalues and sign-normalized vectors
// (largest-magnitude component of each column positive).
struct SymEig {
  Vector values;
  Matrix vectors;
};
SymEig sym_eig(const Matrix& M);

}  // namespace gapscope
