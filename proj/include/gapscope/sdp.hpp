#pragma once

#include "gapscope/linalg.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gapscope {

// Standard-form pair
//   (P) min C•X  s.t.  Aⁱ•X = bᵢ, X ⪰ 0
//   (D) max bᵀy  s.t.  C − Σ yᵢAⁱ ⪰ 0.
// Linearly dependent constraints are reduced to a basis at construction;
// basis_indices() lists the kept input positions.
class SdpInstance {
 public:
  SdpInstance(std::string name, SymMatrix C, std::vector<SymMatrix> A, std::vector<double> b);

  const std::string& name() const { return name_; }
  std::size_t n() const { return C_.n(); }
  std::size_t m() const { return A_.size(); }
  const SymMatrix& C() const { return C_; }
  const std::vector<SymMatrix>& A() const { return A_; }
  const SymMatrix& A(std::size_t i) const { return A_[i]; }
  const std::vector<double>& b() const { return b_; }
  const std::vector<std::size_t>& basis_indices() const { return basis_; }
  std::size_t input_m() const { return input_m_; }

  // C − Σ yᵢAⁱ
  Matrix slack(const Vector& y) const;
  Vector apply(const Matrix& X) const;  // (Aⁱ•X)ᵢ

  bool operator==(const SdpInstance& o) const {
    return name_ == o.name_ && C_ == o.C_ && A_ == o.A_ && b_ == o.b_;
  }

 private:
  std::string name_;
  SymMatrix C_;
  std::vector<SymMatrix> A_;
  std::vector<double> b_;
  std::vector<std::size_t> basis_;
  std::size_t input_m_ = 0;
};

// Data of P(ε,η)/D(ε,η): cost C + εI, right-hand side bᵢ + η·(Aⁱ•I).
// Both problems share one instance.
class PerturbedPair {
 public:
  PerturbedPair(std::shared_ptr<const SdpInstance> base, SdpInstance data, double eps, double eta)
      : base_(std::move(base)), data_(std::move(data)), eps_(eps), eta_(eta) {}

  const SdpInstance& primal() const { return data_; }
  const SdpInstance& dual() const { return data_; }
  const SdpInstance& base() const { return *base_; }
  double eps() const { return eps_; }
  double eta() const { return eta_; }
  bool boundary() const { return eps_ == 0.0 || eta_ == 0.0; }

 private:
  std::shared_ptr<const SdpInstance> base_;
  SdpInstance data_;
  double eps_;
  double eta_;
};

PerturbedPair perturb(const SdpInstance& inst, double eps, double eta);

// Primal rewritten in dual format: X = X* − Σ ỹᵢ A⊥ⁱ with A⊥ an orthonormal
// basis of the null space of the constraint map and b̃ᵢ = C•A⊥ⁱ.
struct DualizedInstance {
  SdpInstance instance;  // C := X*, A := A⊥, b := b̃
  SymMatrix C;           // original cost, needed by offset()
  SymMatrix x_star;
  std::size_t nbar = 0;

  // (C+εI)•(X*+ηI)
  double offset(double eps, double eta) const;
};

DualizedInstance dualize(const SdpInstance& inst, std::optional<SymMatrix> x_star = std::nullopt);

struct ObjectiveResiduals {
  double primal_value = 0.0;
  double dual_value = 0.0;
  double primal_res = 0.0;  // max |Aⁱ•X − bᵢ|
  double dual_res = 0.0;    // ‖C − Σ Aⁱyᵢ − S‖_F
};

ObjectiveResiduals objective_and_residuals(const SdpInstance& inst, const SymMatrix& X,
                                           const std::vector<double>& y, const SymMatrix& S);

std::vector<Matrix> dense_constraints(const SdpInstance& inst);

// Orthonormal basis (columns) of the null space of the rows of R, cutoff on
// singular values relative to the largest one.
Matrix null_space(const Matrix& R, double cutoff = 1e-10);

}  // namespace gapscope
