#pragma once

#include "gapscope/ipm.hpp"
#include "gapscope/sdp.hpp"
#include "gapscope/sdpa.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace gapscope {

enum class Side { Primal, Dual };

std::string_view to_string(Side s);
Side side_from_string(std::string_view s);  // "primal" | "dual", else InvalidArgument

struct FrOptions {
  SolveOptions solver{1e-12, 1e-12, 200, 0.98, {}};
  double rank_tol = 1e-7;    // eigenvalue cutoff relative to λmax + 1
  double slater_tol = 1e-7;  // auxiliary value above this certifies Slater
  double equation_cutoff = 1e-9;
};

// Orthogonality residuals of one reducing direction against the side's data.
struct DirectionResidual {
  double max_constraint = 0.0;  // max_j |s•Aʲ| (dual) or |s•A⊥ʲ| (primal)
  double objective = 0.0;       // |s•C| (dual) or |s•X*| (primal)
  double face_min_eig = 0.0;    // λmin of s restricted to the face it reduces
};

// Directions live in the n×n space of the side's LMI. On the primal side the
// LMI is X* − Σ ỹᵢA⊥ⁱ ⪰ 0 from dualize().
struct FaceChain {
  Side side = Side::Dual;
  std::vector<SymMatrix> directions;
  std::vector<SymMatrix> face_directions;  // PSD part in the coordinates of the face it cuts
  std::vector<std::size_t> ranks;          // face dimensions n = ranks[0] > ranks[1] > …
  std::vector<DirectionResidual> residuals;
  Matrix V;             // orthogonal; first r rows span the final face
  std::size_t r = 0;
  std::size_t sd_upper = 0;

  Matrix face_basis() const { return V.topRows(static_cast<Eigen::Index>(r)).transpose(); }
};

// First reducing direction of the side's feasibility system, normalized to
// trace 1; none when the auxiliary problem certifies Slater's condition.
std::optional<SymMatrix> find_reducing_direction(const SdpInstance& inst, Side side,
                                                 const FrOptions& opts = {});

FaceChain facial_reduction(const SdpInstance& inst, Side side, const FrOptions& opts = {});

// Number of steps of a maximal-rank greedy chain. An upper bound on the
// singularity degree; the two agree when every step attains maximal rank.
std::size_t singularity_degree(const FaceChain& chain);

Json to_json(const FaceChain& chain);

struct PerturbationS {
  double s11 = 0.0;
  Matrix S12;  // r × (n−r)
  Matrix S22;  // (n−r) × (n−r)
};

// The dual problem rescaled by V, with L(y) = V(C − Σ yᵢAⁱ)Vᵀ split at r.
class ReducedInstance {
 public:
  ReducedInstance(SdpInstance base, BlockSplit split, Matrix V, std::size_t steps);

  const SdpInstance& base() const { return base_; }
  const BlockSplit& split() const { return split_; }
  const Matrix& V() const { return V_; }
  std::size_t steps() const { return steps_; }
  std::size_t n() const { return split_.n; }
  std::size_t r() const { return split_.r; }

  Matrix L(const Vector& y) const;
  Matrix L11(const Vector& y) const;
  Matrix L12(const Vector& y) const;
  Matrix L22(const Vector& y) const;
  double l11(const Vector& y) const { return L11(y).trace(); }
  double l22(const Vector& y) const { return L22(y).trace(); }
  double l12_sq(const Vector& y) const { return L12(y).squaredNorm(); }

  const Vector& slater_witness() const { return witness_; }
  double witness_min_eig() const { return witness_min_eig_; }

 private:
  friend ReducedInstance reduce_to_rd(const SdpInstance&, const FaceChain&, const FrOptions&);
  SdpInstance base_;
  BlockSplit split_;
  Matrix V_;
  std::size_t steps_ = 0;
  Vector witness_;
  double witness_min_eig_ = 0.0;
};

// Requires a dual-side chain. Throws WitnessNotFound when no y with L11 ≻ 0
// satisfies the equality constraints.
ReducedInstance reduce_to_rd(const SdpInstance& inst, const FaceChain& chain,
                             const FrOptions& opts = {});

// Splits S as s11·I plus an element of the range {[[0, L12(ŷ)], [·, L22(ŷ)]]}.
// S11 must be a multiple of the identity; throws NotInPerturbationSpace.
PerturbationS decompose_perturbation(const ReducedInstance& red, const SymMatrix& S);

struct RdSolution {
  double value = 0.0;
  Vector y;
  Status status = Status::NumericalFailure;
};

// max bᵀy s.t. L11(y) + s11·I ⪰ 0, L12(y) = S12, L22(y) + s11·I = S22.
RdSolution solve_rd(const ReducedInstance& red, const PerturbationS& S,
                    const SolveOptions& opts = {1e-10, 1e-10, 200, 0.98, {}});
RdSolution solve_rd(const ReducedInstance& red,
                    const SolveOptions& opts = {1e-10, 1e-10, 200, 0.98, {}});

// Optimal value of RD(S). Throws NotInPerturbationSpace when the equality
// constraints are inconsistent and SolverFailure when the LMI solve fails.
double w_of_S(const ReducedInstance& red, const PerturbationS& S,
              const SolveOptions& opts = {1e-10, 1e-10, 200, 0.98, {}});

}  // namespace gapscope
