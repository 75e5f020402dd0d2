#pragma once

#include "gapscope/sdp.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gapscope {

struct GalleryEntry {
  SdpInstance instance;
  std::optional<double> known_vp;
  std::optional<double> known_vd;
  std::optional<int> known_sd_primal;
  std::optional<int> known_sd_dual;
  std::string sd_primal_note;             // e.g. "unverified" when no value is asserted
  std::function<double(double)> va_oracle;  // θ ↦ v_a(θ) when known in closed form
};

// n = 3 gap instance: C = E11, A¹ = E11 + E23 + E32, A² = E22, b = (1, 0).
// v(P) = 1, v(D) = 0, singularity degree 1 on both sides.
GalleryEntry ramana_gap();

// v_a(θ) of ramana_gap(): 1 − tan θ for tan θ ≤ 1/2, cot θ / 4 beyond.
// Throws DomainError outside [0, π/2].
double va_formula_example1(double theta);

// n = 4 instance whose dual has singularity degree 2 and whose limiting value
// jumps from 1 to 0 at θ = π/2.
GalleryEntry sd2_counterexample();

struct CexParams {
  double gamma = 0.3;
  double zeta = 0.1;
  double xi = 0.01;
  double alpha = 1.0;
  double t = 1e-4;

  // ξ = t, so the slack in y₂ vanishes with t.
  static CexParams with_default_xi(double gamma, double zeta, double alpha, double t) {
    return {gamma, zeta, t, alpha, t};
  }
};

struct CexPoint {
  std::array<double, 3> y{};
  double objective = 0.0;              // (1+t)y₁ + t y₂ + t y₃, the objective of D(tα, t)
  std::array<double, 4> conditions{};  // the four strict inequalities, as positive margins
};

// Explicit strictly feasible point of D(tα, t) for sd2_counterexample().
// Throws NotYetFeasible when a margin is not positive (shrink t), and
// InvalidArgument for nonpositive parameters or γ² + ζ ≥ 1.
CexPoint cex_feasible_point(const CexParams& p);

// The 4×4 slack C + tαI − Σ yᵢAⁱ of sd2_counterexample() at (tα, t).
Matrix cex_slack(const std::array<double, 3>& y, double alpha, double t);

// Random instance with a planted interior pair X₀ ≻ 0, S₀ ≻ 0; deterministic
// per seed. Requires 1 ≤ m ≤ n(n+1)/2.
GalleryEntry strongly_feasible_control(std::size_t n, std::size_t m, std::uint64_t seed);

// "ramana", "sd2", "control" (control = strongly_feasible_control(2, 1, 7)).
GalleryEntry gallery_entry(const std::string& name);
std::vector<std::string> gallery_names();

// Writes <dir>/<name>.dat-s and <dir>/<name>.json for every gallery entry.
void export_gallery(const std::filesystem::path& dir);

}  // namespace gapscope
