#include "gapscope/gallery.hpp"

#include "gapscope/errors.hpp"
#include "gapscope/sdpa.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace gapscope {

namespace {

SymMatrix E(std::size_t n, std::size_t i, std::size_t j) { return SymMatrix::unit(n, i - 1, j - 1); }

}  // namespace

double va_formula_example1(double theta) {
  if (!(theta >= 0.0) || !(theta <= std::numbers::pi / 2))
    throw DomainError("theta must lie in [0, pi/2]");
  if (theta == std::numbers::pi / 2) return 0.0;
  const double tn = std::tan(theta);
  return tn <= 0.5 ? 1.0 - tn : 0.25 / tn;
}

GalleryEntry ramana_gap() {
  const std::size_t n = 3;
  SdpInstance inst("ramana", E(n, 1, 1), {E(n, 1, 1) + E(n, 2, 3), E(n, 2, 2)}, {1.0, 0.0});
  GalleryEntry e{std::move(inst), 1.0, 0.0, 1, 1, "", va_formula_example1};
  return e;
}

GalleryEntry sd2_counterexample() {
  const std::size_t n = 4;
  SdpInstance inst("sd2", E(n, 1, 1),
                   {E(n, 1, 1) + E(n, 2, 3), E(n, 2, 2), E(n, 1, 3) + E(n, 1, 4) + E(n, 3, 3)},
                   {1.0, 0.0, 0.0});
  GalleryEntry e{std::move(inst), 1.0, 0.0, std::nullopt, 2, "unverified",
                 [](double theta) {
                   if (!(theta >= 0.0) || !(theta <= std::numbers::pi / 2))
                     throw DomainError("theta must lie in [0, pi/2]");
                   return theta < std::numbers::pi / 2 ? 1.0 : 0.0;
                 }};
  return e;
}

Matrix cex_slack(const std::array<double, 3>& y, double alpha, double t) {
  const double ta = t * alpha;
  Matrix S(4, 4);
  S << 1 + ta - y[0], 0, -y[2], -y[2],
       0, ta - y[1], -y[0], 0,
       -y[2], -y[0], -y[2] + ta, 0,
       -y[2], 0, 0, ta;
  return S;
}

CexPoint cex_feasible_point(const CexParams& p) {
  if (!(p.gamma > 0) || !(p.zeta > 0) || !(p.xi > 0) || !(p.alpha > 0) || !(p.t > 0))
    throw InvalidArgument("counterexample parameters must be positive");
  if (!(p.gamma * p.gamma + p.zeta < 1.0)) throw InvalidArgument("need gamma^2 + zeta < 1");
  const double ta = p.t * p.alpha;
  CexPoint out;
  const double y3 = -p.gamma * std::sqrt(ta);
  const double y1 = 1.0 - p.gamma * p.gamma - p.zeta;
  const double a = 1.0 + ta - y1 - y3 * y3 / ta;
  if (!(a > 0.0)) throw NotYetFeasible("leading Schur complement is not positive; shrink t");
  const double dd = -y3 + ta - y3 * y3 / a;
  if (!(dd > 0.0)) throw NotYetFeasible("trailing Schur complement is not positive; shrink t");
  const double y2 = ta - y1 * y1 / dd - p.xi;
  out.y = {y1, y2, y3};
  out.conditions = {ta - y2, a, ta - y1 * y1 / dd - y2, dd};
  for (double c : out.conditions)
    if (!(c > 0.0)) throw NotYetFeasible("feasibility margin is not positive; shrink t");
  out.objective = (1.0 + p.t) * y1 + p.t * y2 + p.t * y3;
  return out;
}

GalleryEntry strongly_feasible_control(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n == 0 || m < 1 || m > n * (n + 1) / 2) throw InvalidArgument("need 1 <= m <= n(n+1)/2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto N = static_cast<Eigen::Index>(n);
  auto random_sym = [&] {
    Matrix M(N, N);
    for (Eigen::Index j = 0; j < N; ++j)
      for (Eigen::Index i = 0; i <= j; ++i) M(i, j) = M(j, i) = g(rng);
    return M;
  };
  auto random_pd = [&] {
    Matrix B(N, N);
    for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = g(rng);
    return Matrix(B * B.transpose() / static_cast<double>(n) + 0.5 * Matrix::Identity(N, N));
  };
  std::vector<Matrix> A;
  for (std::size_t i = 0; i < m; ++i) A.push_back(random_sym());
  const Matrix X0 = random_pd();
  const Matrix S0 = random_pd();
  Matrix C = S0;
  std::vector<double> b;
  std::vector<SymMatrix> As;
  for (const auto& Ai : A) {
    C += g(rng) * Ai;
    b.push_back((Ai.array() * X0.array()).sum());
    As.push_back(SymMatrix::from_dense(Ai));
  }
  SdpInstance inst("control", SymMatrix::from_dense(C), std::move(As), std::move(b));
  GalleryEntry e{std::move(inst), std::nullopt, std::nullopt, 0, 0, "", {}};
  return e;
}

std::vector<std::string> gallery_names() { return {"ramana", "sd2", "control"}; }

GalleryEntry gallery_entry(const std::string& name) {
  if (name == "ramana") return ramana_gap();
  if (name == "sd2") return sd2_counterexample();
  if (name == "control") return strongly_feasible_control(2, 1, 7);
  throw InvalidArgument("unknown gallery instance '" + name + "'");
}

void export_gallery(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& name : gallery_names()) {
    const GalleryEntry e = gallery_entry(name);
    write_sdpa(e.instance, dir / (name + ".dat-s"));
    std::ofstream js(dir / (name + ".json"));
    if (!js) throw Error("cannot write " + (dir / (name + ".json")).string());
    js << to_json(e.instance).dump(2) << "\n";
  }
}

}  // namespace gapscope
