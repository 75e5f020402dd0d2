#include "gapscope/errors.hpp"
#include "gapscope/facial.hpp"
#include "gapscope/gallery.hpp"
#include "gapscope/tracer.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace gapscope;

namespace {

// Frobenius mass outside entry (k, k), for a trace-normalized direction.
double off_mass(const SymMatrix& s, std::size_t k) {
  Matrix D = s.dense();
  D(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 0.0;
  return D.norm();
}

void check_chain(const SdpInstance& inst, const FaceChain& c) {
  const auto n = inst.n();
  CHECK(c.directions.size() == c.sd_upper);
  CHECK(c.ranks.size() == c.sd_upper + 1);
  CHECK(c.ranks.front() == n);
  CHECK(c.ranks.back() == c.r);
  for (std::size_t i = 0; i + 1 < c.ranks.size(); ++i) CHECK(c.ranks[i] > c.ranks[i + 1]);
  CHECK(c.sd_upper <= n);
  CHECK((c.V * c.V.transpose()).isApprox(Matrix::Identity(n, n), 1e-12));
  for (const auto& r : c.residuals) {
    CHECK(r.max_constraint <= 1e-8);
    CHECK(r.objective <= 1e-8);
    CHECK(r.face_min_eig >= -1e-10);
  }
  for (const auto& f : c.face_directions) CHECK(min_eig(f) >= -1e-10);
  if (c.side == Side::Dual)
    for (const auto& s : c.directions) {
      for (const auto& A : inst.A()) CHECK(std::abs(dot(s, A)) <= 1e-8);
      CHECK(std::abs(dot(s, inst.C())) <= 1e-8);
    }
}

}  // namespace

TEST_CASE("side names") {
  CHECK(to_string(Side::Primal) == "primal");
  CHECK(side_from_string("dual") == Side::Dual);
  CHECK_THROWS_AS(side_from_string("both"), InvalidArgument);
}

TEST_CASE("reducing direction of the gap example is E33") {
  const auto s = find_reducing_direction(ramana_gap().instance, Side::Dual);
  REQUIRE(s.has_value());
  CHECK((*s)(2, 2) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(off_mass(*s, 2) <= 1e-6);
}

TEST_CASE("first reducing direction of the counterexample is supported on (4,4)") {
  const auto s = find_reducing_direction(sd2_counterexample().instance, Side::Dual);
  REQUIRE(s.has_value());
  CHECK((*s)(3, 3) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(off_mass(*s, 3) <= 1e-6);
}

TEST_CASE("strongly feasible control has no reducing direction") {
  const SdpInstance inst = strongly_feasible_control(2, 1, 7).instance;
  CHECK_FALSE(find_reducing_direction(inst, Side::Dual).has_value());
  CHECK_FALSE(find_reducing_direction(inst, Side::Primal).has_value());
  const FaceChain c = facial_reduction(inst, Side::Dual);
  CHECK(c.directions.empty());
  CHECK(singularity_degree(c) == 0);
  CHECK(c.r == 2);
}

TEST_CASE("face chains of the gap example") {
  const SdpInstance inst = ramana_gap().instance;
  const FaceChain d = facial_reduction(inst, Side::Dual);
  check_chain(inst, d);
  CHECK(singularity_degree(d) == 1);
  CHECK(d.r == 2);
  const FaceChain p = facial_reduction(inst, Side::Primal);
  check_chain(inst, p);
  CHECK(singularity_degree(p) == 1);
}

TEST_CASE("face chain of the counterexample has two steps") {
  const SdpInstance inst = sd2_counterexample().instance;
  const FaceChain d = facial_reduction(inst, Side::Dual);
  check_chain(inst, d);
  CHECK(singularity_degree(d) == 2);
  CHECK(d.ranks == std::vector<std::size_t>{4, 3, 2});
}

TEST_CASE("after rescaling the slack lives in the leading block") {
  for (const char* name : {"ramana", "sd2"}) {
    const GalleryEntry e = gallery_entry(name);
    const FaceChain c = facial_reduction(e.instance, Side::Dual);
    const ReducedInstance red = reduce_to_rd(e.instance, c);
    // Feasible points of D(0, t) approach the face as t ↓ 0.
    const SolveResult r = solve(perturb(e.instance, 0.0, 1e-4).dual());
    Vector y = Vector::Map(r.y.data(), static_cast<Eigen::Index>(r.y.size()));
    const Matrix L = red.L(y);
    CAPTURE(name);
    CHECK(block22(L, red.split()).norm() <= 1e-3);
  }
}

TEST_CASE("rank-complement certificate after one step") {
  const SdpInstance inst = ramana_gap().instance;
  const FaceChain c = facial_reduction(inst, Side::Dual);
  const Matrix X = c.V * c.directions[0].dense() * c.V.transpose();
  const BlockSplit s(c.r, inst.n());
  CHECK(block11(X, s).norm() <= 1e-8);
  CHECK(min_eig(Matrix(block22(X, s))) > 0.5);
}

TEST_CASE("certificate JSON") {
  const Json j = to_json(facial_reduction(ramana_gap().instance, Side::Dual));
  CHECK(j["side"] == "dual");
  CHECK(j["steps"] == 1);
  CHECK(j["r"] == 2);
  CHECK(j["ranks"] == Json::array({3, 2}));
  CHECK(j["directions"].size() == 1);
  CHECK(j["V"].size() == 3);
  CHECK(j["residuals"].size() == 1);
}

TEST_CASE("infeasible dual side is detected") {
  // diag(−1, 0) − y·E22 is never PSD.
  SdpInstance inst("infeasible", SymMatrix::diagonal({-1.0, 0.0}), {SymMatrix::unit(2, 1, 1)}, {1.0});
  CHECK_THROWS_AS(facial_reduction(inst, Side::Dual), InfeasibleDetected);
}

TEST_CASE("reduced problem of the gap example") {
  const SdpInstance inst = ramana_gap().instance;
  const ReducedInstance red = reduce_to_rd(inst, facial_reduction(inst, Side::Dual));
  CHECK(red.r() == 2);
  CHECK(red.n() == 3);
  CHECK(red.steps() == 1);
  const Vector y = (Vector(2) << 0.3, -0.7).finished();
  CHECK(red.L11(y).isApprox((Matrix(2, 2) << 1 - 0.3, 0, 0, 0.7).finished()));
  CHECK(red.L12(y).cwiseAbs().isApprox((Matrix(2, 1) << 0, 0.3).finished()));
  CHECK(red.L22(y).norm() == 0.0);
  CHECK(red.l12_sq(y) == doctest::Approx(0.09));
  CHECK(red.l11(y) == doctest::Approx(1.4));

  const Vector w = (Vector(2) << 0.0, -1.0).finished();
  CHECK(min_eig(red.L11(w)) >= 0.5);

  const Vector& sw = red.slater_witness();
  CHECK(min_eig(red.L11(sw)) > 0.0);
  CHECK(red.witness_min_eig() > 0.0);
  CHECK(red.L12(sw).norm() <= 1e-8);
  CHECK(red.L22(sw).norm() <= 1e-8);

  const RdSolution rd = solve_rd(red);
  CHECK(rd.status == Status::Optimal);
  CHECK(std::abs(rd.value) <= 1e-6);
}

TEST_CASE("reduced problem of the counterexample has value 0") {
  const SdpInstance inst = sd2_counterexample().instance;
  const ReducedInstance red = reduce_to_rd(inst, facial_reduction(inst, Side::Dual));
  CHECK(red.r() == 2);
  const Vector& sw = red.slater_witness();
  CHECK(red.L12(sw).norm() <= 1e-8);
  CHECK(red.L22(sw).norm() <= 1e-8);
  CHECK(std::abs(solve_rd(red).value) <= 1e-6);
}

TEST_CASE("reduce_to_rd needs a dual chain of matching size") {
  const SdpInstance inst = ramana_gap().instance;
  CHECK_THROWS_AS(reduce_to_rd(inst, facial_reduction(inst, Side::Primal)), InvalidArgument);
  CHECK_THROWS_AS(reduce_to_rd(inst, facial_reduction(sd2_counterexample().instance, Side::Dual)),
                  DimensionMismatch);
}

TEST_CASE("reduced value equals the traced dual value") {
  for (const auto& name : gallery_names()) {
    const SdpInstance inst = gallery_entry(name).instance;
    const ReducedInstance red = reduce_to_rd(inst, facial_reduction(inst, Side::Dual));
    const LimitEstimate vd = tilde_v(inst, std::numeric_limits<double>::infinity());
    CAPTURE(name);
    CHECK(std::abs(solve_rd(red).value - vd.value) <= 1e-4);
  }
}

TEST_CASE("perturbation decomposition") {
  const SdpInstance inst = ramana_gap().instance;
  const ReducedInstance red = reduce_to_rd(inst, facial_reduction(inst, Side::Dual));

  const PerturbationS id = decompose_perturbation(red, SymMatrix::identity(3));
  CHECK(id.s11 == doctest::Approx(1.0));
  CHECK(id.S12.norm() == doctest::Approx(0.0));
  CHECK(id.S22.isApprox(Matrix::Identity(1, 1)));

  SymMatrix S = 0.1 * SymMatrix::identity(3);
  S.set(1, 2, -0.05);
  const PerturbationS p = decompose_perturbation(red, S);
  CHECK(p.s11 == doctest::Approx(0.1));
  CHECK(p.S12(1, 0) == doctest::Approx(-0.05));
  CHECK(p.S22(0, 0) == doctest::Approx(0.1));

  SymMatrix bad(3);
  bad.set(0, 2, 1.0);
  CHECK_THROWS_AS(decompose_perturbation(red, bad), NotInPerturbationSpace);
  SymMatrix nonscalar = SymMatrix::diagonal({0.1, 0.2, 0.1});
  CHECK_THROWS_AS(decompose_perturbation(red, nonscalar), NotInPerturbationSpace);
  CHECK_THROWS_AS(decompose_perturbation(red, SymMatrix::identity(2)), DimensionMismatch);
}

TEST_CASE("w(S) on the gap example") {
  const SdpInstance inst = ramana_gap().instance;
  const ReducedInstance red = reduce_to_rd(inst, facial_reduction(inst, Side::Dual));
  CHECK(std::abs(w_of_S(red, PerturbationS{0.0, Matrix::Zero(2, 1), Matrix::Zero(1, 1)})) <= 1e-6);

  PerturbationS S{0.1, (Matrix(2, 1) << 0.0, -0.05).finished(), (Matrix(1, 1) << 0.1).finished()};
  CHECK(std::abs(w_of_S(red, S) - 0.05) <= 1e-6);

  for (int k = 0; k <= 10; ++k) {
    const double f = std::ldexp(1.0, -k);
    PerturbationS Sk{S.s11 * f, S.S12 * f, S.S22 * f};
    const double norm = std::sqrt(2 * Sk.s11 * Sk.s11 + 2 * Sk.S12.squaredNorm() + Sk.S22.squaredNorm());
    const double w = w_of_S(red, Sk);
    CAPTURE(k);
    CHECK(std::abs(w) <= norm + 1e-6);
    CHECK(std::abs(w - 0.05 * f) <= 1e-6);
  }

  PerturbationS off{0.1, (Matrix(2, 1) << 1.0, 0.0).finished(), (Matrix(1, 1) << 0.1).finished()};
  CHECK_THROWS_AS(w_of_S(red, off), NotInPerturbationSpace);
}
