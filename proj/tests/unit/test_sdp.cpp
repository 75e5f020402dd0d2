#include "gapscope/errors.hpp"
#include "gapscope/gallery.hpp"
#include "gapscope/ipm.hpp"
#include "gapscope/sdp.hpp"
#include "gapscope/sdpa.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace gapscope;

namespace {

SymMatrix E(std::size_t n, std::size_t i, std::size_t j) { return SymMatrix::unit(n, i - 1, j - 1); }

double value(const SdpInstance& inst, double eps, double eta) {
  return solve_pair(perturb(inst, eps, eta)).value;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("perturb at the origin reproduces the instance") {
  const SdpInstance inst = ramana_gap().instance;
  const PerturbedPair p = perturb(inst, 0.0, 0.0);
  CHECK(p.dual() == inst);
  CHECK(p.primal() == inst);
  CHECK(p.boundary());
}

TEST_CASE("perturb shifts the right-hand side by eta times the traces") {
  const double eta = 0.25;
  const PerturbedPair p = perturb(ramana_gap().instance, 0.0, eta);
  CHECK(p.dual().b()[0] == doctest::Approx(1.0 + eta));
  CHECK(p.dual().b()[1] == doctest::Approx(eta));

  const PerturbedPair q = perturb(sd2_counterexample().instance, 0.0, eta);
  CHECK(q.dual().b()[0] == doctest::Approx(1.0 + eta));
  CHECK(q.dual().b()[1] == doctest::Approx(eta));
  CHECK(q.dual().b()[2] == doctest::Approx(eta));
}

TEST_CASE("perturb shifts the cost by eps times the identity") {
  const SdpInstance inst = ramana_gap().instance;
  const PerturbedPair p = perturb(inst, 0.3, 0.0);
  CHECK(p.dual().C().dense().isApprox(inst.C().dense() + 0.3 * Matrix::Identity(3, 3)));
  CHECK_FALSE(perturb(inst, 0.3, 0.1).boundary());
}

TEST_CASE("perturb rejects negative parameters") {
  const SdpInstance inst = ramana_gap().instance;
  CHECK_THROWS_AS(perturb(inst, -1e-3, 0.0), NegativeParameter);
  CHECK_THROWS_AS(perturb(inst, 0.0, -1e-3), NegativeParameter);
}

TEST_CASE("property: perturbed data is affine in (eps, eta)") {
  const SdpInstance inst = sd2_counterexample().instance;
  const PerturbedPair a = perturb(inst, 0.1, 0.2), b = perturb(inst, 0.3, 0.6),
                      c = perturb(inst, 0.2, 0.4);
  CHECK((0.5 * (a.dual().C().dense() + b.dual().C().dense())).isApprox(c.dual().C().dense(), 1e-14));
  for (std::size_t i = 0; i < inst.m(); ++i)
    CHECK(0.5 * (a.dual().b()[i] + b.dual().b()[i]) == doctest::Approx(c.dual().b()[i]).epsilon(1e-14));
}

TEST_CASE("instances reduce dependent constraints to a basis") {
  const std::size_t n = 2;
  SdpInstance inst("dep", SymMatrix::identity(n), {E(n, 1, 1), E(n, 2, 2), E(n, 1, 1) + E(n, 2, 2)},
                   {1.0, 2.0, 3.0});
  CHECK(inst.m() == 2);
  CHECK(inst.input_m() == 3);
  CHECK(inst.basis_indices() == std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(SdpInstance("bad", SymMatrix::identity(n),
                              {E(n, 1, 1), E(n, 2, 2), E(n, 1, 1) + E(n, 2, 2)}, {1.0, 2.0, 4.0}),
                  InconsistentConstraints);
  CHECK_THROWS_AS(SdpInstance("mismatch", SymMatrix::identity(n), {E(n, 1, 1)}, {1.0, 2.0}),
                  DimensionMismatch);
  CHECK_THROWS_AS(SdpInstance("dim", SymMatrix::identity(n), {E(3, 1, 1)}, {1.0}), DimensionMismatch);
  CHECK_THROWS_AS(SdpInstance("empty", SymMatrix::identity(n), {}, {}), InvalidArgument);
}

TEST_CASE("dualize on the gap example") {
  const SdpInstance inst = ramana_gap().instance;
  const DualizedInstance d = dualize(inst, E(3, 1, 1));
  CHECK(d.nbar == 4);
  CHECK(d.instance.m() == 4);
  CHECK(d.offset(0.0, 0.0) == doctest::Approx(1.0));
  // v(D_P(0,0)) = −v(P) + C•X* = 0.
  CHECK(-1.0 + d.offset(0.0, 0.0) == doctest::Approx(0.0));
  for (const auto& Ap : d.instance.A())
    for (const auto& Ai : inst.A()) CHECK(std::abs(dot(Ap, Ai)) <= 1e-12);
  for (std::size_t i = 0; i < inst.m(); ++i) CHECK(dot(inst.A(i), d.x_star) == doctest::Approx(inst.b()[i]));
}

TEST_CASE("dualize uses the minimum-norm X* by default") {
  const SdpInstance inst = ramana_gap().instance;
  const DualizedInstance d = dualize(inst);
  for (std::size_t i = 0; i < inst.m(); ++i)
    CHECK(dot(inst.A(i), d.x_star) == doctest::Approx(inst.b()[i]).epsilon(1e-12));
  // Any other solution differs by an element of the null space, so X* ⟂ A⊥.
  for (const auto& Ap : d.instance.A()) CHECK(std::abs(dot(Ap, d.x_star)) <= 1e-12);
}

TEST_CASE("dualize rejects an X* off the affine set") {
  CHECK_THROWS_AS(dualize(ramana_gap().instance, E(3, 2, 2)), NoFeasiblePoint);
  CHECK_THROWS_AS(dualize(ramana_gap().instance, SymMatrix::identity(2)), DimensionMismatch);
}

TEST_CASE("property: dualize offset identity") {
  for (const auto& name : gallery_names()) {
    const SdpInstance inst = gallery_entry(name).instance;
    const DualizedInstance d = dualize(inst);
    for (double eps : {1e-2, 1e-3})
      for (double eta : {1e-2, 1e-3}) {
        const double v = value(inst, eps, eta);
        const double v1 = value(d.instance, eta, eps);
        CAPTURE(name);
        CAPTURE(eps);
        CAPTURE(eta);
        CHECK(std::abs(v1 + v - d.offset(eps, eta)) <= 1e-6);
      }
  }
}

TEST_CASE("dualizing twice gives the same perturbed values") {
  for (const auto& name : gallery_names()) {
    const SdpInstance inst = gallery_entry(name).instance;
    const DualizedInstance d1 = dualize(inst);
    const DualizedInstance d2 = dualize(d1.instance);
    const double e = 1e-2;
    const double v = value(inst, e, e);
    const double v2 = value(d2.instance, e, e);
    CAPTURE(name);
    CHECK(std::abs(v - (d1.offset(e, e) - d2.offset(e, e) + v2)) <= 1e-6);
  }
}

TEST_CASE("objective and residuals") {
  const SdpInstance inst = ramana_gap().instance;
  const ObjectiveResiduals r = objective_and_residuals(inst, E(3, 1, 1), {0.0, 0.0}, inst.C());
  CHECK(r.primal_value == 1.0);
  CHECK(r.dual_value == 0.0);
  CHECK(r.primal_res == 0.0);
  CHECK(r.dual_res == 0.0);

  const double delta = 1e-3;
  // A¹ has a zero (1,2) entry and a unit (2,3) entry.
  const ObjectiveResiduals r12 =
      objective_and_residuals(inst, E(3, 1, 1) + delta * E(3, 1, 2), {0.0, 0.0}, inst.C());
  CHECK(r12.primal_res == doctest::Approx(0.0));
  const ObjectiveResiduals r23 =
      objective_and_residuals(inst, E(3, 1, 1) + delta * E(3, 2, 3), {0.0, 0.0}, inst.C());
  CHECK(r23.primal_res == doctest::Approx(2.0 * delta));
  CHECK_THROWS_AS(objective_and_residuals(inst, E(3, 1, 1), {0.0}, inst.C()), DimensionMismatch);
}

TEST_CASE("SDPA round trip") {
  for (const auto& name : gallery_names()) {
    const SdpInstance inst = gallery_entry(name).instance;
    std::stringstream ss;
    write_sdpa(inst, ss);
    const SdpInstance back = parse_sdpa(ss, inst.name());
    REQUIRE(back.m() == inst.m());
    CHECK((back.C().dense() - inst.C().dense()).cwiseAbs().maxCoeff() <= 1e-12);
    for (std::size_t i = 0; i < inst.m(); ++i) {
      CHECK((back.A(i).dense() - inst.A(i).dense()).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(std::abs(back.b()[i] - inst.b()[i]) <= 1e-12);
    }
    CHECK(back == inst);
  }
}

TEST_CASE("SDPA parser handles comments, blocks and diagonal blocks") {
  std::istringstream in(
      "\" a comment\n"
      "* another\n"
      "1\n"
      "2\n"
      "{1, -2}\n"
      "(3.0)\n"
      "0 1 1 1 1.0\n"
      "0 2 2 2 2.0\n"
      "1 1 1 1 1.0\n"
      "1 2 1 1 1.0\n");
  const SdpInstance inst = parse_sdpa(in, "blocks");
  CHECK(inst.n() == 3);
  CHECK(inst.C().dense().isApprox(Matrix(Vector((Vector(3) << 1.0, 0.0, 2.0).finished()).asDiagonal())));
  CHECK(inst.A(0)(0, 0) == 1.0);
  CHECK(inst.A(0)(1, 1) == 1.0);
  CHECK(inst.b()[0] == 3.0);
}

TEST_CASE("SDPA parser reports the offending line") {
  std::istringstream in("2\n1\n2\n1 0\n0 1 1 3 1.0\n");
  try {
    parse_sdpa(in, "bad");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
  std::istringstream diag("1\n1\n-2\n1\n1 1 1 2 1.0\n");
  CHECK_THROWS_AS(parse_sdpa(diag, "diag"), ParseError);
  std::istringstream trunc("1\n1\n2\n");
  CHECK_THROWS_AS(parse_sdpa(trunc, "trunc"), ParseError);
  CHECK_THROWS_AS(read_sdpa("/nonexistent/file.dat-s"), Error);
}

TEST_CASE("gallery fixtures match the code-built instances byte for byte") {
  for (const auto& name : gallery_names()) {
    const SdpInstance inst = gallery_entry(name).instance;
    std::stringstream ss;
    write_sdpa(inst, ss);
    const std::string path = std::string(GAPSCOPE_FIXTURES) + "/" + name + ".dat-s";
    CAPTURE(path);
    CHECK(ss.str() == slurp(path));
    CHECK(read_sdpa(path) == inst);
    CHECK(to_json(inst).dump(2) + "\n" == slurp(std::string(GAPSCOPE_FIXTURES) + "/" + name + ".json"));
  }
}

TEST_CASE("instance JSON export") {
  const Json j = to_json(ramana_gap().instance);
  CHECK(j["name"] == "ramana");
  CHECK(j["n"] == 3);
  CHECK(j["m"] == 2);
  CHECK(j["C"][0][0] == 1.0);
  CHECK(j["A"][0][1][2] == 1.0);
  CHECK(j["A"][0][2][1] == 1.0);
  CHECK(j["b"] == Json::array({1.0, 0.0}));
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e22, 0.0}) CHECK(std::stod(format_double(v)) == v);
}
