// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "gapscope/errors.hpp"
#include "gapscope/facial.hpp"
#include "gapscope/gallery.hpp"
#include "gapscope/harness.hpp"
#include "gapscope/ipm.hpp"
#include "gapscope/sdpa.hpp"
#include "gapscope/tracer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace gapscope;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Collects the failed sub-checks of one criterion.
struct Verdict {
  std::vector<std::string> failures;
  std::string summary;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double off_mass(const SymMatrix& s, Eigen::Index k) {
  Matrix D = s.dense();
  const double total = D.norm();
  D(k, k) = 0.0;
  return D.norm() / total;
}

Matrix random_sym(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Matrix M(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) M(i, j) = M(j, i) = g(rng);
  return M;
}

Verdict gap_endpoints() {
  Verdict v;
  const GapProfile p = trace_theta(ramana_gap().instance, default_theta_grid());
  v.expect(std::abs(p.vp_hat() - 1.0) <= 1e-2, "vp_hat " + fmt("%.6g", p.vp_hat()));
  v.expect(std::abs(p.vd_hat()) <= 1e-2, "vd_hat " + fmt("%.6g", p.vd_hat()));
  v.summary = "vp_hat " + fmt("%.6f", p.vp_hat()) + " vd_hat " + fmt("%.2e", p.vd_hat());
  return v;
}

Verdict closed_form_profile() {
  Verdict v;
  const std::vector<double> tans{0.125, 0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> grid;
  for (double t : tans) grid.push_back(std::atan(t));
  const GapProfile p = trace_theta(ramana_gap().instance, grid);
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double err = std::abs(p.rows[k].limit.value - va_formula_example1(grid[k]));
    worst = std::max(worst, err);
    v.expect(err <= 1e-2, "tan theta " + fmt("%g", tans[k]) + " error " + fmt("%.3g", err));
  }
  v.summary = "max error " + fmt("%.2e", worst);
  return v;
}

Verdict profile_structure() {
  Verdict v;
  const GapProfile p = trace_theta(ramana_gap().instance, default_theta_grid());
  const StructureReport r = structure_report(p);
  v.expect(p.theta_grid.size() == 33, "grid size");
  v.expect(p.failed_rows() == 0, "failed rows");
  v.expect(r.strictly_decreasing, "not strictly decreasing beyond error bars");
  v.expect(r.score_0 <= 2e-2, "score_0 " + fmt("%.3g", r.score_0));
  v.expect(r.score_pi2 <= 2e-2, "score_pi2 " + fmt("%.3g", r.score_pi2));
  v.summary = "score_0 " + fmt("%.2e", r.score_0) + " score_pi2 " + fmt("%.2e", r.score_pi2);
  return v;
}

Verdict counterexample() {
  Verdict v;
  const SdpInstance inst = sd2_counterexample().instance;
  const FaceChain chain = facial_reduction(inst, Side::Dual);
  v.expect(chain.directions.size() == 2, "chain length " + std::to_string(chain.directions.size()));
  const double mass = chain.directions.empty() ? kInf : off_mass(chain.directions[0], 3);
  v.expect(mass <= 1e-6, "off-(4,4) mass " + fmt("%.3g", mass));

  const double vd = solve_pair(perturb(inst, 0.0, 1e-4)).value;
  const double vdiag = solve_pair(perturb(inst, 1e-4, 1e-4)).value;
  v.expect(vd <= 0.1, "v(0, 1e-4) " + fmt("%.4g", vd));
  v.expect(vdiag >= 0.85, "v(1e-4, 1e-4) " + fmt("%.4g", vdiag));

  TSchedule sched;
  sched.steps = 16;
  const StructureReport r = structure_report(trace_theta(inst, default_theta_grid(), sched));
  v.expect(r.score_pi2 >= 0.7, "score_pi2 " + fmt("%.3g", r.score_pi2));
  v.summary = "steps " + std::to_string(chain.directions.size()) + " mass " + fmt("%.1e", mass) +
              " v(0,t) " + fmt("%.4f", vd) + " v(t,t) " + fmt("%.4f", vdiag) + " score_pi2 " +
              fmt("%.3f", r.score_pi2);
  return v;
}

Verdict facial_example1() {
  Verdict v;
  const SdpInstance inst = ramana_gap().instance;
  const FaceChain d = facial_reduction(inst, Side::Dual), p = facial_reduction(inst, Side::Primal);
  v.expect(singularity_degree(d) == 1, "dual sd " + std::to_string(singularity_degree(d)));
  v.expect(singularity_degree(p) == 1, "primal sd " + std::to_string(singularity_degree(p)));
  const double mass = d.directions.empty() ? kInf : off_mass(d.directions[0], 2);
  v.expect(mass <= 1e-6, "direction off E33 by " + fmt("%.3g", mass));

  const ReducedInstance red = reduce_to_rd(inst, d);
  const RdSolution rd = solve_rd(red);
  v.expect(rd.status == Status::Optimal && std::abs(rd.value) <= 1e-6, "RD value " + fmt("%.3g", rd.value));
  const double w = min_eig(red.L11((Vector(2) << 0.0, -1.0).finished()));
  v.expect(w >= 0.5, "witness min_eig " + fmt("%.3g", w));
  v.summary = "RD value " + fmt("%.1e", rd.value) + " witness min_eig " + fmt("%.3f", w);
  return v;
}

Verdict w_continuity() {
  Verdict v;
  const SdpInstance inst = ramana_gap().instance;
  const ReducedInstance red = reduce_to_rd(inst, facial_reduction(inst, Side::Dual));
  const PerturbationS S{0.1, (Matrix(2, 1) << 0.0, -0.05).finished(), (Matrix(1, 1) << 0.1).finished()};
  const double w0 = w_of_S(red, S);
  v.expect(std::abs(w0 - 0.05) <= 1e-6, "w(S) " + fmt("%.8g", w0));
  double last = w0;
  for (int k = 0; k <= 10; ++k) {
    const double f = std::ldexp(1.0, -k);
    const PerturbationS Sk{S.s11 * f, S.S12 * f, S.S22 * f};
    const double norm = std::sqrt(2 * Sk.s11 * Sk.s11 + 2 * Sk.S12.squaredNorm() + Sk.S22.squaredNorm());
    last = w_of_S(red, Sk);
    v.expect(std::abs(last) <= norm + 1e-6, "k=" + std::to_string(k) + " |w| above norm");
  }
  const double wz = w_of_S(red, PerturbationS{0.0, Matrix::Zero(2, 1), Matrix::Zero(1, 1)});
  v.expect(std::abs(wz) <= 1e-6, "w(0) " + fmt("%.3g", wz));
  v.expect(std::abs(last - wz) <= 1e-4, "w(S/2^10) " + fmt("%.3g", last));
  v.summary = "w(S) " + fmt("%.8f", w0) + " w(S/2^10) " + fmt("%.2e", last);
  return v;
}

Verdict lemma_harness() {
  Verdict v;
  const SdpInstance inst = ramana_gap().instance;
  const FaceChain chain = facial_reduction(inst, Side::Dual);
  const ReducedInstance red = reduce_to_rd(inst, chain);
  const BoundConstants c = estimate_constants(red, chain.directions.at(0), 1.0, 0.0);
  v.expect(std::abs(c.K - 3.0) <= 1e-6, "K " + fmt("%.8g", c.K));
  double worst = kInf;
  for (double a : {0.5, 1.0, 2.0})
    for (double t : {1e-2, 1e-3}) {
      const std::string at = " at a=" + fmt("%g", a) + " t=" + fmt("%g", t);
      for (const auto& l : verify_sandwich(red, c, a, t).lines) {
        worst = std::min(worst, l.slack);
        v.expect(l.status == "ok" && l.slack >= -1e-6, l.name + at);
      }
      const CheckLine l12 = verify_l12_bound(red, c, a, t).lines.at(0);
      v.expect(l12.lhs <= 3.0 * a + 1e-6, "l12^2 bound" + at);
    }
  const CheckReport m = verify_m_bound(red, c, {1e-2, 1e-3}, {0.5, 1.0, 2.0}, 50, 1);
  std::size_t points = 0;
  for (const auto& l : m.lines) {
    points += l.status == "ok";
    v.expect(l.lhs <= l.rhs + 1e-8, l.name);
  }
  v.expect(points == 50, "M-bound points " + std::to_string(points));
  v.summary = "min sandwich slack " + fmt("%.2e", worst) + " M-bound points " + std::to_string(points);
  return v;
}

Verdict properties() {
  Verdict v;
  std::mt19937_64 rng(2024);

  double iso = 0.0;
  for (int k = 0; k < 200; ++k) {
    const auto n = static_cast<Eigen::Index>(1 + k % 6);
    const Matrix A = random_sym(rng, n), B = random_sym(rng, n);
    iso = std::max(iso, std::abs(svec(A).dot(svec(B)) - (A * B).trace()) / (1.0 + A.norm() * B.norm()));
  }
  v.expect(iso <= 1e-12, "svec isometry " + fmt("%.3g", iso));

  double trip = 0.0;
  std::vector<SdpInstance> pool;
  for (const auto& name : gallery_names()) pool.push_back(gallery_entry(name).instance);
  for (std::uint64_t s = 1; s <= 5; ++s) pool.push_back(strongly_feasible_control(3, 2, s).instance);
  for (const SdpInstance& inst : pool) {
    std::stringstream ss;
    write_sdpa(inst, ss);
    const SdpInstance back = parse_sdpa(ss, inst.name());
    trip = std::max(trip, (back.C().dense() - inst.C().dense()).cwiseAbs().maxCoeff());
    for (std::size_t i = 0; i < inst.m(); ++i) {
      trip = std::max(trip, (back.A(i).dense() - inst.A(i).dense()).cwiseAbs().maxCoeff());
      trip = std::max(trip, std::abs(back.b()[i] - inst.b()[i]));
    }
  }
  v.expect(trip <= 1e-12, "SDPA round trip " + fmt("%.3g", trip));

  for (const SdpInstance& inst : pool) {
    const PerturbedPair p = perturb(inst, 1e-3, 1e-3);
    const SolveResult a = solve(p.dual()), b = solve(p.dual());
    v.expect(a.X == b.X && a.S == b.S && a.y == b.y && a.iters == b.iters, "determinism " + inst.name());
  }

  const CheckReport kappa = verify_kappa_bound(
      estimate_constants(reduce_to_rd(ramana_gap().instance,
                                      facial_reduction(ramana_gap().instance, Side::Dual)),
                         facial_reduction(ramana_gap().instance, Side::Dual).directions.at(0), 1.0, 0.0),
      100, 1);
  v.expect(kappa.lines.size() == 100 && kappa.pass(), "kappa inequality");

  const SdpInstance ex1 = ramana_gap().instance;
  double recip = 0.0;
  for (double a : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const LimitEstimate b = bar_v(ex1, a), t = tilde_v(ex1, 1.0 / a);
    const double d = std::abs(b.value - t.value);
    recip = std::max(recip, d / (b.error + t.error + 1e-300));
    v.expect(d <= b.error + t.error, "reciprocal identity at alpha " + fmt("%g", a));
  }

  for (double t : {1e-2, 1e-3}) {
    const AlphaScan s = alpha_scan(ex1, t, default_alpha_grid());
    v.expect(s.monotone, "alpha scan at t=" + fmt("%g", t));
  }
  v.summary = "isometry " + fmt("%.1e", iso) + " round trip " + fmt("%.1e", trip) +
              " reciprocal/err " + fmt("%.2f", recip);
  return v;
}

Verdict negative_control() {
  Verdict v;
  const SdpInstance inst = strongly_feasible_control(2, 1, 7).instance;
  const StructureReport r = structure_report(trace_theta(inst, default_theta_grid()));
  v.expect(r.spread <= 1e-4, "spread " + fmt("%.3g", r.spread));
  const FaceChain c = facial_reduction(inst, Side::Dual);
  v.expect(c.directions.empty(), "nonempty face chain");
  v.summary = "spread " + fmt("%.2e", r.spread);
  return v;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0: no runtime limit
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "gap endpoints of the gap example", 10.0, gap_endpoints},
      {2, "closed-form profile of the gap example", 60.0, closed_form_profile},
      {3, "monotone profile, continuous endpoints", 0.0, profile_structure},
      {4, "singularity-degree-two counterexample", 0.0, counterexample},
      {5, "facial reduction of the gap example", 0.0, facial_example1},
      {6, "w(S) continuity", 0.0, w_continuity},
      {7, "sandwich and bound harness", 0.0, lemma_harness},
      {8, "property suites", 0.0, properties},
      {9, "negative control", 5.0, negative_control},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_s > 0 && secs > c.limit_s) v.failures.push_back("runtime " + fmt("%.2f", secs) + " s");
    const bool ok = v.failures.empty();
    failed += !ok;
    std::printf("%s %d %s (%.2f s) %s\n", ok ? "PASS" : "FAIL", c.id, c.name, secs, v.summary.c_str());
    for (const auto& f : v.failures) std::printf("    %s\n", f.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
