#include "gapscope/harness.hpp"

#include "gapscope/errors.hpp"

#include <cmath>
#include <random>

namespace gapscope {

namespace {

void require_sd1(const ReducedInstance& red) {
  if (red.steps() > 1)
    throw PreconditionViolated("needs singularity degree at most 1, chain has " +
                               std::to_string(red.steps()) + " steps");
}

void require_positive(double alpha, double t) {
  if (!(alpha > 0.0) || !(t > 0.0)) throw InvalidArgument("alpha and t must be positive");
}

double inner(const Matrix& A, const Matrix& B) { return (A.array() * B.array()).sum(); }

Json params(double alpha, double t) { return Json{{"alpha", alpha}, {"t", t}}; }

CheckLine make_line(std::string name, Json p, double lhs, double rhs, double tol) {
  CheckLine l;
  l.name = std::move(name);
  l.params = std::move(p);
  l.lhs = lhs;
  l.rhs = rhs;
  l.slack = rhs - lhs;
  l.pass = l.slack >= -tol;
  return l;
}

CheckLine failed_line(std::string name, Json p, std::string status) {
  CheckLine l;
  l.name = std::move(name);
  l.params = std::move(p);
  l.lhs = l.rhs = l.slack = std::numeric_limits<double>::quiet_NaN();
  l.status = std::move(status);
  return l;
}

// LMI data of one RD1/RD2 instance. Block 1 is L(y) + tαI; block 2, when the
// reduced problem has off-diagonal coupling, is [[I_p, vec L12(y)], [·, corner]].
SdpInstance build_rd(const ReducedInstance& red, const BoundConstants& c, double alpha, double t,
                     bool epigraph) {
  require_sd1(red);
  require_positive(alpha, t);
  const SdpInstance& base = red.base();
  const auto n = static_cast<Eigen::Index>(red.n());
  const auto r = static_cast<Eigen::Index>(red.r());
  const auto k = n - r;
  const auto p = r * k;
  const double ta = t * alpha;
  const std::string name = base.name() + (epigraph ? "-rd1" : "-rd2");

  Matrix C1 = base.C().dense() + ta * Matrix::Identity(n, n);
  std::vector<Matrix> A1;
  for (const auto& Ai : base.A()) A1.push_back(Ai.dense());
  std::vector<double> b = base.b();

  const bool coupled = p > 0 && c.M > 0.0;
  if (!coupled) {
    std::vector<SymMatrix> A;
    for (const auto& M : A1) A.push_back(SymMatrix::from_dense(M));
    return SdpInstance(name, SymMatrix::from_dense(C1), std::move(A), std::move(b));
  }

  const BlockSplit& sp = red.split();
  auto vec12 = [&](const Matrix& M) {
    const Matrix B = block12(M, sp);
    return Vector(Eigen::Map<const Vector>(B.data(), B.size()));
  };
  const Eigen::Index n2 = p + 1;
  auto assemble = [&](const Matrix& top, const Matrix& bottom) {
    Matrix D = Matrix::Zero(n + n2, n + n2);
    D.topLeftCorner(n, n) = top;
    D.bottomRightCorner(n2, n2) = bottom;
    return SymMatrix::from_dense(D);
  };
  Matrix C2 = Matrix::Zero(n2, n2);
  C2.topLeftCorner(p, p).setIdentity();
  C2.block(0, p, p, 1) = vec12(base.C().dense());
  C2.block(p, 0, 1, p) = C2.block(0, p, p, 1).transpose();
  if (!epigraph) C2(p, p) = c.K * alpha;

  std::vector<SymMatrix> A;
  for (const auto& M : A1) {
    Matrix A2 = Matrix::Zero(n2, n2);
    A2.block(0, p, p, 1) = vec12(M);
    A2.block(p, 0, 1, p) = A2.block(0, p, p, 1).transpose();
    A.push_back(assemble(M, A2));
  }
  if (epigraph) {
    Matrix Et = Matrix::Zero(n2, n2);
    Et(p, p) = -1.0;
    A.push_back(assemble(Matrix::Zero(n, n), Et));
    b.push_back(-1.0 / (c.M * alpha));
  }
  return SdpInstance(name, assemble(C1, C2), std::move(A), std::move(b));
}

// Value of a harness subproblem; non-optimal solves are reported, not thrown.
struct Solved {
  double value = 0.0;
  Vector y;
  Status status = Status::NumericalFailure;
};

Solved solve_value(const SdpInstance& inst, const SolveOptions& opts) {
  const SolveResult res = solve(inst, opts);
  Solved s;
  s.status = res.status;
  s.value = 0.5 * (res.primal_value + res.dual_value);
  s.y = Vector::Zero(static_cast<Eigen::Index>(inst.input_m()));
  for (std::size_t j = 0; j < inst.basis_indices().size(); ++j)
    s.y(static_cast<Eigen::Index>(inst.basis_indices()[j])) = res.y[j];
  return s;
}

Solved perturbed_value(const SdpInstance& base, double eps, double eta, const SolveOptions& opts) {
  return solve_value(perturb(base, eps, eta).dual(), opts);
}

}  // namespace

BoundConstants estimate_constants(const ReducedInstance& red, const SymMatrix& X, double vp,
                                  double vd) {
  require_sd1(red);
  if (X.n() != red.n()) throw DimensionMismatch("direction dimension differs from the instance");
  BoundConstants c;
  c.vp = vp;
  c.vd = vd;
  const std::size_t k = red.split().k();
  if (k == 0) return c;
  const Matrix Y = red.V() * X.dense() * red.V().transpose();
  c.X22 = symmetrize(block22(Y, red.split()));
  const double lmin = min_eig(c.X22);
  if (!(lmin > 1e-9 * (1.0 + c.X22.norm())))
    throw NotRankComplement("trailing block of the direction is not positive definite (λmin " +
                            std::to_string(lmin) + ")");
  c.kappa = 1.0 / lmin;
  c.M = c.kappa * c.X22.trace();
  c.K = c.M * (vp - vd + 2.0);
  return c;
}

SdpInstance build_rd1(const ReducedInstance& red, const BoundConstants& c, double alpha, double t) {
  return build_rd(red, c, alpha, t, true);
}

SdpInstance build_rd2(const ReducedInstance& red, const BoundConstants& c, double alpha, double t) {
  return build_rd(red, c, alpha, t, false);
}

bool CheckReport::pass() const {
  for (const auto& l : lines)
    if (!l.pass) return false;
  return true;
}

bool CheckReport::skipped() const {
  for (const auto& l : lines)
    if (l.status == "precondition") return true;
  return false;
}

Json to_json(const CheckLine& line) {
  auto num = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return Json{{"name", line.name},     {"params", line.params}, {"lhs", num(line.lhs)},
              {"rhs", num(line.rhs)},  {"slack", num(line.slack)}, {"pass", line.pass},
              {"status", line.status}};
}

Json to_json(const CheckReport& report) {
  Json checks = Json::array();
  for (const auto& l : report.lines) checks.push_back(to_json(l));
  return Json{{"name", report.name},
              {"pass", report.pass()},
              {"skipped", report.skipped()},
              {"checks", std::move(checks)}};
}

double u1_value(const ReducedInstance& red, const BoundConstants& c, double alpha, double t,
                const SolveOptions& opts) {
  const Solved s = solve_value(build_rd1(red, c, alpha, t), opts);
  if (s.status != Status::Optimal)
    throw SolverFailure("RD1 solve ended with " + std::string(to_string(s.status)));
  return s.value;
}

double u2_value(const ReducedInstance& red, const BoundConstants& c, double alpha, double t,
                const SolveOptions& opts) {
  const Solved s = solve_value(build_rd2(red, c, alpha, t), opts);
  if (s.status != Status::Optimal)
    throw SolverFailure("RD2 solve ended with " + std::string(to_string(s.status)));
  return s.value;
}

LimitEstimate u_bar(const ReducedInstance& red, const BoundConstants& c, double alpha,
                    const TSchedule& sched, const SolveOptions& opts) {
  std::vector<double> ts, vs;
  for (double t : sched.values()) {
    const Solved s = solve_value(build_rd2(red, c, alpha, t), opts);
    if (s.status != Status::Optimal) break;
    ts.push_back(t);
    vs.push_back(s.value);
  }
  if (ts.size() < 3) throw InsufficientData("too few converged RD2 solves");
  return extrapolate(ts, vs);
}

CheckReport verify_sandwich(const ReducedInstance& red, const BoundConstants& c, double alpha,
                            double t, const HarnessOptions& opts) {
  require_sd1(red);
  require_positive(alpha, t);
  const SdpInstance& base = red.base();
  const double ta = t * alpha;
  const auto n = static_cast<double>(red.n());
  const double cI = base.C().trace();
  const Json p = params(alpha, t);

  const Solved v0t = perturbed_value(base, 0.0, t, opts.solver);
  const Solved vat = perturbed_value(base, ta, t, opts.solver);
  const Solved vat0 = perturbed_value(base, ta, 0.0, opts.solver);
  const Solved u1 = solve_value(build_rd1(red, c, alpha, t), opts.solver);
  const Solved u2 = solve_value(build_rd2(red, c, alpha, t), opts.solver);

  CheckReport rep;
  rep.name = "sandwich";
  auto add = [&](std::string name, const Solved& l, double lhs, const Solved& r, double rhs) {
    const Status bad = l.status != Status::Optimal ? l.status : r.status;
    if (bad != Status::Optimal)
      rep.lines.push_back(failed_line(std::move(name), p, std::string(to_string(bad))));
    else
      rep.lines.push_back(make_line(std::move(name), p, lhs, rhs, opts.slack_tol));
  };
  add("v(0,t) <= v(ta,t)", v0t, v0t.value, vat, vat.value);
  add("v(ta,t) <= u1 + t^2 a n + t c", vat, vat.value, u1, u1.value + t * ta * n + t * cI);
  add("u1 <= u2", u1, u1.value, u2, u2.value);
  add("u2 <= v(ta,0)", u2, u2.value, vat0, vat0.value);
  return rep;
}

CheckLine check_l12_at(const ReducedInstance& red, const BoundConstants& c, double alpha, double t,
                       const Vector& y, const HarnessOptions& opts) {
  require_sd1(red);
  require_positive(alpha, t);
  if (y.size() != static_cast<Eigen::Index>(red.base().m()))
    throw DimensionMismatch("y has the wrong length");
  const auto n = static_cast<Eigen::Index>(red.n());
  const Matrix L = red.L(y) + t * alpha * Matrix::Identity(n, n);
  if (min_eig(symmetrize(L)) < -1e-7 * (1.0 + L.norm()))
    throw InvalidArgument("y violates L(y) + t*alpha*I >= 0");
  return make_line("l12^2 <= K a", params(alpha, t), red.l12_sq(y), c.K * alpha, opts.slack_tol);
}

CheckReport verify_l12_bound(const ReducedInstance& red, const BoundConstants& c, double alpha,
                             double t, const HarnessOptions& opts) {
  require_sd1(red);
  require_positive(alpha, t);
  const Solved vat0 = perturbed_value(red.base(), t * alpha, 0.0, opts.solver);
  if (vat0.status != Status::Optimal)
    throw SolverFailure("v(ta,0) solve ended with " + std::string(to_string(vat0.status)));
  if (vat0.value > c.vp + 0.5)
    throw ThresholdNotMet("v(ta,0) = " + std::to_string(vat0.value) +
                          " exceeds vp + 1/2; decrease t");
  CheckReport rep;
  rep.name = "l12_bound";
  const Solved u1 = solve_value(build_rd1(red, c, alpha, t), opts.solver);
  if (u1.status != Status::Optimal) {
    rep.lines.push_back(failed_line("l12^2 <= K a", params(alpha, t), std::string(to_string(u1.status))));
    return rep;
  }
  rep.lines.push_back(check_l12_at(red, c, alpha, t, u1.y.head(red.base().m()), opts));
  return rep;
}

CheckReport verify_m_bound(const ReducedInstance& red, const BoundConstants& c,
                           const std::vector<double>& ts, const std::vector<double>& alphas,
                           std::size_t count, std::uint64_t seed, const HarnessOptions& opts) {
  require_sd1(red);
  if (ts.empty() || alphas.empty()) throw InvalidArgument("empty t or alpha grid");
  CheckReport rep;
  rep.name = "m_bound";
  if (red.split().k() == 0) return rep;

  const SdpInstance& base = red.base();
  const auto n = static_cast<Eigen::Index>(red.n());
  const std::size_t m = base.m();
  const auto box = static_cast<Eigen::Index>(2 * m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  // A box |yᵢ| ≤ R keeps random objectives bounded; box points are still
  // feasible for D(tα, t).
  const double R = 10.0 * (1.0 + red.slater_witness().norm());

  for (std::size_t i = 0, attempt = 0; i < count && attempt < 4 * count; ++attempt) {
    const double t = ts[attempt % ts.size()];
    const double alpha = alphas[(attempt / ts.size()) % alphas.size()];
    const double ta = t * alpha;
    Matrix C = Matrix::Zero(n + box, n + box);
    C.topLeftCorner(n, n) = base.C().dense() + ta * Matrix::Identity(n, n);
    C.bottomRightCorner(box, box) = R * Matrix::Identity(box, box);
    std::vector<SymMatrix> A;
    std::vector<double> obj;
    for (std::size_t j = 0; j < m; ++j) {
      Matrix Aj = Matrix::Zero(n + box, n + box);
      Aj.topLeftCorner(n, n) = base.A(j).dense();
      const auto jj = static_cast<Eigen::Index>(j);
      Aj(n + jj, n + jj) = 1.0;
      Aj(n + static_cast<Eigen::Index>(m) + jj, n + static_cast<Eigen::Index>(m) + jj) = -1.0;
      A.push_back(SymMatrix::from_dense(Aj));
      obj.push_back(g(rng));
    }
    const Solved s = solve_value(
        SdpInstance(base.name() + "-mbound", SymMatrix::from_dense(C), std::move(A), std::move(obj)),
        opts.solver);
    if (s.status != Status::Optimal) continue;
    const Vector y = s.y.head(static_cast<Eigen::Index>(m));
    const Matrix L22 = symmetrize(red.L22(y)) +
                       ta * Matrix::Identity(static_cast<Eigen::Index>(red.split().k()),
                                             static_cast<Eigen::Index>(red.split().k()));
    Json p = params(alpha, t);
    p["sample"] = i;
    rep.lines.push_back(make_line("max_eig(L22 + t a I) <= t a M", std::move(p), max_eig(L22),
                                  ta * c.M, 1e-8));
    ++i;
  }
  if (rep.lines.size() < count)
    rep.lines.push_back(failed_line("max_eig(L22 + t a I) <= t a M",
                                    Json{{"generated", rep.lines.size()}, {"requested", count}},
                                    "too few feasible points"));
  return rep;
}

CheckReport verify_kappa_bound(const BoundConstants& c, std::size_t count, std::uint64_t seed) {
  CheckReport rep;
  rep.name = "kappa_bound";
  const Eigen::Index k = c.X22.rows();
  if (k == 0) return rep;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<Eigen::Index> rank(1, k);
  for (std::size_t i = 0; i < count; ++i) {
    Matrix B(k, rank(rng));
    for (Eigen::Index j = 0; j < B.size(); ++j) B.data()[j] = g(rng);
    const Matrix Y = B * B.transpose();
    const double rhs = c.kappa * inner(c.X22, Y);
    rep.lines.push_back(make_line("||Y|| <= kappa X22.Y", Json{{"sample", i}}, Y.norm(), rhs,
                                  1e-12 * (1.0 + rhs)));
  }
  return rep;
}

bool HarnessRun::pass() const {
  for (const auto& r : reports)
    if (!r.pass() && !r.skipped()) return false;
  return true;
}

HarnessRun run_harness(const SdpInstance& inst, std::optional<double> vp, std::optional<double> vd,
                       const std::vector<double>& alphas, const std::vector<double>& ts,
                       const HarnessOptions& opts) {
  HarnessRun run;
  const FaceChain chain = facial_reduction(inst, Side::Dual);
  run.steps = chain.directions.size();
  const char* names[] = {"sandwich", "l12_bound", "m_bound", "kappa_bound"};
  if (run.steps > 1) {
    for (const char* name : names) {
      CheckReport rep;
      rep.name = name;
      CheckLine l = failed_line(name, Json{{"steps", run.steps}}, "precondition");
      rep.lines.push_back(std::move(l));
      run.reports.push_back(std::move(rep));
    }
    return run;
  }
  if (!vp) vp = bar_v(inst, std::numeric_limits<double>::infinity(), {}, opts.solver).value;
  if (!vd) vd = tilde_v(inst, std::numeric_limits<double>::infinity(), {}, opts.solver).value;

  const ReducedInstance red = reduce_to_rd(inst, chain);
  run.constants = run.steps == 1 ? estimate_constants(red, chain.directions[0], *vp, *vd)
                                 : BoundConstants{0.0, 0.0, 0.0, *vp, *vd, {}};

  CheckReport sandwich{"sandwich", {}}, l12{"l12_bound", {}};
  for (double a : alphas)
    for (double t : ts) {
      for (auto& l : verify_sandwich(red, run.constants, a, t, opts).lines)
        sandwich.lines.push_back(std::move(l));
      try {
        for (auto& l : verify_l12_bound(red, run.constants, a, t, opts).lines)
          l12.lines.push_back(std::move(l));
      } catch (const ThresholdNotMet& e) {
        l12.lines.push_back(failed_line("l12^2 <= K a", params(a, t), "threshold not met"));
      }
    }
  run.reports.push_back(std::move(sandwich));
  run.reports.push_back(std::move(l12));
  run.reports.push_back(verify_m_bound(red, run.constants, ts, alphas, 50, 1, opts));
  run.reports.push_back(verify_kappa_bound(run.constants));
  return run;
}

}  // namespace gapscope
