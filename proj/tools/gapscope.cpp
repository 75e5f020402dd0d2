// gapscope: trace perturbed SDP values, reduce faces and check the bounds.

#include "gapscope/errors.hpp"
#include "gapscope/facial.hpp"
#include "gapscope/gallery.hpp"
#include "gapscope/harness.hpp"
#include "gapscope/ipm.hpp"
#include "gapscope/sdpa.hpp"
#include "gapscope/tracer.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace gapscope;

namespace {

enum Exit { kOk = 0, kError = 1, kPartial = 2 };

struct RunConfig {
  std::string command;
  std::string gallery;
  std::string input;
  fs::path output_dir = ".";
  std::string format = "json";
  std::string side = "both";
  SolveOptions solver;
  double tol = 1e-9;
  TSchedule schedule;
  std::size_t theta_points = 33;
  double alpha_t = 0.0;
  unsigned jobs = 0;
  double eps = 0.0;
  double eta = 0.0;
};

struct Loaded {
  SdpInstance instance;
  std::optional<GalleryEntry> entry;
};

Loaded load(const RunConfig& cfg) {
  if (!cfg.gallery.empty() && !cfg.input.empty())
    throw InvalidArgument("give either --gallery or --input, not both");
  if (!cfg.gallery.empty()) {
    GalleryEntry e = gallery_entry(cfg.gallery);
    SdpInstance inst = e.instance;
    return {std::move(inst), std::move(e)};
  }
  if (cfg.input.empty()) throw InvalidArgument("an instance is required: --gallery NAME or --input PATH");
  if (!fs::exists(cfg.input)) throw Error("input file not found: " + cfg.input);
  return {read_sdpa(cfg.input), std::nullopt};
}

void prepare_output(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw Error("cannot create output directory " + cfg.output_dir.string());
}

std::ofstream open_out(const RunConfig& cfg, const std::string& file) {
  const fs::path p = cfg.output_dir / file;
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

void write_json(const RunConfig& cfg, const std::string& file, const Json& j) {
  open_out(cfg, file) << j.dump(2) << "\n";
  spdlog::info("wrote {}", (cfg.output_dir / file).string());
}

SolveOptions solver_options(const RunConfig& cfg) {
  SolveOptions o = cfg.solver;
  o.tol_gap = o.tol_feas = cfg.tol;
  if (spdlog::should_log(spdlog::level::trace))
    o.log = [](std::string_view line) { spdlog::trace("{}", line); };
  o.validate();
  return o;
}

int cmd_solve(const RunConfig& cfg) {
  const Loaded in = load(cfg);
  prepare_output(cfg);
  const PerturbedPair pair = perturb(in.instance, cfg.eps, cfg.eta);
  const SolveResult r = solve(pair.dual(), solver_options(cfg));
  Json j{{"instance", in.instance.name()},
         {"eps", cfg.eps},
         {"eta", cfg.eta},
         {"status", std::string(to_string(r.status))},
         {"iterations", r.iters},
         {"primal_value", r.primal_value},
         {"dual_value", r.dual_value},
         {"gap", r.gap},
         {"primal_res", r.primal_res},
         {"dual_res", r.dual_res},
         {"y", r.y},
         {"X", to_json(r.X)},
         {"S", to_json(r.S)}};
  write_json(cfg, "solve.json", j);
  if (cfg.format == "json") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "status,primal_value,dual_value,gap\n"
              << j["status"].get<std::string>() << "," << format_double(r.primal_value) << ","
              << format_double(r.dual_value) << "," << format_double(r.gap) << "\n";
  }
  return r.status == Status::Optimal ? kOk : kPartial;
}

int cmd_trace(const RunConfig& cfg) {
  const Loaded in = load(cfg);
  prepare_output(cfg);
  TraceOptions topts;
  topts.solver = solver_options(cfg);
  topts.jobs = cfg.jobs;
  topts.strict = false;
  const GapProfile prof =
      trace_theta(in.instance, default_theta_grid(cfg.theta_points), cfg.schedule, topts);
  std::optional<AlphaScan> scan;
  if (cfg.alpha_t > 0.0) scan = alpha_scan(in.instance, cfg.alpha_t, default_alpha_grid(), topts.solver);
  const StructureReport rep = structure_report(prof, scan);

  {
    auto out = open_out(cfg, "samples.csv");
    write_samples_csv(prof, out);
  }
  {
    auto out = open_out(cfg, "profile.dat");
    write_gnuplot(prof, out);
  }
  const Json pj = profile_to_json(prof, rep);
  write_json(cfg, "profile.json", pj);
  write_json(cfg, "structure.json", report_to_json(rep));

  if (cfg.format == "json") {
    std::cout << pj.dump(2) << "\n";
  } else {
    write_samples_csv(prof, std::cout);
  }
  const std::size_t failed = prof.failed_rows() + (prof.vp_ray.limit.ok() ? 0 : 1) +
                             (prof.vd_ray.limit.ok() ? 0 : 1);
  if (failed) {
    spdlog::warn("{} rays without enough converged points", failed);
    return kPartial;
  }
  return kOk;
}

int cmd_reduce(const RunConfig& cfg) {
  const Loaded in = load(cfg);
  prepare_output(cfg);
  FrOptions fo;
  std::vector<Side> sides;
  if (cfg.side == "both") {
    sides = {Side::Primal, Side::Dual};
  } else {
    sides = {side_from_string(cfg.side)};
  }
  Json cert{{"instance", in.instance.name()}, {"chains", Json::array()}};
  for (Side s : sides) {
    const FaceChain chain = facial_reduction(in.instance, s, fo);
    cert["chains"].push_back(to_json(chain));
    std::cout << to_string(s) << " sd_upper " << chain.sd_upper << "\n";
  }
  write_json(cfg, "certificate.json", cert);
  return kOk;
}

int cmd_harness(const RunConfig& cfg) {
  const Loaded in = load(cfg);
  prepare_output(cfg);
  HarnessOptions ho;
  ho.solver = solver_options(cfg);
  std::optional<double> vp, vd;
  if (in.entry) {
    vp = in.entry->known_vp;
    vd = in.entry->known_vd;
  }
  const HarnessRun run = run_harness(in.instance, vp, vd, {0.5, 1.0, 2.0}, {1e-2, 1e-3}, ho);
  Json reports = Json::array();
  for (const auto& r : run.reports) {
    reports.push_back(to_json(r));
    const char* verdict = r.skipped() ? "SKIP (precondition)" : r.pass() ? "PASS" : "FAIL";
    std::cout << r.name << ": " << verdict << " (" << r.lines.size() << " lines)\n";
  }
  Json j{{"instance", in.instance.name()},
         {"steps", run.steps},
         {"constants",
          {{"kappa", run.constants.kappa},
           {"M", run.constants.M},
           {"K", run.constants.K},
           {"vp", run.constants.vp},
           {"vd", run.constants.vd}}},
         {"pass", run.pass()},
         {"reports", std::move(reports)}};
  write_json(cfg, "harness.json", j);
  return run.pass() ? kOk : kError;
}

int cmd_gallery(const RunConfig& cfg) {
  prepare_output(cfg);
  if (cfg.gallery.empty()) {
    export_gallery(cfg.output_dir);
    for (const auto& n : gallery_names()) std::cout << n << "\n";
    return kOk;
  }
  const GalleryEntry e = gallery_entry(cfg.gallery);
  write_sdpa(e.instance, cfg.output_dir / (cfg.gallery + ".dat-s"));
  write_json(cfg, cfg.gallery + ".json", to_json(e.instance));
  std::cout << cfg.gallery << "\n";
  return kOk;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("gapscope");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("GAPSCOPE_LOG"))
    spdlog::set_level(spdlog::level::from_str(lvl));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  RunConfig cfg;
  CLI::App app{"Perturbation analysis of semidefinite programs with duality gaps"};
  app.require_subcommand(1);

  auto add_instance = [&](CLI::App* sub) {
    sub->add_option("--gallery", cfg.gallery, "Built-in instance (ramana, sd2, control)");
    sub->add_option("--input", cfg.input, "SDPA sparse file (.dat-s)");
    sub->add_option("--output-dir", cfg.output_dir, "Directory for output files");
    sub->add_option("--format", cfg.format, "Summary format on stdout")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--tol", cfg.tol, "Solver gap and feasibility tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-iters", cfg.solver.max_iters, "Solver iteration limit");
  };

  auto* solve = app.add_subcommand("solve", "Solve D(eps, eta) once");
  add_instance(solve);
  solve->add_option("--eps", cfg.eps, "Cost perturbation");
  solve->add_option("--eta", cfg.eta, "Right-hand side perturbation");

  auto* trace = app.add_subcommand("trace", "Trace limiting values along rays");
  add_instance(trace);
  trace->add_option("--theta-points", cfg.theta_points, "Number of angles in [0, pi/2]");
  trace->add_option("--t0", cfg.schedule.t0, "First t of the schedule");
  trace->add_option("--t-ratio", cfg.schedule.ratio, "Geometric ratio of the schedule");
  trace->add_option("--t-steps", cfg.schedule.steps, "Number of steps after t0");
  trace->add_option("--jobs", cfg.jobs, "Worker threads (0: all cores)");
  trace->add_option("--alpha-t", cfg.alpha_t, "Also scan alpha at this t (0: off)");

  auto* reduce = app.add_subcommand("reduce", "Facial reduction certificate");
  add_instance(reduce);
  reduce->add_option("--side", cfg.side, "primal, dual or both")
      ->check(CLI::IsMember({"primal", "dual", "both"}));

  auto* harness = app.add_subcommand("harness", "Check the bound constants and inequalities");
  add_instance(harness);

  auto* gallery = app.add_subcommand("gallery", "Export built-in instances");
  gallery->add_option("--gallery", cfg.gallery, "Export only this instance");
  gallery->add_option("--output-dir", cfg.output_dir, "Directory for output files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    cfg.schedule.validate();
    if (app.got_subcommand(solve)) return cmd_solve(cfg);
    if (app.got_subcommand(trace)) return cmd_trace(cfg);
    if (app.got_subcommand(reduce)) return cmd_reduce(cfg);
    if (app.got_subcommand(harness)) return cmd_harness(cfg);
    return cmd_gallery(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
}
