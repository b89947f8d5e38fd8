#include "svol/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "svol/analysis.hpp"
#include "svol/field_io.hpp"
#include "svol/kernels/dispatch.hpp"
#include "svol/quadrature.hpp"
#include "svol/report_json.hpp"

namespace svol::cli {

namespace {

namespace fs = std::filesystem;
using report::Json;

struct TaskContext {
  const RunConfig& cfg;
  fs::path outdir;
  std::vector<std::string> artifacts;

  void write_json(const std::string& name, const Json& j) {
    const fs::path p = outdir / name;
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << j.dump(2) << "\n";
    artifacts.push_back(p.string());
  }
};

model::ModelSpec model_from_config(const RunConfig& cfg) {
  model::ModelSpec spec;
  spec.name = cfg.get_string_or("model.name", "model");
  auto parse_coef = [&](const char* key) {
    const std::string text = cfg.get_string(key);
    ParseResult r = svol::parse(text);
    if (!r.ok())
      throw ConfigError(std::string(key) + ": parse error at offset " +
                        std::to_string(r.error->position) + ": " + r.error->message);
    return *r.expr;
  };
  spec.mu = parse_coef("model.mu");
  spec.sigma = parse_coef("model.sigma");
  spec.b = parse_coef("model.b");
  spec.rho = cfg.get_double("model.rho");
  return spec;
}

payoff::Payoff payoff_from_config(const RunConfig& cfg) {
  const std::string type = cfg.get_string("payoff.type");
  if (type == "call") return payoff::call(cfg.get_double("payoff.strike"));
  if (type == "put") return payoff::put(cfg.get_double("payoff.strike"));
  if (type == "digital")
    return payoff::digital(cfg.get_double("payoff.strike"),
                           cfg.get_double_or("payoff.cash", 1.0));
  if (type == "identity") return payoff::identity();
  if (type == "constant") return payoff::constant(cfg.get_double("payoff.cash"));
  if (type == "piecewise") {
    std::vector<payoff::Breakpoint> pts;
    for (const std::string& item : cfg.get_string_list("payoff.points")) {
      const std::size_t colon = item.find(':');
      if (colon == std::string::npos)
        throw ConfigError("payoff.points entries must look like x:g");
      pts.push_back(
          {std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    }
    return payoff::piecewise_linear(pts, cfg.get_double("payoff.terminal_slope"));
  }
  throw ConfigError("unknown payoff.type '" + type + "'");
}

mc::MCConfig mc_from_config(const RunConfig& cfg, bool seed_required) {
  mc::MCConfig m;
  m.n_paths = cfg.get_int_or("mc.paths", 100000);
  m.n_steps = static_cast<int>(cfg.get_int_or("mc.steps", 200));
  if (seed_required && !cfg.has("mc.seed"))
    throw ConfigError("mc.seed is required (no wall-clock default): set it explicitly "
                      "for reproducibility");
  m.seed = static_cast<std::uint64_t>(cfg.get_int_or("mc.seed", 0));
  m.antithetic = cfg.get_bool_or("mc.antithetic", false);
  m.n_threads = static_cast<int>(cfg.get_int_or("mc.threads", 0));
  if (cfg.has("mc.barriers")) m.barrier_levels = cfg.get_double_list("mc.barriers");
  return m;
}

std::optional<model::BoundaryKind> boundary_override(const RunConfig& cfg) {
  if (!cfg.has("override.boundary")) return std::nullopt;
  const std::string s = cfg.get_string("override.boundary");
  if (s == "unattainable") return model::BoundaryKind::Unattainable;
  if (s == "absorbing") return model::BoundaryKind::Absorbing;
  if (s == "reflecting") return model::BoundaryKind::Reflecting;
  throw ConfigError("override.boundary must be unattainable|absorbing|reflecting");
}

// validates and returns the report; throws nothing on soft failure (caller
// checks hard_ok)
model::ValidationReport validate_model(const RunConfig& cfg,
                                       const model::ModelSpec& spec) {
  return model::validate(spec, cfg.get_double_or("validate.y_probe", 10.0),
                         static_cast<int>(cfg.get_int_or("validate.samples", 64)));
}

int task_validate(TaskContext& ctx, RunResult& res) {
  const model::ModelSpec spec = model_from_config(ctx.cfg);
  const model::ValidationReport rep = validate_model(ctx.cfg, spec);
  Json j;
  j["task"] = "validate";
  j["config"] = report::config_json(ctx.cfg);
  j["validation"] = report::to_json(rep);
  ctx.write_json("report.json", j);
  res.summary = rep.hard_ok ? "validation passed" : "validation failed";
  return rep.hard_ok ? 0 : 2;
}

int task_classify(TaskContext& ctx, RunResult& res) {
  const model::ModelSpec spec = model_from_config(ctx.cfg);
  const model::ValidationReport val = validate_model(ctx.cfg, spec);
  Json j;
  j["task"] = "classify";
  j["config"] = report::config_json(ctx.cfg);
  j["validation"] = report::to_json(val);
  if (!val.hard_ok) {
    ctx.write_json("report.json", j);
    res.summary = "validation failed";
    return 2;
  }
  const payoff::Payoff g = payoff_from_config(ctx.cfg);
  const analysis::ClassificationReport cls =
      analysis::classify(spec, g, ctx.cfg.get_double_or("feller.c", 1.0),
                         ctx.cfg.get_double_or("feller.tol", 1e-6));
  j["classification"] = report::to_json(cls);
  ctx.write_json("report.json", j);
  res.summary = std::string("martingale=") + analysis::to_string(cls.martingale) +
                " uniqueness=" + analysis::to_string(cls.uniqueness);
  const bool inconclusive =
      cls.martingale == analysis::MartingaleVerdict::Inconclusive ||
      (!cls.boundary.kind && !boundary_override(ctx.cfg));
  return inconclusive ? 3 : 0;
}

int task_price(TaskContext& ctx, RunResult& res) {
  const model::ModelSpec spec = model_from_config(ctx.cfg);
  const model::ValidationReport val = validate_model(ctx.cfg, spec);
  Json j;
  j["task"] = "price";
  j["config"] = report::config_json(ctx.cfg);
  j["validation"] = report::to_json(val);
  if (!val.hard_ok) {
    ctx.write_json("report.json", j);
    res.summary = "validation failed";
    return 2;
  }
  const payoff::Payoff g = payoff_from_config(ctx.cfg);
  const double x0 = ctx.cfg.get_double("x0");
  const double y0 = ctx.cfg.get_double("y0");
  const double T = ctx.cfg.get_double("maturity");
  const analysis::ClassificationReport cls =
      analysis::classify(spec, g, ctx.cfg.get_double_or("feller.c", 1.0),
                         ctx.cfg.get_double_or("feller.tol", 1e-6));
  j["classification"] = report::to_json(cls);
  std::optional<model::BoundaryKind> bkind = cls.boundary.kind;
  if (!bkind) bkind = boundary_override(ctx.cfg);
  if (!bkind) {
    ctx.write_json("report.json", j);
    res.summary = "zero-boundary class inconclusive; supply override.boundary";
    return 3;
  }
  const mc::MCConfig mcfg = mc_from_config(ctx.cfg, /*seed_required=*/true);
  const mc::Estimate est = mc::price(spec, *bkind, g, x0, y0, T, mcfg);
  j["mc_price"] = report::to_json(est);
  ctx.write_json("report.json", j);
  res.summary = "mc price " + std::to_string(est.mean) + " +/- " +
                std::to_string(est.std_error);
  return 0;
}

int task_defect(TaskContext& ctx, RunResult& res) {
  const model::ModelSpec spec = model_from_config(ctx.cfg);
  const model::ValidationReport val = validate_model(ctx.cfg, spec);
  Json j;
  j["task"] = "defect";
  j["config"] = report::config_json(ctx.cfg);
  j["validation"] = report::to_json(val);
  if (!val.hard_ok) {
    ctx.write_json("report.json", j);
    res.summary = "validation failed";
    return 2;
  }
  const double x0 = ctx.cfg.get_double("x0");
  const double y0 = ctx.cfg.get_double("y0");
  const double T = ctx.cfg.get_double("maturity");
  const payoff::Payoff g = payoff::identity();   // defect is payoff-independent
  const analysis::ClassificationReport cls =
      analysis::classify(spec, g, ctx.cfg.get_double_or("feller.c", 1.0),
                         ctx.cfg.get_double_or("feller.tol", 1e-6));
  j["classification"] = report::to_json(cls);
  if (cls.martingale == analysis::MartingaleVerdict::Inconclusive) {
    ctx.write_json("report.json", j);
    res.summary = "martingale classification inconclusive";
    return 3;
  }
  const bool explosive =
      cls.martingale == analysis::MartingaleVerdict::StrictLocalMartingale;
  const double y_max = explosive
                           ? ctx.cfg.get_double_or("grid.y_max",
                                                   std::max(1e4, 100.0 * std::max(1.0, y0)))
                           : ctx.cfg.get_double_or(
                                 "grid.y_max",
                                 ctx.cfg.get_double_or("grid.y_max_mult", 50.0) * y0);
  const std::size_t ny = static_cast<std::size_t>(ctx.cfg.get_int_or("grid.ny", 200));
  const std::size_t nsteps =
      static_cast<std::size_t>(ctx.cfg.get_int_or("grid.steps", 200));
  std::vector<double> ynodes =
      grid::sinh_nodes_from_zero(y_max, ny, std::max(y0, y_max * 1e-4) / 8.0);
  grid::snap_anchors(ynodes, {y0});
  const grid::ProfileSeries I =
      pde::solve_survival(spec, ynodes, T / nsteps, T,
                          explosive ? pde::ProfileFarField::AbsorbZero
                                    : pde::ProfileFarField::SecondDerivZero);
  const double I_eval = I.interpolate(y0, T);
  j["survival_at_eval"] = I_eval;
  j["defect_at_eval"] = pde::defect(I_eval, x0);
  const fs::path csv = ctx.outdir / "survival_profile.csv";
  io::write_profile_csv(csv.string(), I, x0);
  ctx.artifacts.push_back(csv.string());
  ctx.write_json("report.json", j);
  res.summary = "defect(x0,y0,T) = " + std::to_string(pde::defect(I_eval, x0));
  return 0;
}

int task_demo(TaskContext& ctx, RunResult& res) {
  const model::ModelSpec spec = model_from_config(ctx.cfg);
  const model::ValidationReport val = validate_model(ctx.cfg, spec);
  Json j;
  j["task"] = "demo";
  j["config"] = report::config_json(ctx.cfg);
  j["validation"] = report::to_json(val);
  if (!val.hard_ok) {
    ctx.write_json("report.json", j);
    res.summary = "validation failed";
    return 2;
  }
  const payoff::Payoff g = payoff_from_config(ctx.cfg);
  analysis::DemoGridParams params;
  params.x_eval = ctx.cfg.get_double("x0");
  params.y_eval = ctx.cfg.get_double("y0");
  params.T = ctx.cfg.get_double("maturity");
  params.nx = static_cast<std::size_t>(ctx.cfg.get_int_or("grid.nx", 160));
  params.ny = static_cast<std::size_t>(ctx.cfg.get_int_or("grid.ny", 160));
  params.n_steps = static_cast<std::size_t>(ctx.cfg.get_int_or("grid.steps", 200));
  params.x_max_mult = ctx.cfg.get_double_or("grid.x_max_mult", 20.0);
  params.barrier = ctx.cfg.get_double_or(
      "grid.y_max", std::max(1e4, 100.0 * std::max(1.0, params.y_eval)));
  params.gap_threshold = ctx.cfg.get_double_or("demo.gap_threshold", 1e-3);

  const analysis::NonUniquenessDemo demo =
      analysis::demo_nonuniqueness(spec, g, params,
                                   ctx.cfg.get_double_or("feller.tol", 1e-6));
  j["demo"] = report::demo_summary_json(demo);
  ctx.write_json("report.json", j);
  if (demo.refused) {
    res.summary = "demo refused: " + demo.refusal_reason;
    return 3;
  }
  if (ctx.cfg.get_bool_or("output.fields", true)) {
    const fs::path fu = ctx.outdir / "value_function.bin";
    const fs::path fw = ctx.outdir / "second_solution.bin";
    const fs::path fi = ctx.outdir / "survival_profile.csv";
    io::write_field_binary(fu.string(), demo.u);
    io::write_field_binary(fw.string(), demo.w);
    io::write_profile_csv(fi.string(), demo.survival, params.x_eval);
    ctx.artifacts.push_back(fu.string());
    ctx.artifacts.push_back(fw.string());
    ctx.artifacts.push_back(fi.string());
  }
  res.summary = demo.all_checks_pass
                    ? "non-uniqueness exhibited: all four checks pass"
                    : "demo completed with failing checks (see report)";
  return 0;
}

int task_xval(TaskContext& ctx, RunResult& res) {
  const model::ModelSpec spec = model_from_config(ctx.cfg);
  const model::ValidationReport val = validate_model(ctx.cfg, spec);
  Json j;
  j["task"] = "xval";
  j["config"] = report::config_json(ctx.cfg);
  j["validation"] = report::to_json(val);
  if (!val.hard_ok) {
    ctx.write_json("report.json", j);
    res.summary = "validation failed";
    return 2;
  }
  const payoff::Payoff g = payoff_from_config(ctx.cfg);
  analysis::XValGridParams gp;
  gp.nx = static_cast<std::size_t>(ctx.cfg.get_int_or("grid.nx", 200));
  gp.ny = static_cast<std::size_t>(ctx.cfg.get_int_or("grid.ny", 100));
  gp.n_steps = static_cast<std::size_t>(ctx.cfg.get_int_or("grid.steps", 200));
  gp.x_max_mult = ctx.cfg.get_double_or("grid.x_max_mult", 20.0);
  gp.y_max_mult = ctx.cfg.get_double_or("grid.y_max_mult", 50.0);
  const mc::MCConfig mcfg = mc_from_config(ctx.cfg, /*seed_required=*/true);
  const analysis::CrossValidation xv = analysis::cross_validate(
      spec, g, ctx.cfg.get_double("x0"), ctx.cfg.get_double("y0"),
      ctx.cfg.get_double("maturity"), gp, mcfg, ctx.cfg.get_double_or("feller.c", 1.0),
      ctx.cfg.get_double_or("feller.tol", 1e-6));
  j["cross_validation"] = report::to_json(xv);
  ctx.write_json("report.json", j);
  res.summary = std::string("cross validation ") + (xv.pass ? "PASS" : "FAIL") +
                " (pde " + std::to_string(xv.pde_value) + ", mc " +
                std::to_string(xv.mc_mean) + ")";
  return 0;
}

int execute_task(TaskContext& ctx, const std::string& task, RunResult& res);

int task_sweep(TaskContext& ctx, RunResult& res) {
  const std::string inner = ctx.cfg.get_string_or("sweep.task", "classify");
  if (inner == "sweep") throw ConfigError("sweep.task cannot itself be sweep");
  const std::string param = ctx.cfg.get_string("sweep.param");
  const std::vector<std::string> values = ctx.cfg.get_string_list("sweep.values");
  std::vector<std::string> values2{""};
  const bool two_axis = ctx.cfg.has("sweep.param2");
  std::string param2;
  if (two_axis) {
    param2 = ctx.cfg.get_string("sweep.param2");
    values2 = ctx.cfg.get_string_list("sweep.values2");
  }

  const fs::path csv_path = ctx.outdir / "sweep.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
  csv << param;
  if (two_axis) csv << "," << param2;
  csv << ",exit_code,summary\n";

  int row = 0;
  for (const std::string& v1 : values) {
    for (const std::string& v2 : values2) {
      RunConfig sub = ctx.cfg;
      sub.set("task", inner);
      sub.set(param, v1);
      if (two_axis) sub.set(param2, v2);
      TaskContext sub_ctx{sub, ctx.outdir / ("point_" + std::to_string(row)), {}};
      fs::create_directories(sub_ctx.outdir);
      RunResult sub_res;
      int code;
      std::string summary;
      try {
        code = execute_task(sub_ctx, inner, sub_res);
        summary = sub_res.summary;
      } catch (const std::exception& e) {
        code = 4;
        summary = std::string("error: ") + e.what();
      }
      for (const auto& a : sub_ctx.artifacts) ctx.artifacts.push_back(a);
      std::string clean = summary;
      for (char& c : clean)
        if (c == ',' || c == '\n') c = ';';
      csv << v1;
      if (two_axis) csv << "," << v2;
      csv << "," << code << "," << clean << "\n";
      ++row;
    }
  }
  csv.close();
  ctx.artifacts.push_back(csv_path.string());
  res.summary = "sweep complete: " + std::to_string(row) + " points";
  return 0;
}

int execute_task(TaskContext& ctx, const std::string& task, RunResult& res) {
  if (task == "validate") return task_validate(ctx, res);
  if (task == "classify") return task_classify(ctx, res);
  if (task == "price") return task_price(ctx, res);
  if (task == "defect") return task_defect(ctx, res);
  if (task == "demo") return task_demo(ctx, res);
  if (task == "xval") return task_xval(ctx, res);
  if (task == "sweep") return task_sweep(ctx, res);
  throw ConfigError("unknown task '" + task + "'");
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  RunResult res;
  const auto t0 = std::chrono::steady_clock::now();
  std::string outdir_s = cfg.get_string_or("output.dir", "");
  if (outdir_s.empty()) {
    const char* env = std::getenv("SVOL_OUTPUT_DIR");
    outdir_s = env ? env : "svol_out";
  }
  TaskContext ctx{cfg, fs::path(outdir_s), {}};
  try {
    fs::create_directories(ctx.outdir);
    const std::string task = cfg.get_string("task");
    res.exit_code = execute_task(ctx, task, res);
  } catch (const ConfigError& e) {
    res.exit_code = 2;
    res.summary = std::string("config error: ") + e.what();
  } catch (const ExprError& e) {
    res.exit_code = 2;
    res.summary = std::string("coefficient evaluation error: ") + e.what();
  } catch (const quad::QuadratureError& e) {
    res.exit_code = 4;
    res.summary = std::string("numeric failure: ") + e.what();
  } catch (const std::exception& e) {
    res.exit_code = 4;
    res.summary = std::string("numeric failure: ") + e.what();
  }
  res.artifacts = ctx.artifacts;

  // metadata (wall clock, backend) lives outside the deterministic report
  try {
    const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
    Json meta;
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    meta["unix_time"] =
        std::chrono::duration_cast<std::chrono::seconds>(now).count();
    meta["duration_s"] = dt.count();
    meta["backend"] =
        kern::active_backend() == kern::Backend::Avx2 ? "avx2" : "scalar";
    meta["exit_code"] = res.exit_code;
    std::ofstream os(ctx.outdir / "metadata.json");
    if (os) os << meta.dump(2) << "\n";
  } catch (...) {
    // metadata is best-effort
  }
  return res;
}

RunResult run_file(const std::string& config_path,
                   const std::vector<std::string>& overrides) {
  try {
    return run(load_config(config_path, overrides));
  } catch (const ConfigError& e) {
    RunResult res;
    res.exit_code = 2;
    res.summary = std::string("config error: ") + e.what();
    return res;
  }
}

}  // namespace svol::cli
