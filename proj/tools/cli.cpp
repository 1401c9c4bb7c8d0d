#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "stabrb/analysis.hpp"
#include "stabrb/config.hpp"
#include "stabrb/errors.hpp"
#include "stabrb/io.hpp"

namespace stabrb::cli {

namespace {

using Echo = std::vector<std::pair<std::string, std::string>>;

struct Globals {
  std::string config;
  std::string out;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  bool dump_operators = false;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
};

class InvalidUsage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RunConfig resolve(const Globals& g) {
  if (g.config.empty()) throw InvalidUsage("--config is required for this command");
  RunConfig c = load_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (g.threads) {
    if (*g.threads < 1) throw InvalidArgument("config: threads must be >= 1");
    c.threads = *g.threads;
  }
  if (!g.out.empty()) c.output = g.out;
  return c;
}

std::string out_dir(const Globals& g, const std::optional<RunConfig>& c) {
  if (!g.out.empty()) return g.out;
  return c ? c->output : "out";
}

std::string path_in(const std::string& dir, const std::string& name) { return (std::filesystem::path(dir) / name).string(); }

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write '" + path + "'");
  return f;
}

std::string mu_text(Parameter mu) {
  return "(" + format_number(mu.mu1) + ", " + format_number(mu.mu2) + ")";
}

Echo model_echo(const ReducedModel& m) {
  std::ostringstream s;
  write_model(s, m);
  Echo e;
  std::istringstream in(s.str());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) break;
    e.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  return e;
}

ReducedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open model '" + path + "'");
  return read_model(in);
}

void dump_operators(const HighFidelityModel& hf, const std::string& dir) {
  ensure_directory(dir);
  const auto dump = [&](const std::string& name, const AffineOperator<SparseMatrix>& op) {
    for (std::size_t q = 0; q < op.size(); ++q) {
      auto f = open_out(path_in(dir, name + "_" + std::to_string(q) + ".mtx"));
      write_matrix_market(f, op[q].op);
    }
  };
  dump("A", hf.viscous());
  dump("B", hf.divergence());
  const auto& s = hf.stabilization();
  dump("Suv", s.suv);
  dump("Spv", s.spv);
  dump("Suq", s.suq);
  dump("Spq", s.spq);
  auto xu = open_out(path_in(dir, "Xu.mtx"));
  write_matrix_market(xu, hf.velocity_gram());
  auto mp = open_out(path_in(dir, "Mp.mtx"));
  write_matrix_market(mp, hf.pressure_mass());
}

void dump_reduced(const ReducedModel& m, const std::string& dir) {
  ensure_directory(dir);
  const auto dump = [&](const std::string& name, const std::vector<ReducedAffine>& ops) {
    for (std::size_t q = 0; q < ops.size(); ++q) {
      auto f = open_out(path_in(dir, name + "_N_" + std::to_string(q) + ".mtx"));
      write_matrix_market(f, ops[q].m);
    }
  };
  dump("A", m.a);
  dump("B", m.b);
  dump("Suv", m.suv);
  dump("Spv", m.spv);
  dump("Suq", m.suq);
  dump("Spq", m.spq);
}

// ----------------------------------------------------------------- commands

int cmd_fe_solve(const Globals& g, std::optional<double> mu1, std::optional<double> mu2, Context& ctx) {
  const RunConfig c = resolve(g);
  const Parameter mu{mu1.value_or(c.online.mu1), mu2.value_or(c.online.mu2)};
  const HighFidelityModel hf(c.problem);
  const std::string dir = c.output;
  ensure_directory(dir);
  if (g.dump_operators) dump_operators(hf, path_in(dir, "operators"));
  FeSolution s;
  try {
    s = hf.solve(mu);
  } catch (const SingularMatrix& e) {
    ctx.err << "fe-solve: FE solve at mu = " << mu_text(mu) << " failed (singular system): " << e.what() << '\n';
    return kSolverFailure;
  } catch (const NonConvergence& e) {
    ctx.err << "fe-solve: FE Newton at mu = " << mu_text(mu) << " failed: " << e.what() << '\n';
    return kSolverFailure;
  }
  {
    auto f = open_out(path_in(dir, "fe_solution.vtk"));
    write_vtk(f, hf, s, "stabrb fe-solve mu = " + mu_text(mu));
  }
  auto d = open_out(path_in(dir, "diagnostics.txt"));
  for (const auto& [k, v] : c.echo()) d << "# " << k << " = " << v << '\n';
  d << "mu1 = " << format_number(mu.mu1) << "\nmu2 = " << format_number(mu.mu2) << '\n';
  d << "velocity_dofs = " << hf.velocity_dofs() << "\npressure_dofs = " << hf.pressure_dofs() << '\n';
  d << "iterations = " << s.diagnostics.iterations << '\n';
  d << "continuation_steps = " << s.diagnostics.continuation_steps << '\n';
  d << "final_residual = " << format_number(s.diagnostics.final_residual) << '\n';
  d << "residual_history =";
  for (double r : s.diagnostics.residual_history) d << ' ' << format_number(r);
  d << '\n';
  ctx.out << "fe-solve: mu = " << mu_text(mu) << ", " << hf.velocity_dofs() << " velocity + " << hf.pressure_dofs()
          << " pressure dofs, " << s.diagnostics.iterations << " iteration(s), relative residual "
          << format_number(s.diagnostics.final_residual) << "\n  wrote " << path_in(dir, "fe_solution.vtk") << '\n';
  return kOk;
}

struct OfflineOutput {
  HighFidelityModel hf;
  OfflineResult result;
};

void write_trace(const RunConfig& c, const GreedyTrace& t, const std::string& path) {
  auto f = open_out(path);
  CsvWriter w(f, c.echo(), {"iteration", "mu1", "mu2", "max_indicator"});
  for (std::size_t i = 0; i < t.selected.size(); ++i) {
    w.field(i + 1).field(t.selected[i].mu1).field(t.selected[i].mu2).field(t.max_indicator[i]);
    w.end_row();
  }
}

OfflineResult run_offline(const RunConfig& c, const HighFidelityModel& hf, const Globals& g, Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  OfflineResult r = greedy_offline(hf, {c.n_max, c.train_size, c.seed, c.threads});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ensure_directory(c.output);
  {
    auto f = open_out(path_in(c.output, "model.rbm"));
    write_model(f, r.model);
  }
  write_trace(c, r.trace, path_in(c.output, "trace.csv"));
  if (g.dump_operators) {
    dump_operators(hf, path_in(c.output, "operators"));
    dump_reduced(r.model, path_in(c.output, "operators"));
  }
  ctx.out << "offline: N = " << r.model.n_p << " (" << r.trace.stop_reason << "), " << hf.velocity_dofs() << " velocity + "
          << hf.pressure_dofs() << " pressure dofs, " << format_number(secs) << " s\n";
  for (const auto& n : r.trace.notes) ctx.err << "offline: " << n << '\n';
  return r;
}

int cmd_offline(const Globals& g, Context& ctx) {
  const RunConfig c = resolve(g);
  const HighFidelityModel hf(c.problem);
  run_offline(c, hf, g, ctx);
  return kOk;
}

int cmd_online(const Globals& g, const std::string& model_path, std::optional<double> mu1, std::optional<double> mu2,
               const std::string& option_text, bool with_truth, Context& ctx) {
  std::optional<RunConfig> c;
  if (!g.config.empty()) c = resolve(g);
  const std::string dir = out_dir(g, c);
  const ReducedModel model = load_model(model_path.empty() ? path_in(dir, "model.rbm") : model_path);
  const Option option = !option_text.empty() ? option_from_string(option_text) : c ? c->option : Option::I;
  if ((!mu1 || !mu2) && !c) throw InvalidUsage("online: give --mu1 and --mu2 or a --config with online.mu1/mu2");
  const Parameter mu{mu1.value_or(c ? c->online.mu1 : 0.0), mu2.value_or(c ? c->online.mu2 : 0.0)};
  const HighFidelityModel hf(model.config);
  const OnlineSystem sys(model, option);
  const double beta = reduced_infsup(sys, mu);
  const double beta_mod = modified_infsup(sys, mu);
  const bool no_guarantee = option == Option::IV;
  if (no_guarantee) {
    ctx.err << "online: warning: option (iv) has neither supremizers nor online stabilisation; the reduced inf-sup "
               "condition is not guaranteed (beta_N = "
            << format_number(beta) << ")\n";
  }

  const auto t0 = std::chrono::steady_clock::now();
  ReducedSolution rs;
  try {
    rs = sys.solve(mu);
  } catch (const SingularMatrix& e) {
    ctx.err << "online: reduced solve at mu = " << mu_text(mu) << " failed: " << e.what() << '\n';
    return no_guarantee ? kNoInfSup : kSolverFailure;
  } catch (const NonConvergence& e) {
    ctx.err << "online: reduced solve at mu = " << mu_text(mu) << " failed: " << e.what() << '\n';
    return no_guarantee ? kNoInfSup : kSolverFailure;
  }
  const double online_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const FeSolution rb = reconstruct(hf, model, rs);

  std::optional<FieldErrors> err;
  if (with_truth) {
    try {
      err = relative_errors(hf, rb, hf.solve(mu));
    } catch (const std::runtime_error& e) {
      ctx.err << "online: FE truth at mu = " << mu_text(mu) << " failed: " << e.what() << '\n';
      return kSolverFailure;
    }
  }

  ensure_directory(dir);
  {
    auto f = open_out(path_in(dir, "online.vtk"));
    write_vtk(f, hf, rb, "stabrb online option (" + std::string(to_string(option)) + ") mu = " + mu_text(mu));
  }
  Echo echo = model_echo(model);
  echo.emplace_back("option", std::string(to_string(option)));
  {
    auto f = open_out(path_in(dir, "online.csv"));
    CsvWriter w(f, echo,
                {"option", "mu1", "mu2", "N", "iterations", "beta_N", "beta_N_modified", "velocity_rel_err", "pressure_rel_err"});
    w.field(std::string(to_string(option))).field(mu.mu1).field(mu.mu2).field(model.n_p).field(rs.iterations);
    w.field(beta).field(beta_mod);
    if (err) {
      w.field(err->velocity).field(err->pressure);
    } else {
      w.field(std::string()).field(std::string());
    }
    w.end_row();
  }
  {
    auto f = open_out(path_in(dir, "online_coefficients.csv"));
    CsvWriter w(f, echo, {"field", "index", "value"});
    for (Eigen::Index i = 0; i < rs.u.size(); ++i) {
      w.field(std::string("velocity")).field(static_cast<long long>(i)).field(rs.u[i]);
      w.end_row();
    }
    for (Eigen::Index i = 0; i < rs.p.size(); ++i) {
      w.field(std::string("pressure")).field(static_cast<long long>(i)).field(rs.p[i]);
      w.end_row();
    }
  }
  ctx.out << "online: option (" << to_string(option) << ") mu = " << mu_text(mu) << ", " << rs.iterations
          << " iteration(s), " << format_number(online_secs) << " s, beta_N = " << format_number(beta)
          << ", modified = " << format_number(beta_mod);
  if (err) ctx.out << "\n  reconstruction error: velocity " << format_number(err->velocity) << ", pressure " << format_number(err->pressure);
  ctx.out << '\n';
  return no_guarantee ? kNoInfSup : kOk;
}

int cmd_sweep(const Globals& g, const std::string& model_path, Context& ctx) {
  const RunConfig c = resolve(g);
  const HighFidelityModel hf(c.problem);
  ReducedModel model;
  std::vector<Parameter> selected;
  if (model_path.empty()) {
    OfflineResult r = run_offline(c, hf, g, ctx);
    model = std::move(r.model);
    selected = r.trace.selected;
  } else {
    model = load_model(model_path);
    selected = model.snapshots.mu;
  }
  SweepOptions o;
  o.n_values = c.n_values;
  o.test_set = make_test_set(c.problem.box, c.test_size, c.seed + 1, selected);
  o.seed = c.seed;
  o.threads = c.threads;
  for (int n : o.n_values) {
    if (n > static_cast<int>(model.snapshots.size()))
      throw InvalidArgument("sweep: N = " + std::to_string(n) + " exceeds the " + std::to_string(model.snapshots.size()) + " stored snapshots");
  }
  const ErrorReport rep = error_sweep(hf, model, o);
  for (const auto& w : rep.warnings) ctx.err << "sweep: warning: " << w << '\n';
  ensure_directory(c.output);
  {
    auto f = open_out(path_in(c.output, "errors.csv"));
    CsvWriter w(f, c.echo(), {"N", "option", "field", "norm", "mean_rel_err", "max_rel_err", "n_test", "seed"});
    for (const auto& r : rep.rows) {
      w.field(r.n).field(std::string(to_string(r.option))).field(r.field).field(r.norm).field(r.mean).field(r.max);
      w.field(r.n_test).field(std::to_string(r.seed));
      w.end_row();
    }
  }
  {
    auto f = open_out(path_in(c.output, "errors_points.csv"));
    CsvWriter w(f, c.echo(), {"N", "option", "point", "mu1", "mu2", "velocity_rel_err", "pressure_rel_err"});
    for (const auto& p : rep.points) {
      w.field(p.n).field(std::string(to_string(p.option))).field(p.point).field(p.mu.mu1).field(p.mu.mu2);
      w.field(p.velocity).field(p.pressure);
      w.end_row();
    }
  }
  ctx.out << "sweep: " << rep.rows.size() << " rows, " << o.test_set.size() << " test points; FE truth "
          << format_number(rep.truth_seconds) << " s, online " << format_number(rep.online_seconds) << " s\n";
  return kOk;
}

int cmd_infsup(const Globals& g, const std::string& model_path, const std::string& grid_text, Context& ctx) {
  std::optional<RunConfig> c;
  if (!g.config.empty()) c = resolve(g);
  const std::string dir = out_dir(g, c);
  const ReducedModel model = load_model(model_path.empty() ? path_in(dir, "model.rbm") : model_path);
  std::array<int, 2> grid = c ? c->infsup_grid : std::array<int, 2>{5, 5};
  if (!grid_text.empty()) {
    const auto x = grid_text.find('x');
    if (x == std::string::npos) throw InvalidArgument("infsup: --grid expects N1xN2");
    try {
      grid = {std::stoi(grid_text.substr(0, x)), std::stoi(grid_text.substr(x + 1))};
    } catch (const std::exception&) {
      throw InvalidArgument("infsup: --grid expects N1xN2");
    }
  }
  const auto rows = infsup_profile(model, parameter_grid(model.config.box, grid[0], grid[1]),
                                   {Option::I, Option::II, Option::III, Option::IV});
  ensure_directory(dir);
  auto f = open_out(path_in(dir, "infsup.csv"));
  CsvWriter w(f, model_echo(model), {"mu1", "mu2", "option", "beta_N", "beta_N_modified"});
  for (const auto& r : rows) {
    w.field(r.mu.mu1).field(r.mu.mu2).field(std::string(to_string(r.option))).field(r.beta).field(r.beta_modified);
    w.end_row();
  }
  ctx.out << "infsup: " << rows.size() << " rows on a " << grid[0] << "x" << grid[1] << " grid\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  CLI::App app{"Stabilised FE and reduced-basis solver for the parametrised lid-driven cavity", "stabrb"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Run configuration (key = value)");
  app.add_option("--out", g.out, "Output directory (overrides `output`)");
  app.add_option("--threads", g.threads, "Worker threads (overrides `threads`)");
  app.add_option("--seed", g.seed, "Seed (overrides `seed`)");
  app.add_flag("--dump-operators", g.dump_operators, "Write FE (and reduced) operators as MatrixMarket");

  std::optional<double> mu1, mu2;
  std::string model_path, option_text, grid_text;
  bool no_truth = false;
  auto* fe = app.add_subcommand("fe-solve", "Single FE solve, VTK + diagnostics");
  fe->add_option("--mu1", mu1, "mu_1 (default online.mu1)");
  fe->add_option("--mu2", mu2, "mu_2 (default online.mu2)");
  auto* off = app.add_subcommand("offline", "Greedy offline stage: model.rbm + trace.csv");
  auto* on = app.add_subcommand("online", "Online solve from a stored model");
  on->add_option("--model", model_path, "Model file (default <out>/model.rbm)");
  on->add_option("--mu1", mu1, "mu_1");
  on->add_option("--mu2", mu2, "mu_2");
  on->add_option("--option", option_text, "i | ii | iii | iv");
  on->add_flag("--no-truth", no_truth, "Skip the FE reference solve");
  auto* sw = app.add_subcommand("sweep", "Error sweep over N and options: errors.csv");
  sw->add_option("--model", model_path, "Stored model (default: run offline first)");
  auto* is = app.add_subcommand("infsup", "Reduced inf-sup constants on a parameter grid: infsup.csv");
  is->add_option("--model", model_path, "Model file (default <out>/model.rbm)");
  is->add_option("--grid", grid_text, "N1xN2 (default infsup.grid or 5x5)");
  for (auto* sub : {fe, off, on, sw, is}) sub->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "stabrb: " << e.what() << '\n' << app.help();
    return kUsage;
  }

  try {
    if (fe->parsed()) return cmd_fe_solve(g, mu1, mu2, ctx);
    if (off->parsed()) return cmd_offline(g, ctx);
    if (on->parsed()) return cmd_online(g, model_path, mu1, mu2, option_text, !no_truth, ctx);
    if (sw->parsed()) return cmd_sweep(g, model_path, ctx);
    if (is->parsed()) return cmd_infsup(g, model_path, grid_text, ctx);
  } catch (const InvalidUsage& e) {
    err << "stabrb: " << e.what() << '\n';
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "stabrb: invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const Unsupported& e) {
    err << "stabrb: invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const SingularMatrix& e) {
    err << "stabrb: solver failure: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const NonConvergence& e) {
    err << "stabrb: solver failure: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::exception& e) {
    err << "stabrb: error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace stabrb::cli
