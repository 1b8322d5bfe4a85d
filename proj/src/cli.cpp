#include "lcmdp/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "lcmdp/bench.hpp"
#include "lcmdp/gridworld.hpp"
#include "lcmdp/model.hpp"
#include "lcmdp/product.hpp"
#include "lcmdp/prune.hpp"
#include "lcmdp/sim.hpp"
#include "lcmdp/spec_lang.hpp"
#include "lcmdp/synth.hpp"
#include "lcmdp/util.hpp"

namespace lcmdp::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using spec_lang::Semantics;
using spec_lang::SpecKind;

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

// Collects written artifacts and ends with a manifest recording the launch
// configuration plus a hash per file, for reproducibility checks.
struct OutputDir {
  fs::path dir;
  json config;
  std::string command;
  std::map<std::string, std::string> hashes;

  OutputDir(std::string cmd, const std::string& out, json cfg)
      : dir(out), config(std::move(cfg)), command(std::move(cmd)) {
    fs::create_directories(dir);
  }

  fs::path write(const std::string& name, const std::string& content) {
    fs::path p = dir / name;
    write_file(p, content);
    hashes[name] = sha256_hex(content);
    return p;
  }

  void finish() {
    json manifest{{"command", command}, {"config", config}, {"outputs", hashes}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  }
};

// The specification may be given inline or as a path to a text file.
std::string spec_text(const std::string& spec) {
  std::error_code ec;
  if (!spec.empty() && fs::is_regular_file(spec, ec)) {
    std::string text = read_file(spec);
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text;
  }
  return spec;
}

SpecKind parse_kind(const std::string& kind) {
  if (kind == "scltl") return SpecKind::Scltl;
  if (kind == "regex") return SpecKind::Regex;
  if (kind == "dfa") return SpecKind::DfaFile;
  throw std::runtime_error("unknown --spec-kind '" + kind + "'");
}

Semantics parse_semantics(const std::string& s) {
  if (s == "prefix") return Semantics::Prefix;
  if (s == "exact") return Semantics::Exact;
  throw std::runtime_error("unknown --semantics '" + s + "'");
}

spec_lang::Dfa compile_for(const std::string& spec, const std::string& kind,
                           const std::vector<std::string>& ap, const std::string& semantics) {
  SpecKind k = parse_kind(kind);
  std::string text = k == SpecKind::DfaFile ? spec : spec_text(spec);
  return spec_lang::compile_spec(text, k, ap, parse_semantics(semantics));
}

std::vector<double> assemble_bounds(const std::vector<std::string>& bound_args, int n_aux) {
  std::vector<double> bounds(static_cast<std::size_t>(n_aux),
                             std::numeric_limits<double>::infinity());
  for (const auto& arg : bound_args) {
    auto eq = arg.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--bound expects <i>=<value>, got '" + arg + "'");
    int i = std::stoi(arg.substr(0, eq));
    double v = std::stod(arg.substr(eq + 1));
    if (i < 1 || i > n_aux)
      throw std::runtime_error(strf("--bound index %d out of range 1..%d", i, n_aux));
    bounds[static_cast<std::size_t>(i - 1)] = v;
  }
  return bounds;
}

struct GridArgs {
  std::string elev, mask, config;

  bool complete() const { return !elev.empty() && !mask.empty() && !config.empty(); }

  void add_options(CLI::App* cmd) {
    cmd->add_option("--grid-elev", elev, "terrain elevation map (CSV or PGM)");
    cmd->add_option("--grid-mask", mask, "region mask of label indices 0..3 (CSV or PGM)");
    cmd->add_option("--grid-config", config, "grid configuration JSON");
  }

  std::pair<Lcmdp, grid::GridConfig> build() const {
    grid::ElevationMap elevation = grid::load_elevation(elev);
    grid::GridConfig cfg = grid::load_grid_config(config);
    cfg.mask = grid::load_mask(mask, elevation.width, elevation.height);
    grid::RiskMap risk = grid::derive_risk(elevation);
    return {grid::build_grid_lcmdp(elevation, risk, cfg), cfg};
  }
};

Lcmdp load_validated(const std::string& path) {
  return load_model(path);  // validates on load
}

int cmd_compile(const std::string& spec, const std::string& kind, const std::string& ap_csv,
                const std::string& semantics, const std::string& out) {
  std::vector<std::string> ap;
  std::stringstream ss(ap_csv);
  std::string item;
  while (std::getline(ss, item, ',')) ap.push_back(item);
  if (ap.empty()) throw std::runtime_error("--ap must list at least one proposition");

  spec_lang::Dfa dfa = compile_for(spec, kind, ap, semantics);
  std::cout << "n_d = " << dfa.num_states() << "\n";

  OutputDir o("compile", out,
              json{{"spec", spec},
                   {"spec_kind", kind},
                   {"ap", ap},
                   {"semantics", semantics}});
  o.write("dfa.json", spec_lang::dfa_to_json(dfa).dump(2) + "\n");
  o.write("dfa.dot", spec_lang::to_dot(dfa));
  o.finish();
  return kExitOk;
}

int cmd_build_grid(const GridArgs& g, const std::string& out) {
  auto [model, cfg] = g.build();
  auto violations = validate(model);
  if (!violations.empty()) {
    for (const auto& v : violations) std::cerr << "build-grid: " << v << "\n";
    return kExitError;
  }
  OutputDir o("build-grid", out,
              json{{"grid_elev", g.elev}, {"grid_mask", g.mask}, {"grid_config", g.config}});
  o.write("model.json", to_json(model).dump(2) + "\n");
  o.finish();
  std::cout << "model: " << model.num_states() << " states\n";
  return kExitOk;
}

int cmd_solve(const std::string& model_path, const GridArgs& g, const std::string& spec,
              const std::string& kind, const std::string& semantics, double p_l,
              const std::vector<std::string>& bound_args, const std::string& prune_mode,
              bool dump_lp, const std::string& out) {
  Lcmdp model;
  if (!model_path.empty())
    model = load_validated(model_path);
  else if (g.complete())
    model = g.build().first;
  else
    throw std::runtime_error("solve needs --model or the full --grid-* trio");

  spec_lang::Dfa dfa = compile_for(spec, kind, model.ap, semantics);
  ProductLcmdp product = build_product(model, dfa, /*restrict_reachable=*/false);

  json prune_json = nullptr;
  if (prune_mode != "off") {
    PruneMode mode = prune_mode == "full" ? PruneMode::Full : PruneMode::ReachOnly;
    if (prune_mode != "full" && prune_mode != "reach-only")
      throw std::runtime_error("unknown --prune '" + prune_mode + "'");
    auto [pruned, report] = prune(product, mode);
    product = std::move(pruned);
    prune_json = report.to_json();
    std::cout << report.table();
  }

  std::vector<double> bounds = assemble_bounds(bound_args, model.n_costs - 1);
  SynthesisProblem prob{&product, p_l, bounds};
  OutputDir o("solve", out,
              json{{"model", model_path},
                   {"grid_elev", g.elev},
                   {"grid_mask", g.mask},
                   {"grid_config", g.config},
                   {"spec", spec},
                   {"spec_kind", kind},
                   {"semantics", semantics},
                   {"pl", p_l},
                   {"bounds", bounds},
                   {"prune", prune_mode}});

  if (dump_lp) {
    auto [lp, index] = build_lp(prob);
    o.write("lp.txt", lp.dump());
  }

  SynthesisResult res = synthesize(prob);
  json report = res.report.to_json();
  report["prune"] = prune_json;
  if (res.report.status == LpStatus::Optimal) {
    ExactEvaluation ev = evaluate_exact(res.policy, product);
    report["exact"] = {{"costs", ev.costs},
                       {"satisfaction", ev.satisfaction},
                       {"goal_probability", ev.goal_probability}};
    o.write("policy.json", policy_to_json(res.policy, product).dump(2) + "\n");
  }
  o.write("product.json", product_to_json(product).dump(2) + "\n");
  o.write("report.json", report.dump(2) + "\n");
  o.finish();

  std::cout << "status: " << lp_status_name(res.report.status) << "\n";
  if (res.report.status == LpStatus::Optimal) {
    std::cout << strf("objective (expected C_0): %.6f\n", res.report.objective);
    for (std::size_t i = 0; i < res.report.aux_costs.size(); ++i)
      std::cout << strf("expected C_%zu: %.6f\n", i + 1, res.report.aux_costs[i]);
    std::cout << strf("satisfaction: %.6f (required %.6f)\n", res.report.satisfaction, p_l);
    return kExitOk;
  }
  std::cerr << strf("no policy meets the bounds (P_l=%g): LP status %s\n", p_l,
                    lp_status_name(res.report.status));
  return kExitInfeasible;
}

int cmd_simulate(const std::string& product_path, const std::string& policy_path,
                 std::uint64_t seed, long n, long step_cap, const std::string& semantics,
                 bool csv, int keep, const std::string& out) {
  ProductLcmdp product = load_product(product_path);
  Policy policy = policy_from_json(json::parse(read_file(policy_path)), product);

  SimOptions opts;
  opts.seed = seed;
  opts.n = n;
  opts.step_cap = step_cap;
  opts.semantics = parse_semantics(semantics);
  std::ostringstream csv_out;
  if (csv) opts.csv = &csv_out;
  std::vector<Trajectory> kept;
  if (keep > 0) {
    opts.keep = &kept;
    opts.keep_count = keep;
  }

  SimStats stats = sample(policy, product, opts);

  OutputDir o("simulate", out,
              json{{"model", product_path},
                   {"policy", policy_path},
                   {"seed", seed},
                   {"n", n},
                   {"step_cap", step_cap},
                   {"semantics", semantics}});
  o.write("stats.json", stats.to_json().dump(2) + "\n");
  if (csv) o.write("trajectories.csv", csv_out.str());
  if (keep > 0) {
    json trajs = json::array();
    for (const auto& t : kept) {
      json cells = json::array();
      for (StateId x : t.states)
        cells.push_back(product.provenance[static_cast<std::size_t>(x)].first);
      trajs.push_back({{"cells", std::move(cells)}, {"satisfied", t.satisfied}});
    }
    o.write("traj.json", json{{"trajectories", std::move(trajs)}}.dump(2) + "\n");
  }
  o.finish();
  std::cout << strf("satisfaction rate: %.4f  goal rate: %.4f  truncated: %ld\n",
                    stats.satisfaction_rate, stats.goal_rate, stats.truncated);
  return kExitOk;
}

int cmd_render(const std::string& elev_path, const std::string& mask_path,
               const std::string& traj_path, int traj_index, int scale,
               const std::string& out) {
  grid::ElevationMap elev = grid::load_elevation(elev_path);
  std::vector<int> mask = grid::load_mask(mask_path, elev.width, elev.height);
  grid::RiskMap risk = grid::derive_risk(elev);

  std::vector<StateId> cells;
  if (!traj_path.empty()) {
    json j = json::parse(read_file(traj_path));
    const auto& trajs = j.at("trajectories");
    if (traj_index < 0 || traj_index >= static_cast<int>(trajs.size()))
      throw std::runtime_error(strf("--traj-index %d out of range (file has %zu)", traj_index,
                                    trajs.size()));
    for (const auto& cell : trajs[static_cast<std::size_t>(traj_index)].at("cells"))
      cells.push_back(cell.get<StateId>());
  }

  OutputDir o("render", out,
              json{{"grid_elev", elev_path},
                   {"grid_mask", mask_path},
                   {"traj", traj_path},
                   {"traj_index", traj_index},
                   {"scale", scale}});
  fs::path img = o.dir / "render.ppm";
  grid::render(img, risk, mask, cells, scale);
  o.hashes["render.ppm"] = sha256_hex(read_file(img));
  o.finish();
  std::cout << "wrote " << img.string() << "\n";
  return kExitOk;
}

int cmd_bench(const GridArgs& g, const std::string& spec, const std::string& kind,
              const std::string& semantics, double p_l,
              const std::vector<std::string>& bound_args, const std::string& prune_mode,
              const std::vector<int>& scales, const std::string& out) {
  grid::ElevationMap elev = grid::load_elevation(g.elev);
  grid::GridConfig cfg = grid::load_grid_config(g.config);
  cfg.mask = grid::load_mask(g.mask, elev.width, elev.height);

  BenchInputs inputs;
  inputs.elev = std::move(elev);
  inputs.cfg = std::move(cfg);
  inputs.dfa = compile_for(spec, kind, grid::kGridAp, semantics);
  inputs.p_l = p_l;
  inputs.bounds = assemble_bounds(bound_args, 1);
  inputs.wp_mode = prune_mode == "full" ? PruneMode::Full : PruneMode::ReachOnly;
  if (prune_mode != "full" && prune_mode != "reach-only")
    throw std::runtime_error("bench runs --prune reach-only or full, got '" + prune_mode + "'");

  std::vector<BenchRow> rows = run_bench(inputs, scales);
  std::cout << bench_table(rows);

  OutputDir o("bench", out,
              json{{"grid_elev", g.elev},
                   {"grid_mask", g.mask},
                   {"grid_config", g.config},
                   {"spec", spec},
                   {"spec_kind", kind},
                   {"semantics", semantics},
                   {"pl", p_l},
                   {"prune", prune_mode},
                   {"scales", scales}});
  o.write("bench.json", bench_to_json(rows).dump(2) + "\n");
  o.finish();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Policy synthesis for labeled constrained MDPs under co-safe "
               "LTL / regular-expression task specifications"};
  app.require_subcommand(1);

  // compile
  auto* compile = app.add_subcommand("compile", "compile a specification to a minimized DFA");
  std::string spec, spec_kind = "regex", semantics = "exact", ap_csv = "A,B,C,D", out = "out";
  compile->add_option("--spec", spec, "formula/regex text, or a file containing it")
      ->required();
  compile->add_option("--spec-kind", spec_kind, "scltl | regex | dfa");
  compile->add_option("--semantics", semantics, "prefix | exact");
  compile->add_option("--ap", ap_csv, "comma-separated atomic propositions");
  compile->add_option("--out", out, "output directory");

  // build-grid
  auto* build_grid = app.add_subcommand("build-grid", "build the terrain LCMDP model");
  GridArgs grid_args;
  grid_args.add_options(build_grid);
  std::string bg_out = "out";
  build_grid->add_option("--out", bg_out, "output directory");

  // solve
  auto* solve = app.add_subcommand("solve", "synthesize an optimal policy");
  std::string model_path;
  GridArgs solve_grid;
  std::string solve_spec, solve_kind = "regex", solve_sem = "exact", prune_mode = "reach-only";
  double p_l = 0.0;
  std::vector<std::string> bound_args;
  bool dump_lp = false;
  std::string solve_out = "out";
  solve->add_option("--model", model_path, "model JSON file");
  solve_grid.add_options(solve);
  solve->add_option("--spec", solve_spec, "specification text or file")->required();
  solve->add_option("--spec-kind", solve_kind, "scltl | regex | dfa");
  solve->add_option("--semantics", solve_sem, "prefix | exact");
  solve->add_option("--pl", p_l, "required satisfaction probability")
      ->check(CLI::Range(0.0, 1.0));
  solve->add_option("--bound", bound_args, "auxiliary cost bound <i>=<value>, repeatable");
  solve->add_option("--prune", prune_mode, "off | reach-only | full");
  solve->add_flag("--dump-lp", dump_lp, "also write the LP in text form");
  solve->add_option("--out", solve_out, "output directory");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo rollout of a policy");
  std::string sim_product, sim_policy, sim_sem = "exact", sim_out = "out";
  std::uint64_t seed = 0;
  long n = 1000, step_cap = 0;
  bool csv = false;
  int keep = 0;
  simulate->add_option("--model", sim_product, "product JSON written by solve")->required();
  simulate->add_option("--policy", sim_policy, "policy JSON written by solve")->required();
  simulate->add_option("--seed", seed, "RNG seed");
  simulate->add_option("--n", n, "number of trajectories");
  simulate->add_option("--step-cap", step_cap, "per-trajectory step cap (0 = auto)");
  simulate->add_option("--semantics", sim_sem, "prefix | exact satisfaction judgment");
  simulate->add_flag("--csv", csv, "write per-trajectory CSV");
  simulate->add_option("--keep", keep, "record the first N trajectories as cell paths");
  simulate->add_option("--out", sim_out, "output directory");

  // render
  auto* render = app.add_subcommand("render", "render risk map, regions and a trajectory");
  std::string r_elev, r_mask, r_traj, r_out = "out";
  int traj_index = 0, scale = 8;
  render->add_option("--grid-elev", r_elev, "terrain elevation map")->required();
  render->add_option("--grid-mask", r_mask, "region mask")->required();
  render->add_option("--traj", r_traj, "traj.json written by simulate --keep");
  render->add_option("--traj-index", traj_index, "which recorded trajectory to draw");
  render->add_option("--scale", scale, "pixels per cell");
  render->add_option("--out", r_out, "output directory");

  // bench
  auto* bench = app.add_subcommand("bench", "pruning impact sweep over grid scales");
  GridArgs bench_grid;
  bench_grid.add_options(bench);
  std::string bench_spec, bench_kind = "regex", bench_sem = "exact",
              bench_prune = "reach-only", bench_out = "out";
  double bench_pl = 0.0;
  std::vector<std::string> bench_bounds;
  std::vector<int> scales = {6, 8, 10, 12};
  bench->add_option("--spec", bench_spec, "specification text or file")->required();
  bench->add_option("--spec-kind", bench_kind, "scltl | regex | dfa");
  bench->add_option("--semantics", bench_sem, "prefix | exact");
  bench->add_option("--pl", bench_pl, "required satisfaction probability")
      ->check(CLI::Range(0.0, 1.0));
  bench->add_option("--bound", bench_bounds, "auxiliary cost bound <i>=<value>, repeatable");
  bench->add_option("--prune", bench_prune, "WP prune mode: reach-only | full");
  bench->add_option("--scales", scales, "grid side lengths to sweep")->delimiter(',');
  bench->add_option("--out", bench_out, "output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (compile->parsed())
      return cmd_compile(spec, spec_kind, ap_csv, semantics, out);
    if (build_grid->parsed()) return cmd_build_grid(grid_args, bg_out);
    if (solve->parsed())
      return cmd_solve(model_path, solve_grid, solve_spec, solve_kind, solve_sem, p_l,
                       bound_args, prune_mode, dump_lp, solve_out);
    if (simulate->parsed())
      return cmd_simulate(sim_product, sim_policy, seed, n, step_cap, sim_sem, csv, keep,
                          sim_out);
    if (render->parsed())
      return cmd_render(r_elev, r_mask, r_traj, traj_index, scale, r_out);
    if (bench->parsed())
      return cmd_bench(bench_grid, bench_spec, bench_kind, bench_sem, bench_pl, bench_bounds,
                       bench_prune, scales, bench_out);
  } catch (const InfeasibleStructureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace lcmdp::cli
