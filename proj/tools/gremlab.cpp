#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gremlab/chains.hpp"
#include "gremlab/disorder.hpp"
#include "gremlab/gibbs_measure.hpp"
#include "gremlab/gibbs_solver.hpp"
#include "gremlab/model.hpp"
#include "gremlab/parisi.hpp"
#include "gremlab/report.hpp"

namespace {

using namespace gremlab;

struct CommonArgs {
  std::string model_path;
  std::uint64_t seed = 42;
  int threads = 1;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_model) {
  CLI::Option* model = cmd->add_option("--model", args.model_path, "model JSON file");
  if (needs_model) model->required();
  cmd->add_option("--seed", args.seed, "base seed for randomized work");
  cmd->add_option("--threads", args.threads, "worker threads for enumeration");
  cmd->add_option("--out", args.out, "write output to this file instead of stdout");
  cmd->add_option("--format", args.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
}

void emit_text(const CommonArgs& args, const std::string& content) {
  if (args.out.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream file(args.out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open output file: " + args.out);
  file << content;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::size_t at = 0;
  while (at < text.size()) {
    std::size_t next = text.find(',', at);
    if (next == std::string::npos) next = text.size();
    out.push_back(std::stoi(text.substr(at, next - at)));
    at = next + 1;
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t at = 0;
  while (at < text.size()) {
    std::size_t next = text.find(',', at);
    if (next == std::string::npos) next = text.size();
    out.push_back(std::stod(text.substr(at, next - at)));
    at = next + 1;
  }
  return out;
}

std::string level_sets_line(const Chain& chain) {
  std::string line = chain_label(chain) + ":";
  for (std::size_t k = 0; k < chain.levels.size(); ++k) {
    line += " T" + std::to_string(k + 1) + "={";
    for (std::size_t t = 0; t < chain.levels[k].size(); ++t) {
      if (t) line += ',';
      line += subset_label(chain.levels[k][t]);
    }
    line += "}";
  }
  return line;
}

int cmd_chains(int n, const CommonArgs& args) {
  std::string out;
  for (const Chain& chain : enumerate_chains(n)) out += level_sets_line(chain) + "\n";
  emit_text(args, out);
  return 0;
}

int cmd_phi_check(const CommonArgs& args) {
  ModelSpec spec = load_model(args.model_path);
  Eigen::ArrayXd table = phi_table(spec);
  JsonValue obj;
  obj.add("entries", static_cast<std::int64_t>(table.size()));
  obj.add("min", table.minCoeff());
  obj.add("max", table.maxCoeff());
  obj.add("bounded", true);  // tabulation throws on non-finite values
  emit_text(args, obj.dump());
  return 0;
}

JsonValue parisi_point_json(const ParisiPoint& point) {
  JsonValue obj;
  obj.add("chain", chain_label(point.chain));
  JsonValue m{JsonValue::Array{}}, grad{JsonValue::Array{}};
  for (Eigen::Index i = 0; i < point.m.size(); ++i) m.push(point.m[i]);
  for (Eigen::Index i = 0; i < point.grad.size(); ++i) grad.push(point.grad[i]);
  obj.add("m", std::move(m));
  obj.add("value", point.value);
  obj.add("grad", std::move(grad));
  obj.add("converged", point.converged);
  return obj;
}

int cmd_parisi(const CommonArgs& args, const std::string& chain_arg) {
  ModelSpec spec = load_model(args.model_path);
  if (!chain_arg.empty()) {
    Chain chain = make_chain(parse_int_list(chain_arg));
    if (static_cast<int>(chain.perm.size()) != spec.n) {
      throw std::invalid_argument("chain length must equal the model's n");
    }
    emit_text(args, parisi_point_json(minimize_parisi(spec, chain)).dump());
    return 0;
  }
  GlobalParisiResult result = global_parisi_min(spec);
  JsonValue obj;
  JsonValue chains{JsonValue::Array{}};
  for (const ParisiPoint& point : result.per_chain) chains.push(parisi_point_json(point));
  obj.add("chains", std::move(chains));
  obj.add("best", parisi_point_json(result.best));
  emit_text(args, obj.dump());
  return 0;
}

int cmd_gibbs(const CommonArgs& args) {
  ModelSpec spec = load_model(args.model_path);
  GibbsSolveResult result = solve_gibbs(spec);
  JsonValue obj;
  obj.add("value", result.value);
  JsonValue nu{JsonValue::Array{}};
  for (Eigen::Index i = 0; i < result.nu_star.weights.size(); ++i) {
    nu.push(result.nu_star.weights[i]);
  }
  obj.add("nu_star", std::move(nu));
  JsonValue active{JsonValue::Array{}};
  for (SubsetId j : result.active_set) active.push(subset_label(j));
  obj.add("active_set", std::move(active));
  obj.add("iterations", static_cast<std::int64_t>(result.iterations));
  obj.add("converged", result.converged);
  emit_text(args, obj.dump());
  return 0;
}

int cmd_gibbs_measure(const CommonArgs& args, const std::string& chain_arg,
                      const std::string& m_arg) {
  ModelSpec spec = load_model(args.model_path);
  Chain chain = make_chain(parse_int_list(chain_arg));
  std::vector<double> m_list = parse_double_list(m_arg);
  if (static_cast<int>(m_list.size()) != spec.n) {
    throw std::invalid_argument("--m must list n parameters");
  }
  Eigen::VectorXd m = Eigen::Map<Eigen::VectorXd>(m_list.data(), spec.n);
  GibbsStructure gs = build_gibbs(spec, chain, m);
  JointMeasure flat = flatten(gs, spec);

  JsonValue obj;
  obj.add("chain", chain_label(chain));
  JsonValue mj{JsonValue::Array{}};
  for (Eigen::Index i = 0; i < gs.m.size(); ++i) mj.push(gs.m[i]);
  obj.add("m", std::move(mj));
  JsonValue gamma{JsonValue::Array{}};
  for (Eigen::Index i = 0; i < gs.gamma.size(); ++i) gamma.push(gs.gamma[i]);
  obj.add("gamma", std::move(gamma));
  JsonValue kernels{JsonValue::Array{}};
  for (int j = 2; j <= spec.n; ++j) {
    JsonValue rows{JsonValue::Array{}};
    for (Eigen::Index x = 0; x < gs.kernels[j].rows(); ++x) {
      JsonValue row{JsonValue::Array{}};
      for (Eigen::Index y = 0; y < gs.kernels[j].cols(); ++y) row.push(gs.kernels[j](x, y));
      rows.push(std::move(row));
    }
    kernels.push(std::move(rows));
  }
  obj.add("kernels", std::move(kernels));
  JsonValue weights{JsonValue::Array{}};
  for (Eigen::Index i = 0; i < flat.weights.size(); ++i) weights.push(flat.weights[i]);
  obj.add("flattened", std::move(weights));
  obj.add("constraints", to_json(audit_constraints(gs, spec)));
  emit_text(args, obj.dump());
  return 0;
}

JsonValue sim_json(const SimResult& sim) {
  JsonValue obj;
  obj.add("N", sim.N);
  obj.add("seed", static_cast<std::int64_t>(sim.seed));
  if (!sim.chain.empty()) obj.add("chain", sim.chain);
  obj.add("f", sim.f);
  obj.add("wall_seconds", sim.wall_seconds);
  return obj;
}

int cmd_simulate(const CommonArgs& args, int N, const std::string& chain_arg,
                 const std::string& sweep_arg) {
  ModelSpec spec = load_model(args.model_path);
  const Chain* chain_ptr = nullptr;
  Chain chain;
  if (!chain_arg.empty()) {
    chain = make_chain(parse_int_list(chain_arg));
    chain_ptr = &chain;
  }
  auto run = [&](int volume) {
    return chain_ptr ? free_energy_chain(spec, *chain_ptr, volume, args.seed, args.threads)
                     : free_energy_exact(spec, volume, args.seed, args.threads);
  };
  if (sweep_arg.empty()) {
    emit_text(args, sim_json(run(N)).dump());
    return 0;
  }
  std::vector<int> sweep = parse_int_list(sweep_arg);
  double target = solve_gibbs(spec).value;
  std::vector<SimResult> sims;
  for (int volume : sweep) sims.push_back(run(volume));
  if (args.format == "csv") {
    std::string csv = "N,F_N,target,gap\n";
    for (const SimResult& sim : sims) {
      csv += std::to_string(sim.N) + "," + format_double(sim.f) + "," + format_double(target) +
             "," + format_double(std::abs(sim.f - target)) + "\n";
    }
    emit_text(args, csv);
    return 0;
  }
  JsonValue obj;
  obj.add("target", target);
  JsonValue series{JsonValue::Array{}};
  for (const SimResult& sim : sims) {
    JsonValue entry = sim_json(sim);
    entry.add("target", target);
    entry.add("gap", std::abs(sim.f - target));
    series.push(std::move(entry));
  }
  obj.add("series", std::move(series));
  emit_text(args, obj.dump());
  return 0;
}

int cmd_count(const CommonArgs& args, int N, double radius, const std::string& center_path) {
  ModelSpec spec = load_model(args.model_path);
  JointMeasure center = product_measure(spec);
  if (!center_path.empty()) {
    std::ifstream in(center_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open center file: " + center_path);
    std::vector<double> weights;
    double v;
    char sep;
    // center file: JSON array of weights in flat-index order
    in >> sep;
    while (in >> v) {
      weights.push_back(v);
      in >> sep;
      if (sep == ']') break;
    }
    if (static_cast<std::int64_t>(weights.size()) != spec.config_count()) {
      throw std::invalid_argument("center file must list " + std::to_string(spec.config_count()) +
                                  " weights");
    }
    center.weights = Eigen::Map<Eigen::ArrayXd>(weights.data(), weights.size());
  }
  std::int64_t count = count_in_ball(spec, N, args.seed, center, radius, args.threads);
  JsonValue obj;
  obj.add("N", N);
  obj.add("seed", static_cast<std::int64_t>(args.seed));
  obj.add("radius", radius);
  obj.add("count", count);
  obj.add("log_count_over_N", count > 0 ? std::log(static_cast<double>(count)) / N : 0.0);
  emit_text(args, obj.dump());
  return 0;
}

int cmd_verify(const CommonArgs& args, const std::string& sweep_arg, const std::string& skip_arg) {
  ModelSpec spec = load_model(args.model_path);
  VerifyOptions options;
  options.seed = args.seed;
  options.threads = args.threads;
  if (!sweep_arg.empty()) options.sweep = parse_int_list(sweep_arg);
  if (!skip_arg.empty()) {
    std::size_t at = 0;
    while (at < skip_arg.size()) {
      std::size_t next = skip_arg.find(',', at);
      if (next == std::string::npos) next = skip_arg.size();
      std::string name = skip_arg.substr(at, next - at);
      at = next + 1;
      if (name == "identity") options.check_identity = false;
      else if (name == "gradient") options.check_gradient = false;
      else if (name == "entropy") options.check_entropy = false;
      else if (name == "audit") options.check_audit = false;
      else if (name == "montecarlo") options.check_montecarlo = false;
      else throw std::invalid_argument("unknown criterion: " + name);
    }
  }
  VerifyReport report = run_verify(spec, options);
  if (args.format == "csv") {
    emit_text(args, montecarlo_csv(report));
  } else {
    emit_text(args, report_to_json(report).dump());
  }
  return report.all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"free-energy solver and simulator for subset-interacting random energy models"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* chains_cmd = app.add_subcommand("chains", "list all chains with their level sets");
  int chains_n = 2;
  chains_cmd->add_option("--n", chains_n, "species count")->required();
  add_common(chains_cmd, args, false);

  auto* phi_cmd = app.add_subcommand("phi", "interaction table utilities");
  phi_cmd->require_subcommand(1);
  auto* phi_check_cmd = phi_cmd->add_subcommand("check", "tabulate and print the range");
  add_common(phi_check_cmd, args, true);

  auto* parisi_cmd = app.add_subcommand("parisi", "minimize the chain functionals");
  std::string parisi_chain;
  parisi_cmd->add_option("--chain", parisi_chain, "restrict to one chain, e.g. 2,1");
  add_common(parisi_cmd, args, true);

  auto* gibbs_cmd = app.add_subcommand("gibbs", "entropy-constrained maximization");
  add_common(gibbs_cmd, args, true);

  auto* gm_cmd = app.add_subcommand("gibbs-measure", "build the tilted chain measure");
  std::string gm_chain, gm_m;
  gm_cmd->add_option("--chain", gm_chain, "chain permutation, e.g. 2,1")->required();
  gm_cmd->add_option("--m", gm_m, "parameters m1,..,mn")->required();
  add_common(gm_cmd, args, true);

  auto* sim_cmd = app.add_subcommand("simulate", "exact finite-volume free energy");
  int sim_N = 8;
  std::string sim_chain, sim_sweep;
  sim_cmd->add_option("--N", sim_N, "total sample count (n must divide N)");
  sim_cmd->add_option("--chain", sim_chain, "coarse-grained keying by this chain");
  sim_cmd->add_option("--sweep", sim_sweep, "comma list of N values");
  add_common(sim_cmd, args, true);

  auto* count_cmd = app.add_subcommand("count", "configurations in an empirical-measure ball");
  int count_N = 8;
  double count_radius = 0.1;
  std::string count_center;
  count_cmd->add_option("--N", count_N, "total sample count")->required();
  count_cmd->add_option("--radius", count_radius, "total variation radius")->required();
  count_cmd->add_option("--center", count_center, "JSON array file; default: the base law");
  add_common(count_cmd, args, true);

  auto* verify_cmd = app.add_subcommand("verify", "run the full agreement pipeline");
  std::string verify_sweep, verify_skip;
  verify_cmd->add_option("--sweep", verify_sweep, "comma list of N values");
  verify_cmd->add_option("--skip", verify_skip, "criteria to disable, comma separated");
  add_common(verify_cmd, args, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (chains_cmd->parsed()) return cmd_chains(chains_n, args);
    if (phi_check_cmd->parsed()) return cmd_phi_check(args);
    if (parisi_cmd->parsed()) return cmd_parisi(args, parisi_chain);
    if (gibbs_cmd->parsed()) return cmd_gibbs(args);
    if (gm_cmd->parsed()) return cmd_gibbs_measure(args, gm_chain, gm_m);
    if (sim_cmd->parsed()) return cmd_simulate(args, sim_N, sim_chain, sim_sweep);
    if (count_cmd->parsed()) return cmd_count(args, count_N, count_radius, count_center);
    if (verify_cmd->parsed()) return cmd_verify(args, verify_sweep, verify_skip);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
