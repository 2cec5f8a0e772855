#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "treeshift/model.hpp"
#include "treeshift/shift.hpp"
#include "treeshift/suites.hpp"
#include "treeshift/tree.hpp"

using namespace treeshift;

namespace {

struct TreeOptions {
  std::string tree;
  std::string example = "T2";
  double alpha = 0.5;
  int depth = 14;
};

void add_tree_options(CLI::App* cmd, TreeOptions& o) {
  cmd->add_option("--tree", o.tree, "Tree-spec JSON file");
  cmd->add_option("--example", o.example, "Built-in example: T2, T4 or UNILATERAL");
  cmd->add_option("--alpha", o.alpha, "Second-ray weight for T2");
  cmd->add_option("--depth", o.depth, "Truncation depth");
}

RunConfig base_config(const TreeOptions& o) {
  RunConfig cfg;
  if (!o.tree.empty()) cfg.tree_path = o.tree;
  try {
    cfg.example = parse_example_name(o.example);
  } catch (const UnknownExample& e) {
    throw ConfigError(e.what());
  }
  cfg.params = cfg.example == ExampleName::T2 ? std::vector<Real>{o.alpha} : std::vector<Real>{};
  cfg.depth = o.depth;
  if (!cfg.tree_path && cfg.depth < 2) throw ConfigError("depth must be at least 2");
  return cfg;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path);
  os << text;
}

std::uint64_t seed_from_env() {
  const char* env = std::getenv("TREESHIFT_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::char_traits<char>::length(env)) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("TREESHIFT_SEED is not an unsigned integer");
  }
}

std::string inspect(const WeightedTree& wt) {
  const ShiftOperator S(wt);
  const SeparatedBasis B = separated_kernel_basis(S);
  const Tree& t = S.tree();
  nlohmann::json j;
  j["vertices"] = t.size();
  j["depth"] = t.depth();
  j["norm"] = S.norm();
  j["lower_bound"] = S.lower_bound();
  const BalanceCheck bal = is_balanced(S);
  j["balanced"] = bal.balanced;
  if (bal.witness) j["balance_witness"] = {t.label(bal.witness->first), t.label(bal.witness->second)};
  if (S.lower_bound() > 0.0) j["spectral_radius_estimate"] = spectral_radius_estimate(S, t.depth()).estimate;
  nlohmann::json gens = nlohmann::json::array();
  for (GenerationIndex g = 0; g <= t.depth(); ++g) gens.push_back(t.generation_size(g));
  j["generation_sizes"] = gens;
  j["kernel_dim"] = B.size();
  nlohmann::json basis = nlohmann::json::array();
  for (Eigen::Index k = 0; k < B.size(); ++k) {
    nlohmann::json entries = nlohmann::json::object();
    const auto block = B.block(k);
    for (Eigen::Index i = 0; i < block.size(); ++i)
      entries[t.label(B.support_begin(k) + i)] = {block[i].real(), block[i].imag()};
    basis.push_back({{"generation", B.generation(k)}, {"entries", entries}});
  }
  j["kernel_basis"] = basis;
  return j.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted shifts on directed trees: analytic model and multiplier checks"};
  app.require_subcommand(1);

  TreeOptions run_tree, gen_tree, inspect_tree;
  std::vector<std::string> suites;
  std::optional<std::uint64_t> seed;
  std::string out = "-";
  double tol_alg = kAlgebraicTolerance, tol_power = kPowerTolerance, slope = kDefaultSlopeThreshold;
  bool parallel = false;

  CLI::App* run = app.add_subcommand("run", "Run verification suites and write a JSON Lines report");
  add_tree_options(run, run_tree);
  run->add_option("--suite", suites, "Suite name, repeatable or comma separated")->delimiter(',');
  run->add_option("--seed", seed, "Random seed (default: TREESHIFT_SEED or 0)");
  run->add_option("--out", out, "Report path, - for stdout");
  run->add_option("--tol-alg", tol_alg, "Tolerance for algebraic identities");
  run->add_option("--tol-power", tol_power, "Tolerance for identities through powers");
  run->add_option("--slope-threshold", slope, "Log-norm growth threshold for divergence");
  run->add_flag("--parallel", parallel, "Run independent suites concurrently");

  CLI::App* gen = app.add_subcommand("generate", "Write the tree spec of a built-in example");
  add_tree_options(gen, gen_tree);
  std::string gen_out = "-";
  gen->add_option("--out", gen_out, "Output path, - for stdout");

  CLI::App* ins = app.add_subcommand("inspect", "Print kernel basis and norm data of a tree");
  add_tree_options(ins, inspect_tree);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      RunConfig cfg = base_config(run_tree);
      cfg.suites = suites.empty() ? std::vector<std::string>{"all"} : suites;
      cfg.seed = seed ? *seed : seed_from_env();
      cfg.tol_alg = tol_alg;
      cfg.tol_power = tol_power;
      cfg.slope_threshold = slope;
      cfg.out = out;
      cfg.parallel = parallel;
      normalize_suites(cfg.suites);
      WeightedTree tree;
      try {
        tree = load_config_tree(cfg);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      const Report report = run_suites(cfg, tree);
      write_output(cfg.out, serialize_report(cfg, report));
      return report.failed == 0 ? 0 : 1;
    }
    if (gen->parsed()) {
      const RunConfig cfg = base_config(gen_tree);
      write_output(gen_out, dump_tree_spec(to_tree_spec(load_config_tree(cfg))) + "\n");
      return 0;
    }
    const RunConfig cfg = base_config(inspect_tree);
    std::cout << inspect(load_config_tree(cfg));
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
