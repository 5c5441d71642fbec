// incentive-mech: experiment driver for the data-sharing incentive simulator.
//
//   incentive-mech <subcommand> [--config <path>] [--out <path>] [--seed N]
//                  [--override key=value ...]
//
// Subcommands: individual-sweep, equilibrium-sweep, min-agents, two-type,
// verify. Exit codes: 0 success, 1 validation error, 2 verification failure,
// 3 non-convergence.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "incmech/commands.hpp"
#include "incmech/csv.hpp"
#include "incmech/verify.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::int64_t seed = -1;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file (key = value lines)");
  cmd->add_option("--out", args.out_path, "output path (default: stdout)");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--override", args.overrides, "config override key=value")
      ->take_all();
}

incmech::Config load_config(const CommonArgs& args) {
  incmech::Config cfg;
  if (!args.config_path.empty()) cfg = incmech::Config::load(args.config_path);
  for (const std::string& kv : args.overrides) cfg.apply_override(kv);
  if (args.seed >= 0) cfg.set("seed", std::to_string(args.seed));
  return cfg;
}

// --out wins over the config's `output` key; empty means stdout.
std::string resolve_out(const CommonArgs& args, const incmech::Config& cfg) {
  return args.out_path.empty() ? cfg.get_string("output", "") : args.out_path;
}

// Stream to --out when given, stdout otherwise.
class OutputStream {
 public:
  explicit OutputStream(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_)
        throw std::invalid_argument("cannot open output file '" + path + "'");
    }
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }
  const std::unique_ptr<std::ofstream>& file() { return file_; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int run_verify(const incmech::Config& cfg, const std::string& out_path,
               bool adversarial_flag) {
  using namespace incmech;
  const bool adversarial =
      adversarial_flag || cfg.get_string("verify.adversarial", "false") == "true";
  // Validate the configured sections before running the suite.
  accuracy_from_config(cfg);
  mechanism_from_config(cfg);
  const VerifyReport report = run_verification(cfg.get_seed(), adversarial);
  for (const VerifyCheck& c : report.checks)
    std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name
              << " (worst_ratio=" << format_number(c.worst_ratio, 3)
              << (c.note.empty() ? "" : ", " + c.note) << ")\n";
  OutputStream out(out_path);
  out.get() << to_json(report).dump(2) << '\n';
  return report.pass ? kOk : kVerificationFailure;
}

int run_two_type_trace(const incmech::Config& cfg, const std::string& trace_path) {
  using namespace incmech;
  const AccuracyModel model = accuracy_from_config(cfg);
  const double c_low = cfg.get_double("population.two_type.c_low", 0.0);
  const double c_high = cfg.get_double("population.two_type.c_high", 0.0);
  const double p = cfg.get_double("population.two_type.p", 0.5);
  const double epsilon = cfg.get_double("mechanism.epsilon", 1e-6);
  const int n = static_cast<int>(cfg.get_long("population.n", 10));

  auto rng = detail::draw_rng(cfg.get_seed(), 0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int n_low = 0;
  std::vector<double> costs(n);
  for (double& c : costs) {
    const bool low = u01(rng) < p;
    n_low += low;
    c = low ? c_low : c_high;
  }
  const auto [xh, xl] = two_type_symmetric_equilibrium(model, c_low, c_high, p,
                                                       epsilon, n - n_low, n_low);
  Population pop = Population::from_costs(costs);
  pop.has_two_type = true;
  pop.two_type = TwoTypeSpec{c_low, c_high, std::vector<double>(n, p)};
  std::vector<double> profile(n);
  for (int i = 0; i < n; ++i) profile[i] = costs[i] == c_low ? xl : xh;

  std::ofstream out(trace_path);
  if (!out)
    throw std::invalid_argument("cannot open trace file '" + trace_path + "'");
  write_allocation_trace(out, MechanismSpec::shaping_two_type(epsilon), model,
                         pop, profile);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace incmech;
  CLI::App app{"Data-sharing incentive mechanisms: equilibria, sweeps, verification"};
  app.require_subcommand(1);

  CommonArgs individual, equilibrium, min_agents, two_type, verify;
  bool adversarial = false;
  std::string trace_path;

  CLI::App* cmd_ind = app.add_subcommand(
      "individual-sweep", "solo optima across a cost sweep (CSV)");
  add_common(cmd_ind, individual);
  CLI::App* cmd_eq = app.add_subcommand(
      "equilibrium-sweep", "shaping equilibria across n, c or k (CSV)");
  add_common(cmd_eq, equilibrium);
  CLI::App* cmd_min = app.add_subcommand(
      "min-agents", "smallest viable population per (c, k) (CSV)");
  add_common(cmd_min, min_agents);
  CLI::App* cmd_2t = app.add_subcommand(
      "two-type", "screening menu equilibrium under unknown costs (JSON)");
  add_common(cmd_2t, two_type);
  cmd_2t->add_option("--trace", trace_path,
                     "also write the allocation-curve trace CSV here");
  CLI::App* cmd_ver = app.add_subcommand(
      "verify", "run the oracle and invariant suite (JSON report)");
  add_common(cmd_ver, verify);
  cmd_ver->add_flag("--adversarial", adversarial,
                    "feed a deliberately infeasible rule to the checkers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_ind->parsed()) {
      const Config cfg = load_config(individual);
      OutputStream out(resolve_out(individual, cfg));
      return cmd_individual_sweep(cfg, out.get());
    }
    if (cmd_eq->parsed()) {
      const Config cfg = load_config(equilibrium);
      OutputStream out(resolve_out(equilibrium, cfg));
      return cmd_equilibrium_sweep(cfg, out.get());
    }
    if (cmd_min->parsed()) {
      const Config cfg = load_config(min_agents);
      OutputStream out(resolve_out(min_agents, cfg));
      return cmd_min_agents(cfg, out.get());
    }
    if (cmd_2t->parsed()) {
      const Config cfg = load_config(two_type);
      OutputStream out(resolve_out(two_type, cfg));
      const int code = cmd_two_type(cfg, out.get());
      if (code == kOk && !trace_path.empty()) return run_two_type_trace(cfg, trace_path);
      return code;
    }
    if (cmd_ver->parsed()) {
      const Config cfg = load_config(verify);
      return run_verify(cfg, resolve_out(verify, cfg), adversarial);
    }
  } catch (const FixedPointError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationError;
  }
  return kOk;
}
