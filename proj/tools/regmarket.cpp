// Command-line front end: clear one market, run forecast-error trials,
// generate synthetic fleets and summarize results files.
//
// Exit codes: 0 success, 1 bad input (usage, file, schema, invalid case),
// 2 market infeasible or too many infeasible trials.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "regmarket/regmarket.hpp"

namespace {

using namespace regmarket;

constexpr int kOk = 0;
constexpr int kBadInput = 1;
constexpr int kInfeasible = 2;

struct Usage {
  std::string message;
  const CLI::App* app;
};

int usage_error(const Usage& u) {
  std::cerr << "error: " << u.message << "\n\n" << u.app->help();
  return kBadInput;
}

// Reads a case file; on failure prints the reason and returns nullopt.
std::optional<CaseInputs> try_load_case(const std::string& path) {
  CaseInputs c;
  try {
    c = io::load_case(path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return std::nullopt;
  }
  return c;
}

bool report_violations(const CaseInputs& c) {
  auto v = validate_case(c);
  if (v.empty()) return false;
  std::cerr << InvalidCase::describe(v) << "\n";
  return true;
}

int cmd_clear(const std::string& market, const std::string& case_path,
              std::optional<double> forecast) {
  auto c = try_load_case(case_path);
  if (!c) return kBadInput;
  if (forecast) c->forecast_demand = *forecast;
  if (report_violations(*c)) return kBadInput;

  ClearingResult res;
  try {
    if (market == "isone")
      res = isone::clear(*c);
    else if (market == "pjm")
      res = pjm::clear(*c);
    else
      res = miso::clear(*c);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInfeasible;
  }
  std::cout << io::format_clearing(res);
  return kOk;
}

int cmd_trials(const std::string& case_path, std::size_t n, double lo, double hi,
               std::uint64_t seed, const std::string& out_path) {
  auto c = try_load_case(case_path);
  if (!c) return kBadInput;
  if (report_violations(*c)) return kBadInput;
  if (n < 1 || !(lo > 0.0) || !(lo <= hi)) {
    std::cerr << "error: need --n >= 1 and 0 < --scale-min <= --scale-max\n";
    return kBadInput;
  }

  scenario::TrialSpec spec;
  spec.base = *c;
  spec.n_trials = n;
  spec.scale_min = lo;
  spec.scale_max = hi;
  spec.seed = seed;
  scenario::MonteCarloResult mc;
  try {
    mc = scenario::run_monte_carlo(spec);
  } catch (const scenario::TrialBudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInfeasible;
  }
  try {
    io::write_results(out_path, mc.rows);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  std::cout << io::format_stats(mc.stats, mc.infeasible);
  return kOk;
}

int cmd_gen_fleet(std::size_t n, std::uint64_t seed, const std::string& out_path) {
  const auto c = scenario::synthetic_case(n, seed);
  if (out_path.empty()) {
    std::cout << io::case_to_json(c);
    return kOk;
  }
  try {
    io::save_case(out_path, c);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return kOk;
}

int cmd_stats(const std::string& path) {
  std::vector<scenario::TrialRow> rows;
  try {
    rows = io::load_results(path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
  std::size_t infeasible = 0;
  for (const auto& r : rows) infeasible += r.feasible ? 0 : 1;
  std::cout << io::format_stats(scenario::compute_stats(rows), infeasible);
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Regulation market clearing simulator (ISO-NE, PJM, MISO)", "regmarket"};
  app.require_subcommand(1);

  auto* clear = app.add_subcommand("clear", "Clear one market on a case file and print the dispatch");
  std::string market, case_path;
  std::optional<double> forecast;
  clear->add_option("--market", market, "isone, pjm or miso")
      ->required()
      ->check(CLI::IsMember({"isone", "pjm", "miso"}));
  clear->add_option("--case", case_path, "Case file (JSON)")->required();
  clear->add_option("--forecast-demand", forecast, "Override the case forecast demand (MW)");

  auto* trials = app.add_subcommand("trials", "Monte Carlo over forecast demand");
  std::string trials_case, out_path;
  std::size_t n_trials = 0;
  double lo = 0.5, hi = 1.25;
  std::uint64_t seed = 0;
  trials->add_option("--case", trials_case, "Case file (JSON)")->required();
  trials->add_option("--n", n_trials, "Number of trials")->required();
  trials->add_option("--scale-min", lo, "Lowest forecast / real-time demand ratio")->capture_default_str();
  trials->add_option("--scale-max", hi, "Highest forecast / real-time demand ratio")->capture_default_str();
  trials->add_option("--seed", seed, "Random seed")->capture_default_str();
  trials->add_option("--out", out_path, "Results CSV to write")->required();

  auto* gen = app.add_subcommand("gen-fleet", "Write a synthetic case file");
  std::size_t n_fleet = 0;
  std::uint64_t fleet_seed = 0;
  std::string fleet_out;
  gen->add_option("--n", n_fleet, "Number of generators (>= 5)")->required();
  gen->add_option("--seed", fleet_seed, "Random seed; 0 with --n 5 gives the five-generator example")
      ->capture_default_str();
  gen->add_option("--out", fleet_out, "Output path (stdout when omitted)");

  auto* stats = app.add_subcommand("stats", "Summarize a results CSV");
  std::string csv_path;
  stats->add_option("csv", csv_path, "Results CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const CLI::App* where = &app;
    for (auto* sub : app.get_subcommands()) where = sub;
    return usage_error({e.what(), where});
  }

  if (clear->parsed()) return cmd_clear(market, case_path, forecast);
  if (trials->parsed()) return cmd_trials(trials_case, n_trials, lo, hi, seed, out_path);
  if (gen->parsed()) {
    if (n_fleet < 5) return usage_error({"--n must be at least 5", gen});
    return cmd_gen_fleet(n_fleet, fleet_seed, fleet_out);
  }
  return cmd_stats(csv_path);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  }
}
