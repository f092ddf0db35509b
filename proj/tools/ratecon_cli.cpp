// Command-line front end: portfolio decomposition, real-time delivery
// simulation, market optimization, and oracle cross-checks.
//
// Exit codes: 0 ok, 2 input error, 3 infeasible service, 4 internal
// invariant violation, 5 optimizer warning under --strict.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ratecon/ratecon.hpp"

namespace {

using ratecon::DemandDuration;
using ratecon::Energy;
using ratecon::EnergyVector;
using ratecon::InputError;
using ratecon::Portfolio;
using ratecon::ScenarioSet;
using Json = ratecon::io::Json;

struct Options {
  std::string market_path;
  std::string portfolio_path;
  std::string scenarios_path;
  std::string out_path;
  std::string csv_path;
  std::string y_text;
  std::string bounds_text = "4,3,4,4";
  std::uint64_t seed = 0;
  std::size_t generate = 0;
  Energy gen_mean = 2;
  Energy gen_spread = 2;
  int iters = 5000;
  int refine = 2500;
  double step = 1.0;
  double tol = 1e-6;
  int markets = 50;
  bool strict = false;
};

void emit(const Json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw InputError("cannot open output file: " + out_path);
    out << text;
  }
}

ScenarioSet gather_scenarios(const Options& opt, std::size_t horizon) {
  if (!opt.scenarios_path.empty() && opt.generate > 0)
    throw InputError("--scenarios and --generate are mutually exclusive");
  if (!opt.scenarios_path.empty()) return ratecon::io::load_scenarios(opt.scenarios_path, horizon);
  if (opt.generate > 0)
    return ratecon::generate_scenarios(horizon, opt.generate, opt.seed, opt.gen_mean,
                                       opt.gen_spread);
  return {};
}

int run_decompose(const Options& opt) {
  const Portfolio portfolio = ratecon::io::load_portfolio(opt.portfolio_path);
  const ratecon::UnitRatePortfolio units = ratecon::decompose_portfolio(portfolio);
  const DemandDuration d = ratecon::demand_duration(units);

  Json doc;
  doc["horizon"] = portfolio.horizon();
  doc["durations"] = units.durations;
  doc["origin"] = Json::array();
  for (const auto& o : units.origin)
    doc["origin"].push_back({{"service", o.service}, {"unit", o.unit}});
  doc["demand_duration"] = ratecon::io::energy_vector_to_json(d.vec());
  emit(doc, opt.out_path);
  return 0;
}

int run_simulate(const Options& opt) {
  const ratecon::io::MarketFile market = ratecon::io::load_market(opt.market_path);
  const Portfolio portfolio = ratecon::io::load_portfolio(opt.portfolio_path);
  const std::size_t horizon = portfolio.horizon();
  if (market.model.horizon() != horizon)
    throw InputError("market and portfolio horizons differ");

  const EnergyVector day_ahead = opt.y_text.empty()
                                     ? EnergyVector::zeros(horizon)
                                     : ratecon::io::parse_energy_list(opt.y_text, horizon, "--y");
  const ScenarioSet scenarios = gather_scenarios(opt, horizon);

  Json doc;
  doc["horizon"] = horizon;
  doc["services"] = portfolio.services().size();
  doc["y"] = ratecon::io::energy_vector_to_json(day_ahead);
  doc["scenario_count"] = scenarios.size();
  if (scenarios.size() == 0) {
    doc["warning"] = "no scenarios given; expected values default to 0";
    std::cerr << "warning: no scenarios given; expected values default to 0\n";
  }

  std::ostringstream csv;
  csv << "scenario,slot,y,r,a,q";
  for (std::size_t i = 0; i < portfolio.services().size(); ++i) csv << ",u" << (i + 1);
  csv << "\n";

  double expected_gap = 0.0;
  doc["traces"] = Json::array();
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const ratecon::PolicyTrace trace =
        ratecon::simulate_delivery(portfolio, day_ahead, scenarios.scenarios[i]);
    expected_gap += scenarios.weight(i) * static_cast<double>(trace.total_purchase);

    Json tj;
    tj["index"] = i;
    tj["weight"] = scenarios.weight(i);
    tj["r"] = ratecon::io::energy_vector_to_json(trace.profile.renewable);
    tj["a"] = ratecon::io::energy_vector_to_json(trace.profile.purchases);
    tj["q"] = ratecon::io::energy_vector_to_json(trace.profile.total);
    tj["total_purchase"] = trace.total_purchase;
    tj["unit_allocations"] = trace.unit_allocations.nu;
    tj["allocations"] = trace.service_allocations;
    doc["traces"].push_back(std::move(tj));

    for (std::size_t t = 0; t < horizon; ++t) {
      csv << i << "," << (t + 1) << "," << day_ahead[t] << "," << trace.profile.renewable[t]
          << "," << trace.profile.purchases[t] << "," << trace.profile.total[t];
      for (const auto& row : trace.service_allocations) csv << "," << row[t];
      csv << "\n";
    }
  }

  double revenue = 0.0;
  for (const auto& s : portfolio.services()) revenue += ratecon::price_service(market.model, s);
  const double day_ahead_cost =
      market.model.day_ahead_price * static_cast<double>(day_ahead.total());
  const double rt_cost = market.model.realtime_price * expected_gap;

  Json summary;
  summary["expected_gap"] = expected_gap;
  summary["expected_rt_cost"] = rt_cost;
  summary["revenue"] = revenue;
  summary["day_ahead_cost"] = day_ahead_cost;
  summary["expected_profit"] = revenue - day_ahead_cost - rt_cost;
  doc["summary"] = std::move(summary);

  emit(doc, opt.out_path);
  if (!opt.csv_path.empty()) {
    std::ofstream out(opt.csv_path, std::ios::binary);
    if (!out) throw InputError("cannot open csv file: " + opt.csv_path);
    out << csv.str();
  }
  return 0;
}

int run_optimize(const Options& opt) {
  const ratecon::io::MarketFile market = ratecon::io::load_market(opt.market_path);
  if (!market.caps)
    throw InputError("market file must provide 'd_max' and 'y_max' caps for optimization");
  const std::size_t horizon = market.model.horizon();
  const ScenarioSet scenarios = gather_scenarios(opt, horizon);

  ratecon::SolveConfig config;
  config.iterations = opt.iters;
  config.refine_iterations = opt.refine;
  config.step0 = opt.step;
  config.tolerance = opt.tol;
  const ratecon::SolveReport report =
      ratecon::solve_relaxation(market.model, scenarios, *market.caps, config);

  const DemandDuration d_rounded{EnergyVector(report.demand_rounded)};
  const ratecon::UnitRatePortfolio realized = ratecon::realize_unit_portfolio(d_rounded);
  std::vector<ratecon::Service> services;
  for (Energy dur : realized.durations) services.push_back({dur, 1});

  Json doc;
  doc["horizon"] = horizon;
  doc["relaxed"] = {{"d", report.relaxed.demand},
                    {"y", report.relaxed.day_ahead},
                    {"objective", report.objective_relaxed}};
  doc["rounded"] = {{"d", report.demand_rounded},
                    {"y", report.day_ahead_rounded},
                    {"objective", report.objective_rounded}};
  doc["gap_bound"] = report.gap_bound;
  doc["iterations"] = report.iterations;
  doc["final_step_size"] = report.final_step_size;
  doc["converged"] = report.converged;
  doc["realized_portfolio"] =
      ratecon::io::portfolio_to_json(Portfolio(std::move(services), horizon));
  emit(doc, opt.out_path);

  if (opt.strict && !report.converged) {
    std::cerr << "warning: optimizer did not converge within its budget\n";
    return 5;
  }
  return 0;
}

int run_verify(const Options& opt) {
  ratecon::oracle::SmallInstanceBounds bounds;
  {
    const EnergyVector parsed = ratecon::io::parse_energy_list(opt.bounds_text, 4, "--bounds");
    if (parsed[0] < 1 || parsed[1] < 0) throw InputError("--bounds: need T >= 1 and N >= 0");
    bounds.horizon_max = static_cast<std::size_t>(parsed[0]);
    bounds.services_max = static_cast<std::size_t>(parsed[1]);
    bounds.duration_max = parsed[2];
    bounds.supply_max = parsed[3];
  }
  if (ratecon::oracle::enumeration_size(bounds) > bounds.state_budget)
    throw InputError("--bounds exceed the enumeration budget");

  ratecon::oracle::MarketVerifyConfig market_cfg;
  market_cfg.markets = opt.markets;
  if (opt.seed != 0) market_cfg.seed = opt.seed;

  struct Row {
    const char* name;
    ratecon::oracle::VerifyOutcome outcome;
  };
  const Row rows[] = {
      {"adequacy-equivalence", ratecon::oracle::verify_adequacy_equivalence(bounds)},
      {"min-purchase", ratecon::oracle::verify_min_purchase(bounds)},
      {"market-gap", ratecon::oracle::verify_market_gap(market_cfg)},
  };

  bool all_passed = true;
  std::printf("%-22s %12s   %s\n", "suite", "instances", "result");
  for (const Row& row : rows) {
    std::printf("%-22s %12lld   %s\n", row.name, row.outcome.checked,
                row.outcome.passed ? "PASS" : "FAIL");
    if (!row.outcome.passed) {
      all_passed = false;
      std::printf("  counterexample: %s\n", row.outcome.counterexample.c_str());
    }
  }
  return all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"rate-constrained energy services: planning and simulation"};
  app.require_subcommand(1);

  CLI::App* dec = app.add_subcommand("decompose", "unit-rate decomposition of a portfolio");
  dec->add_option("--portfolio", opt.portfolio_path, "portfolio JSON file")->required();
  dec->add_option("--out", opt.out_path, "write the JSON report here instead of stdout");

  CLI::App* sim = app.add_subcommand("simulate", "real-time purchases and allocations per scenario");
  sim->add_option("--market", opt.market_path, "market JSON file")->required();
  sim->add_option("--portfolio", opt.portfolio_path, "portfolio JSON file")->required();
  sim->add_option("--scenarios", opt.scenarios_path, "scenario CSV file");
  sim->add_option("--generate", opt.generate, "generate this many scenarios instead");
  sim->add_option("--seed", opt.seed, "seed for generated scenarios");
  sim->add_option("--gen-mean", opt.gen_mean, "mean of generated per-slot supply");
  sim->add_option("--gen-spread", opt.gen_spread, "spread of generated per-slot supply");
  sim->add_option("--y", opt.y_text, "day-ahead vector, e.g. \"1,0,2\" (default zeros)");
  sim->add_option("--out", opt.out_path, "write the JSON report here instead of stdout");
  sim->add_option("--csv", opt.csv_path, "also write per-slot traces as CSV");

  CLI::App* optimize = app.add_subcommand("optimize", "choose the portfolio and day-ahead purchases");
  optimize->add_option("--market", opt.market_path, "market JSON file with caps")->required();
  optimize->add_option("--scenarios", opt.scenarios_path, "scenario CSV file");
  optimize->add_option("--generate", opt.generate, "generate this many scenarios instead");
  optimize->add_option("--seed", opt.seed, "seed for generated scenarios");
  optimize->add_option("--gen-mean", opt.gen_mean, "mean of generated per-slot supply");
  optimize->add_option("--gen-spread", opt.gen_spread, "spread of generated per-slot supply");
  optimize->add_option("--iters", opt.iters, "diminishing-step iteration budget");
  optimize->add_option("--refine", opt.refine, "target-level refinement budget");
  optimize->add_option("--step", opt.step, "initial step size");
  optimize->add_option("--tol", opt.tol, "stagnation tolerance");
  optimize->add_flag("--strict", opt.strict, "exit 5 when the optimizer reports a warning");
  optimize->add_option("--out", opt.out_path, "write the JSON report here instead of stdout");

  CLI::App* verify = app.add_subcommand("verify", "brute-force cross-checks at small scale");
  verify->add_option("--bounds", opt.bounds_text, "sweep bounds T,N,D,P (default 4,3,4,4)");
  verify->add_option("--markets", opt.markets, "random markets for the gap suite");
  verify->add_option("--seed", opt.seed, "seed for the market suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*dec) return run_decompose(opt);
    if (*sim) return run_simulate(opt);
    if (*optimize) return run_optimize(opt);
    if (*verify) return run_verify(opt);
  } catch (const ratecon::InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "internal invariant violated: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
