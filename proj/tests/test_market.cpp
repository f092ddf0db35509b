#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ratecon/market.hpp"
#include "ratecon/oracle.hpp"

using namespace ratecon;

namespace {

EnergyVector ev(std::vector<Energy> v) { return EnergyVector(std::move(v)); }

struct RandomInstance {
  MarketModel mm;
  ScenarioSet set;
  std::vector<double> demand;
  std::vector<double> day_ahead;
};

RandomInstance random_instance(std::mt19937_64& rng, std::size_t horizon) {
  RandomInstance inst;
  std::uniform_real_distribution<double> price(0.0, 10.0);
  std::uniform_real_distribution<double> coord(0.0, 4.0);
  for (std::size_t t = 0; t < horizon; ++t) inst.mm.unit_prices.push_back(price(rng));
  inst.mm.day_ahead_price = price(rng) * 0.5;
  inst.mm.realtime_price = price(rng);
  const std::size_t n = 1 + rng() % 3;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Energy> r(horizon);
    for (auto& v : r) v = static_cast<Energy>(rng() % 4);
    inst.set.scenarios.push_back(EnergyVector(std::move(r)));
  }
  inst.demand.resize(horizon);
  inst.day_ahead.resize(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    inst.demand[t] = coord(rng);
    inst.day_ahead[t] = coord(rng);
  }
  std::sort(inst.demand.rbegin(), inst.demand.rend());
  return inst;
}

// Stays clear of every kink: strict separation between supply entries,
// between competing tail pieces, and between the best piece and zero, and
// strictly decreasing demand entries.
bool kink_free(const RandomInstance& inst, double margin) {
  const std::size_t horizon = inst.mm.horizon();
  for (std::size_t t = 0; t + 1 < horizon; ++t)
    if (inst.demand[t] - inst.demand[t + 1] < margin) return false;
  if (inst.demand[horizon - 1] < margin) return false;
  for (double y : inst.day_ahead)
    if (y < margin) return false;

  for (const auto& scenario : inst.set.scenarios) {
    std::vector<double> supply(horizon);
    for (std::size_t t = 0; t < horizon; ++t)
      supply[t] = inst.day_ahead[t] + static_cast<double>(scenario[t]);
    std::sort(supply.begin(), supply.end());
    for (std::size_t t = 0; t + 1 < horizon; ++t)
      if (supply[t + 1] - supply[t] < margin) return false;

    double tail = 0.0, prefix = 0.0, best = -1e300, second = -1e300;
    for (std::size_t k = 1; k <= horizon; ++k) {
      tail += inst.demand[horizon - k];
      prefix += supply[k - 1];
      const double piece = tail - prefix;
      if (piece > best) {
        second = best;
        best = piece;
      } else if (piece > second) {
        second = piece;
      }
    }
    if (std::abs(best) < margin) return false;
    if (best > 0.0 && horizon > 1 && best - second < margin) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("price_service sums unit prices over the decomposition") {
  MarketModel mm{{10, 18, 24}, 3, 8};
  CHECK(price_service(mm, {5, 2}) == doctest::Approx(42.0));
  CHECK(price_service(mm, {0, 2}) == 0.0);
  CHECK(price_service(mm, {2, 1}) == doctest::Approx(18.0));
  CHECK_THROWS_AS(price_service(mm, {10, 3}), std::invalid_argument);
}

TEST_CASE("revenue_from_demand prices the duration differences") {
  MarketModel mm3{{10, 18, 24}, 0, 0};
  CHECK(revenue_from_demand(mm3, DemandDuration(ev({3, 2, 1}))) == doctest::Approx(52.0));
  CHECK(revenue_from_demand(mm3, DemandDuration(ev({0, 0, 0}))) == 0.0);

  MarketModel mm2{{10, 18}, 0, 0};
  CHECK(revenue_from_demand(mm2, DemandDuration(ev({2, 2}))) == doctest::Approx(36.0));
  const std::vector<double> increasing{1.0, 2.0};
  CHECK_THROWS_AS(revenue_from_demand(mm2, increasing), std::invalid_argument);
}

TEST_CASE("selling a portfolio or its duration vector earns the same revenue") {
  std::mt19937_64 rng(71);
  for (int it = 0; it < 300; ++it) {
    const std::size_t horizon = 1 + rng() % 5;
    MarketModel mm;
    for (std::size_t t = 0; t < horizon; ++t)
      mm.unit_prices.push_back(static_cast<double>(rng() % 20));
    std::vector<Service> services;
    const std::size_t n = rng() % 4;
    for (std::size_t i = 0; i < n; ++i) {
      const Energy m = 1 + static_cast<Energy>(rng() % 3);
      const Energy e = static_cast<Energy>(rng() % (m * horizon + 1));
      services.push_back({e, m});
    }
    const Portfolio c(services, horizon);
    double direct = 0.0;
    for (const auto& s : c.services()) direct += price_service(mm, s);
    const double via_d = revenue_from_demand(mm, demand_duration(decompose_portfolio(c)));
    CHECK(via_d == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("expected_profit worked example") {
  MarketModel mm{{10, 18}, 3, 8};
  ScenarioSet set;
  set.scenarios.push_back(ev({0, 1}));
  const std::vector<double> d{1, 1};
  const std::vector<double> y{0, 0};
  CHECK(expected_profit(mm, d, y, set) == doctest::Approx(10.0));

  const std::vector<double> zero{0, 0};
  CHECK(expected_profit(mm, zero, zero, set) == 0.0);
}

TEST_CASE("relaxed gap agrees with the integer gap on integer points") {
  std::mt19937_64 rng(73);
  for (int it = 0; it < 1000; ++it) {
    const std::size_t horizon = 1 + rng() % 5;
    std::vector<Energy> d(horizon);
    for (auto& v : d) v = static_cast<Energy>(rng() % 5);
    std::sort(d.rbegin(), d.rend());
    std::vector<Energy> x(horizon);
    for (auto& v : x) v = static_cast<Energy>(rng() % 6);

    std::vector<double> dr(d.begin(), d.end());
    std::vector<double> xr(x.begin(), x.end());
    const DemandDuration dd_int{ev(d)};
    CHECK(relaxed_energy_gap(dr, xr) == static_cast<double>(energy_gap(dd_int, ev(x))));
  }
}

TEST_CASE("supergradient of the pure revenue problem") {
  MarketModel mm{{5, 3}, 2, 4};
  ScenarioSet empty;
  const std::vector<double> d{1.5, 0.5};
  const std::vector<double> y{1.0, 0.0};
  const ProfitSupergradient g = profit_supergradient(mm, d, y, empty);
  CHECK(g.day_ahead[0] == doctest::Approx(-2.0));
  CHECK(g.day_ahead[1] == doctest::Approx(-2.0));
  CHECK(g.demand[0] == doctest::Approx(5.0));
  CHECK(g.demand[1] == doctest::Approx(-2.0));  // 3 - 5
}

TEST_CASE("zero-gap scenarios leave the supergradient untouched") {
  MarketModel mm{{5, 3}, 1, 4};
  ScenarioSet set;
  set.scenarios.push_back(ev({9, 9}));  // far more than any demand below
  const std::vector<double> d{2.0, 1.0};
  const std::vector<double> y{0.5, 0.5};
  const ProfitSupergradient g = profit_supergradient(mm, d, y, set);
  CHECK(g.day_ahead[0] == doctest::Approx(-1.0));
  CHECK(g.day_ahead[1] == doctest::Approx(-1.0));
  CHECK(g.demand[0] == doctest::Approx(5.0));
  CHECK(g.demand[1] == doctest::Approx(-2.0));
}

TEST_CASE("supergradient matches central finite differences away from kinks") {
  std::mt19937_64 rng(79);
  const double h = 1e-5;
  int accepted = 0;
  while (accepted < 100) {
    RandomInstance inst = random_instance(rng, 2 + rng() % 3);
    if (!kink_free(inst, 1e-3)) continue;
    ++accepted;
    const std::size_t horizon = inst.mm.horizon();
    const ProfitSupergradient g =
        profit_supergradient(inst.mm, inst.demand, inst.day_ahead, inst.set);

    for (std::size_t t = 0; t < horizon; ++t) {
      auto probe_d = [&](double delta) {
        std::vector<double> d = inst.demand;
        d[t] += delta;
        return expected_profit(inst.mm, d, inst.day_ahead, inst.set);
      };
      auto probe_y = [&](double delta) {
        std::vector<double> y = inst.day_ahead;
        y[t] += delta;
        return expected_profit(inst.mm, inst.demand, y, inst.set);
      };
      const double fd_d = (probe_d(h) - probe_d(-h)) / (2 * h);
      const double fd_y = (probe_y(h) - probe_y(-h)) / (2 * h);
      const double scale_d = std::max({1.0, std::abs(fd_d), std::abs(g.demand[t])});
      const double scale_y = std::max({1.0, std::abs(fd_y), std::abs(g.day_ahead[t])});
      CHECK(std::abs(fd_d - g.demand[t]) / scale_d < 1e-4);
      CHECK(std::abs(fd_y - g.day_ahead[t]) / scale_y < 1e-4);
    }
  }
}

TEST_CASE("expected_profit is concave and bounded by its supergradient plane") {
  std::mt19937_64 rng(83);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int it = 0; it < 1000; ++it) {
    const std::size_t horizon = 1 + rng() % 4;
    RandomInstance a = random_instance(rng, horizon);
    RandomInstance b = random_instance(rng, horizon);
    b.mm = a.mm;
    b.set = a.set;

    const double fa = expected_profit(a.mm, a.demand, a.day_ahead, a.set);
    const double fb = expected_profit(a.mm, b.demand, b.day_ahead, a.set);

    const double lambda = unit(rng);
    std::vector<double> dm(horizon), ym(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      dm[t] = lambda * a.demand[t] + (1 - lambda) * b.demand[t];
      ym[t] = lambda * a.day_ahead[t] + (1 - lambda) * b.day_ahead[t];
    }
    const double fm = expected_profit(a.mm, dm, ym, a.set);
    CHECK(fm >= lambda * fa + (1 - lambda) * fb - 1e-9);

    const ProfitSupergradient g = profit_supergradient(a.mm, a.demand, a.day_ahead, a.set);
    double plane = fa;
    for (std::size_t t = 0; t < horizon; ++t) {
      plane += g.demand[t] * (b.demand[t] - a.demand[t]);
      plane += g.day_ahead[t] * (b.day_ahead[t] - a.day_ahead[t]);
    }
    CHECK(fb <= plane + 1e-9);
  }
}

TEST_CASE("project_nonincreasing pools violators") {
  using V = std::vector<double>;
  CHECK(project_nonincreasing(V{1, 3}) == V{2, 2});
  CHECK(project_nonincreasing(V{3, 1}) == V{3, 1});
  CHECK(project_nonincreasing(V{1, 2, 3}) == V{2, 2, 2});
  const V pooled = project_nonincreasing(V{2, 3, 1});
  CHECK(pooled[0] == doctest::Approx(2.5));
  CHECK(pooled[1] == doctest::Approx(2.5));
  CHECK(pooled[2] == doctest::Approx(1.0));
}

TEST_CASE("project_nonincreasing is an idempotent projection") {
  std::mt19937_64 rng(89);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  for (int it = 0; it < 500; ++it) {
    const std::size_t n = 1 + rng() % 6;
    std::vector<double> v(n);
    for (auto& x : v) x = coord(rng);
    const std::vector<double> p = project_nonincreasing(v);

    for (std::size_t t = 0; t + 1 < n; ++t) CHECK(p[t] >= p[t + 1] - 1e-12);
    CHECK(project_nonincreasing(p) == p);

    // No feasible point nearby beats the projection distance.
    double dist = 0.0;
    for (std::size_t t = 0; t < n; ++t) dist += (v[t] - p[t]) * (v[t] - p[t]);
    for (int probe = 0; probe < 20; ++probe) {
      std::vector<double> w(n);
      for (auto& x : w) x = coord(rng);
      w = project_nonincreasing(w);
      double other = 0.0;
      for (std::size_t t = 0; t < n; ++t) other += (v[t] - w[t]) * (v[t] - w[t]);
      CHECK(other >= dist - 1e-9);
    }
  }
}

TEST_CASE("round_solution floors demand differences and ceils day-ahead") {
  const std::vector<double> d{2.7, 1.5, 0.9};
  const std::vector<double> y{0.2, 0.0, 1.0};
  const RoundedDecision r = round_solution(d, y);
  CHECK(r.demand == std::vector<Energy>{1, 0, 0});
  CHECK(r.day_ahead == std::vector<Energy>{1, 0, 1});

  const std::vector<double> di{3, 1, 0};
  const std::vector<double> yi{2, 0, 1};
  const RoundedDecision ri = round_solution(di, yi);
  CHECK(ri.demand == std::vector<Energy>{3, 1, 0});
  CHECK(ri.day_ahead == std::vector<Energy>{2, 0, 1});

  const std::vector<double> zero{0, 0, 0};
  CHECK(round_solution(zero, zero).demand == std::vector<Energy>{0, 0, 0});
}

TEST_CASE("rounded decisions are always feasible integers") {
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> coord(0.0, 5.0);
  for (int it = 0; it < 500; ++it) {
    const std::size_t n = 1 + rng() % 6;
    std::vector<double> d(n), y(n);
    for (auto& x : d) x = coord(rng);
    for (auto& x : y) x = coord(rng);
    std::sort(d.rbegin(), d.rend());
    const RoundedDecision r = round_solution(d, y);
    for (std::size_t t = 0; t < n; ++t) {
      CHECK(r.demand[t] >= 0);
      CHECK(static_cast<double>(r.demand[t]) <= d[t] + 1e-9);
      if (t + 1 < n) CHECK(r.demand[t] >= r.demand[t + 1]);
      CHECK(static_cast<double>(r.day_ahead[t]) >= y[t] - 1e-9);
    }
  }
}

TEST_CASE("rounding_gap_bound arithmetic") {
  CHECK(rounding_gap_bound(MarketModel{{10, 18}, 3, 0}) == doctest::Approx(34.0));
  CHECK(rounding_gap_bound(MarketModel{{0, 0}, 0, 0}) == 0.0);
  CHECK(rounding_gap_bound(MarketModel{{5, 5, 5}, 1, 0}) == doctest::Approx(18.0));
}

TEST_CASE("realize_unit_portfolio emits one service per duration difference") {
  const UnitRatePortfolio u1 = realize_unit_portfolio(DemandDuration(ev({3, 2, 1})));
  CHECK(u1.durations == std::vector<Energy>{1, 2, 3});
  CHECK(demand_duration(u1).vec() == EnergyVector({3, 2, 1}));

  const UnitRatePortfolio u2 = realize_unit_portfolio(DemandDuration(ev({2, 2})));
  CHECK(u2.durations == std::vector<Energy>{2, 2});

  const UnitRatePortfolio u3 = realize_unit_portfolio(DemandDuration(ev({0, 0})));
  CHECK(u3.durations.empty());
}

TEST_CASE("solver: selling or buying at a loss yields the zero decision") {
  MarketModel mm{{3, 2}, 10, 10};
  ScenarioSet set;
  set.scenarios.push_back(ev({1, 0}));
  set.scenarios.push_back(ev({0, 0}));
  const SolveReport report = solve_relaxation(mm, set, {3, 3});
  CHECK(report.objective_relaxed == doctest::Approx(0.0).epsilon(1e-6));
  for (double v : report.relaxed.demand) CHECK(v <= 1e-6);
  CHECK(report.objective_rounded >= report.objective_relaxed - report.gap_bound - 1e-9);
}

TEST_CASE("solver: free abundant renewables push demand to its cap") {
  MarketModel mm{{4, 7}, 2, 5};
  ScenarioSet set;
  set.scenarios.push_back(ev({9, 9}));
  const DecisionCaps caps{3, 3};
  const SolveReport report = solve_relaxation(mm, set, caps);
  const oracle::IntegerMarketOptimum grid = oracle::bf_optimal_integer_market(mm, set, caps);
  CHECK(grid.objective == doctest::Approx(21.0));
  CHECK(report.objective_relaxed >= grid.objective - 1e-6);
  CHECK(report.relaxed.demand[0] == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("solver: all-zero prices leave the zero decision") {
  MarketModel mm{{0, 0}, 0, 0};
  ScenarioSet set;
  set.scenarios.push_back(ev({1, 0}));
  const SolveReport report = solve_relaxation(mm, set, {3, 3});
  CHECK(report.objective_relaxed == 0.0);
  CHECK(report.objective_rounded == 0.0);
  CHECK(report.gap_bound == 0.0);
}

TEST_CASE("solver: single-slot market lands within the certified gap") {
  MarketModel mm{{10}, 3, 8};
  ScenarioSet set;
  set.scenarios.push_back(ev({0}));
  const DecisionCaps caps{1, 1};
  const SolveReport report = solve_relaxation(mm, set, caps);
  const oracle::IntegerMarketOptimum grid = oracle::bf_optimal_integer_market(mm, set, caps);
  CHECK(grid.objective == doctest::Approx(7.0));
  CHECK(report.objective_relaxed >= grid.objective - 1e-6);
  CHECK(grid.objective - report.objective_rounded <= report.gap_bound + 1e-9);
}

TEST_CASE("solver flags exhausted budgets as not converged") {
  MarketModel mm{{4, 7}, 2, 5};
  ScenarioSet set;
  set.scenarios.push_back(ev({1, 0}));
  SolveConfig config;
  config.iterations = 3;
  config.refine_iterations = 0;
  const SolveReport report = solve_relaxation(mm, set, {3, 3}, config);
  CHECK_FALSE(report.converged);

  config.refine_iterations = 2500;
  CHECK(solve_relaxation(mm, set, {3, 3}, config).converged);
}

TEST_CASE("solver: day-ahead purchases stay zero without shortfalls") {
  MarketModel mm{{4, 4}, 1, 6};
  ScenarioSet set;
  set.scenarios.push_back(ev({8, 8}));
  const SolveReport report = solve_relaxation(mm, set, {2, 4});
  for (double v : report.relaxed.day_ahead) CHECK(v == 0.0);
}
