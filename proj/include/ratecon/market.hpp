#ifndef RATECON_MARKET_HPP
#define RATECON_MARKET_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "ratecon/core.hpp"
#include "ratecon/portfolio.hpp"
#include "ratecon/realtime.hpp"

namespace ratecon {

/// Forward-market prices: unit_prices[t-1] is the price of a unit-rate
/// service of duration t.  Multi-rate services price as the sum over
/// their unit-rate decomposition.
struct MarketModel {
  std::vector<double> unit_prices;
  double day_ahead_price = 0.0;
  double realtime_price = 0.0;

  std::size_t horizon() const noexcept { return unit_prices.size(); }
};

inline void validate_market(const MarketModel& mm) {
  if (mm.unit_prices.empty()) throw std::invalid_argument("market: empty price table");
  for (double p : mm.unit_prices)
    if (!(p >= 0.0)) throw std::invalid_argument("market: unit prices must be >= 0");
  if (!(mm.day_ahead_price >= 0.0) || !(mm.realtime_price >= 0.0))
    throw std::invalid_argument("market: energy prices must be >= 0");
}

/// Box caps for the planning decision (the configured bound on sellable
/// demand and day-ahead purchases).
struct DecisionCaps {
  Energy d_max = 0;
  Energy y_max = 0;
};

/// Relaxed planning decision: real-valued demand-duration vector (must be
/// non-increasing and non-negative) and day-ahead purchases.
struct DecisionPoint {
  std::vector<double> demand;
  std::vector<double> day_ahead;
};

inline double price_service(const MarketModel& mm, const Service& s) {
  validate_market(mm);
  if (s.energy > s.rate * static_cast<Energy>(mm.horizon()))
    throw std::invalid_argument("price_service: service infeasible for market horizon");
  double sum = 0.0;
  for (Energy dur : decompose_service(s))
    if (dur >= 1) sum += mm.unit_prices[static_cast<std::size_t>(dur - 1)];
  return sum;
}

namespace detail {

inline void validate_decision(const MarketModel& mm, std::span<const double> demand,
                              std::span<const double> day_ahead) {
  const std::size_t horizon = mm.horizon();
  if (demand.size() != horizon || day_ahead.size() != horizon)
    throw std::invalid_argument("decision: length mismatch with market horizon");
  for (std::size_t t = 0; t < horizon; ++t) {
    if (demand[t] < -1e-9 || day_ahead[t] < -1e-9)
      throw std::invalid_argument("decision: negative component");
    if (t + 1 < horizon && demand[t] + 1e-9 < demand[t + 1])
      throw std::invalid_argument("decision: demand vector must be non-increasing");
  }
}

}  // namespace detail

/// Revenue of selling the unit-rate collection behind a demand-duration
/// vector: sum of unit_prices[t-1] * (d_t - d_{t+1}), with d_{T+1} = 0.
inline double revenue_from_demand(const MarketModel& mm, std::span<const double> demand) {
  validate_market(mm);
  const std::size_t horizon = mm.horizon();
  if (demand.size() != horizon)
    throw std::invalid_argument("revenue_from_demand: length mismatch");
  double revenue = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const double next = (t + 1 < horizon) ? demand[t + 1] : 0.0;
    if (demand[t] + 1e-9 < next)
      throw std::invalid_argument("revenue_from_demand: demand vector must be non-increasing");
    revenue += mm.unit_prices[t] * (demand[t] - next);
  }
  return revenue;
}

inline double revenue_from_demand(const MarketModel& mm, const DemandDuration& d) {
  std::vector<double> demand(d.vec().begin(), d.vec().end());
  return revenue_from_demand(mm, demand);
}

/// Real-valued extension of the energy gap: worst demand tail of length k
/// minus the k smallest supply entries, over k = 1..T, clamped at zero.
inline double relaxed_energy_gap(std::span<const double> demand, std::vector<double> supply) {
  if (demand.size() != supply.size())
    throw std::invalid_argument("relaxed_energy_gap: length mismatch");
  std::sort(supply.begin(), supply.end());
  double tail = 0.0;
  double prefix = 0.0;
  double best = 0.0;
  for (std::size_t k = 1; k <= supply.size(); ++k) {
    tail += demand[demand.size() - k];
    prefix += supply[k - 1];
    best = std::max(best, tail - prefix);
  }
  return std::max(best, 0.0);
}

/// Expected profit of a (relaxed) planning decision: unit-rate revenue
/// minus day-ahead cost minus the real-time price times the expected
/// energy gap over the scenario set.
inline double expected_profit(const MarketModel& mm, std::span<const double> demand,
                              std::span<const double> day_ahead, const ScenarioSet& set) {
  validate_market(mm);
  detail::validate_decision(mm, demand, day_ahead);
  set.validate(mm.horizon());

  double profit = revenue_from_demand(mm, demand);
  for (double y : day_ahead) profit -= mm.day_ahead_price * y;

  std::vector<double> supply(mm.horizon());
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t t = 0; t < mm.horizon(); ++t)
      supply[t] = day_ahead[t] + static_cast<double>(set.scenarios[i][t]);
    profit -= mm.realtime_price * set.weight(i) * relaxed_energy_gap(demand, supply);
  }
  return profit;
}

struct ProfitSupergradient {
  std::vector<double> demand;
  std::vector<double> day_ahead;
};

/// A supergradient of the concave expected profit.  The revenue term
/// contributes unit-price differences on demand and -day_ahead_price on
/// every day-ahead slot.  Each scenario with a positive gap contributes
/// through its active affine piece: the longest maximizing demand tail
/// and the matching set of smallest supply entries (ties to the smallest
/// index).  Zero-gap scenarios contribute nothing.
inline ProfitSupergradient profit_supergradient(const MarketModel& mm,
                                                std::span<const double> demand,
                                                std::span<const double> day_ahead,
                                                const ScenarioSet& set) {
  validate_market(mm);
  detail::validate_decision(mm, demand, day_ahead);
  set.validate(mm.horizon());
  const std::size_t horizon = mm.horizon();

  ProfitSupergradient g;
  g.demand.resize(horizon);
  g.day_ahead.assign(horizon, -mm.day_ahead_price);
  for (std::size_t t = 0; t < horizon; ++t)
    g.demand[t] = mm.unit_prices[t] - (t > 0 ? mm.unit_prices[t - 1] : 0.0);

  std::vector<double> supply(horizon);
  std::vector<std::size_t> order(horizon);
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t t = 0; t < horizon; ++t)
      supply[t] = day_ahead[t] + static_cast<double>(set.scenarios[i][t]);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return supply[a] != supply[b] ? supply[a] < supply[b] : a < b;
    });

    // Longest maximizing tail = smallest active tail start.
    double tail = 0.0;
    double prefix = 0.0;
    double best = 0.0;
    std::size_t best_k = 0;
    for (std::size_t k = 1; k <= horizon; ++k) {
      tail += demand[horizon - k];
      prefix += supply[order[k - 1]];
      if (tail - prefix >= best && tail - prefix > 0.0) {
        best = tail - prefix;
        best_k = k;
      }
    }
    if (best_k == 0) continue;

    const double w = mm.realtime_price * set.weight(i);
    for (std::size_t s = horizon - best_k; s < horizon; ++s) g.demand[s] -= w;
    for (std::size_t k = 0; k < best_k; ++k) g.day_ahead[order[k]] += w;
  }
  return g;
}

/// Euclidean projection onto non-increasing sequences (pool adjacent
/// violators, uniform weights).
inline std::vector<double> project_nonincreasing(std::vector<double> v) {
  std::vector<double> mean;
  std::vector<std::size_t> count;
  mean.reserve(v.size());
  count.reserve(v.size());
  for (double x : v) {
    mean.push_back(x);
    count.push_back(1);
    while (mean.size() > 1 && mean[mean.size() - 2] < mean.back()) {
      const double merged = (mean[mean.size() - 2] * static_cast<double>(count[count.size() - 2]) +
                             mean.back() * static_cast<double>(count.back())) /
                            static_cast<double>(count[count.size() - 2] + count.back());
      count[count.size() - 2] += count.back();
      mean[mean.size() - 2] = merged;
      mean.pop_back();
      count.pop_back();
    }
  }
  std::size_t pos = 0;
  for (std::size_t b = 0; b < mean.size(); ++b)
    for (std::size_t i = 0; i < count[b]; ++i) v[pos++] = mean[b];
  return v;
}

struct SolveConfig {
  int iterations = 5000;          // diminishing-step phase budget
  double step0 = 1.0;             // step_k = step0 / sqrt(k)
  double tolerance = 1e-6;        // best-objective stagnation threshold
  int stagnation_window = 500;    // iterations without improvement before stopping
  int refine_iterations = 2500;   // target-level refinement budget
};

struct SolveReport {
  DecisionPoint relaxed;
  std::vector<Energy> demand_rounded;
  std::vector<Energy> day_ahead_rounded;
  double objective_relaxed = 0.0;
  double objective_rounded = 0.0;
  double gap_bound = 0.0;
  int iterations = 0;
  double final_step_size = 0.0;
  bool converged = false;
};

/// Integer decision built from a relaxed one: successive demand
/// differences are floored and re-accumulated, day-ahead purchases are
/// rounded up.  The result stays non-increasing, non-negative and inside
/// the caps of the input.
struct RoundedDecision {
  std::vector<Energy> demand;
  std::vector<Energy> day_ahead;
};

inline RoundedDecision round_solution(std::span<const double> demand,
                                      std::span<const double> day_ahead) {
  const std::size_t horizon = demand.size();
  if (day_ahead.size() != horizon)
    throw std::invalid_argument("round_solution: length mismatch");
  RoundedDecision out;
  out.demand.assign(horizon, 0);
  out.day_ahead.assign(horizon, 0);
  Energy suffix = 0;
  for (std::size_t t = horizon; t-- > 0;) {
    const double next = (t + 1 < horizon) ? demand[t + 1] : 0.0;
    const double diff = std::max(demand[t] - next, 0.0);
    suffix += static_cast<Energy>(std::floor(diff));
    out.demand[t] = suffix;
  }
  for (std::size_t t = 0; t < horizon; ++t)
    out.day_ahead[t] = static_cast<Energy>(std::ceil(std::max(day_ahead[t], 0.0)));
  return out;
}

/// Worst-case profit loss of the floor/ceil rounding:
/// day_ahead_price * T + sum of all unit prices.
inline double rounding_gap_bound(const MarketModel& mm) {
  validate_market(mm);
  double bound = mm.day_ahead_price * static_cast<double>(mm.horizon());
  for (double p : mm.unit_prices) bound += p;
  return bound;
}

/// Unit-rate services realizing an integer demand-duration vector:
/// d_t - d_{t+1} services of duration t, ascending.
inline UnitRatePortfolio realize_unit_portfolio(const DemandDuration& d) {
  std::vector<Service> services;
  for (Energy dur : durations_with_demand(d)) services.push_back({dur, 1});
  return decompose_portfolio(Portfolio(std::move(services), d.horizon()));
}

namespace detail {

struct SolverState {
  std::vector<double> demand;
  std::vector<double> day_ahead;
  double best_objective = 0.0;
  std::vector<double> best_demand;
  std::vector<double> best_day_ahead;
};

inline void project_decision(std::vector<double>& demand, std::vector<double>& day_ahead,
                             DecisionCaps caps) {
  demand = project_nonincreasing(std::move(demand));
  for (double& v : demand) v = std::clamp(v, 0.0, static_cast<double>(caps.d_max));
  for (double& v : day_ahead) v = std::clamp(v, 0.0, static_cast<double>(caps.y_max));
}

// Evaluates integer lattice points adjacent to the current best point and
// keeps any improvement.  Piecewise-linear objectives often peak at
// integer vertices that diminishing steps orbit without touching.
inline void fold_integer_neighbors(const MarketModel& mm, const ScenarioSet& set,
                                   DecisionCaps caps, SolverState& st) {
  const std::size_t horizon = mm.horizon();
  if (horizon > 6) return;
  const std::vector<double> base_demand = st.best_demand;
  const std::vector<double> base_day_ahead = st.best_day_ahead;
  const std::size_t combos = 1u << (2 * horizon);
  std::vector<double> demand(horizon);
  std::vector<double> day_ahead(horizon);
  for (std::size_t mask = 0; mask < combos; ++mask) {
    for (std::size_t t = 0; t < horizon; ++t) {
      const double dv = (mask >> t) & 1 ? std::ceil(base_demand[t]) : std::floor(base_demand[t]);
      const double yv = (mask >> (horizon + t)) & 1 ? std::ceil(base_day_ahead[t])
                                                    : std::floor(base_day_ahead[t]);
      demand[t] = std::clamp(dv, 0.0, static_cast<double>(caps.d_max));
      day_ahead[t] = std::clamp(yv, 0.0, static_cast<double>(caps.y_max));
      if (t > 0) demand[t] = std::min(demand[t], demand[t - 1]);
    }
    const double objective = expected_profit(mm, demand, day_ahead, set);
    if (objective > st.best_objective) {
      st.best_objective = objective;
      st.best_demand = demand;
      st.best_day_ahead = day_ahead;
    }
  }
}

}  // namespace detail

/// Maximizes the relaxed expected profit over the capped monotone box by
/// projected supergradient ascent.  A diminishing-step phase
/// (step0/sqrt(k)) is followed by a target-level refinement: steps of
/// size (target - f)/|g|^2 aimed at f_best + delta, with delta halved
/// whenever a level stalls.  The refinement drives the objective to the
/// maximum of the piecewise-linear objective far closer than diminishing
/// steps alone can.
inline SolveReport solve_relaxation(const MarketModel& mm, const ScenarioSet& set,
                                    DecisionCaps caps, SolveConfig config = {}) {
  validate_market(mm);
  set.validate(mm.horizon());
  if (caps.d_max < 0 || caps.y_max < 0)
    throw std::invalid_argument("solve_relaxation: caps must be >= 0");
  if (config.iterations < 0 || config.refine_iterations < 0)
    throw std::invalid_argument("solve_relaxation: negative iteration budget");
  const std::size_t horizon = mm.horizon();

  detail::SolverState st;
  st.demand.assign(horizon, 0.0);
  st.day_ahead.assign(horizon, 0.0);
  st.best_demand = st.demand;
  st.best_day_ahead = st.day_ahead;
  st.best_objective = expected_profit(mm, st.demand, st.day_ahead, set);

  int steps_taken = 0;
  double last_step = 0.0;
  bool stagnated = false;

  // Phase 1: diminishing steps.
  double window_best = st.best_objective;
  int window_start = 0;
  for (int k = 1; k <= config.iterations; ++k) {
    const ProfitSupergradient g = profit_supergradient(mm, st.demand, st.day_ahead, set);
    const double step = config.step0 / std::sqrt(static_cast<double>(k));
    for (std::size_t t = 0; t < horizon; ++t) {
      st.demand[t] += step * g.demand[t];
      st.day_ahead[t] += step * g.day_ahead[t];
    }
    detail::project_decision(st.demand, st.day_ahead, caps);
    last_step = step;
    ++steps_taken;

    const double objective = expected_profit(mm, st.demand, st.day_ahead, set);
    if (objective > st.best_objective) {
      st.best_objective = objective;
      st.best_demand = st.demand;
      st.best_day_ahead = st.day_ahead;
    }
    if (k - window_start >= config.stagnation_window) {
      if (st.best_objective - window_best <= config.tolerance) {
        stagnated = true;
        break;
      }
      window_best = st.best_objective;
      window_start = k;
    }
  }

  detail::fold_integer_neighbors(mm, set, caps, st);

  // Phase 2: target-level refinement from the incumbent.
  bool refined_to_floor = false;
  if (config.refine_iterations > 0) {
    st.demand = st.best_demand;
    st.day_ahead = st.best_day_ahead;
    double delta = std::max(1.0, 0.01 * std::abs(st.best_objective));
    const double delta_floor = 1e-10;
    const int level_window = 50;
    double level_base = st.best_objective;
    int level_iters = 0;

    for (int k = 0; k < config.refine_iterations; ++k) {
      const ProfitSupergradient g = profit_supergradient(mm, st.demand, st.day_ahead, set);
      double norm2 = 0.0;
      for (std::size_t t = 0; t < horizon; ++t)
        norm2 += g.demand[t] * g.demand[t] + g.day_ahead[t] * g.day_ahead[t];
      if (norm2 <= 1e-16) {
        refined_to_floor = true;  // zero supergradient: the point is optimal
        break;
      }
      const double current = expected_profit(mm, st.demand, st.day_ahead, set);
      const double step = (st.best_objective + delta - current) / norm2;
      for (std::size_t t = 0; t < horizon; ++t) {
        st.demand[t] += step * g.demand[t];
        st.day_ahead[t] += step * g.day_ahead[t];
      }
      detail::project_decision(st.demand, st.day_ahead, caps);
      last_step = step;
      ++steps_taken;

      const double objective = expected_profit(mm, st.demand, st.day_ahead, set);
      if (objective > st.best_objective) {
        st.best_objective = objective;
        st.best_demand = st.demand;
        st.best_day_ahead = st.day_ahead;
      }
      ++level_iters;
      if (st.best_objective - level_base >= 0.5 * delta) {
        level_base = st.best_objective;
        level_iters = 0;
      } else if (level_iters >= level_window) {
        delta *= 0.5;
        level_base = st.best_objective;
        level_iters = 0;
        st.demand = st.best_demand;
        st.day_ahead = st.best_day_ahead;
        if (delta < delta_floor) {
          refined_to_floor = true;
          break;
        }
      }
    }
    detail::fold_integer_neighbors(mm, set, caps, st);
  }

  SolveReport report;
  report.relaxed = {st.best_demand, st.best_day_ahead};
  report.objective_relaxed = st.best_objective;
  const RoundedDecision rounded = round_solution(st.best_demand, st.best_day_ahead);
  report.demand_rounded = rounded.demand;
  report.day_ahead_rounded = rounded.day_ahead;
  std::vector<double> rd(rounded.demand.begin(), rounded.demand.end());
  std::vector<double> ry(rounded.day_ahead.begin(), rounded.day_ahead.end());
  report.objective_rounded = expected_profit(mm, rd, ry, set);
  report.gap_bound = rounding_gap_bound(mm);
  report.iterations = steps_taken;
  report.final_step_size = last_step;
  report.converged = refined_to_floor || (stagnated && config.refine_iterations == 0);

  if (report.objective_rounded < report.objective_relaxed - report.gap_bound - 1e-9)
    throw std::logic_error("solve_relaxation: rounding exceeded the certified gap");
  return report;
}

}  // namespace ratecon

#endif
