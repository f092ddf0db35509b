#ifndef RATECON_REALTIME_HPP
#define RATECON_REALTIME_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "ratecon/adequacy.hpp"
#include "ratecon/core.hpp"
#include "ratecon/majorization.hpp"
#include "ratecon/portfolio.hpp"

namespace ratecon {

/// Per-slot energy sources and their total: total = day_ahead + renewable
/// + purchases, entrywise.
struct SupplyProfile {
  EnergyVector day_ahead;   // y
  EnergyVector renewable;   // r
  EnergyVector purchases;   // a
  EnergyVector total;       // q
};

/// Empirical distribution of renewable realizations.  Weights are
/// optional; an empty weight vector means uniform.
struct ScenarioSet {
  std::vector<EnergyVector> scenarios;
  std::vector<double> weights;

  std::size_t size() const noexcept { return scenarios.size(); }

  double weight(std::size_t i) const {
    if (weights.empty()) return 1.0 / static_cast<double>(scenarios.size());
    return weights[i];
  }

  void validate(std::size_t horizon) const {
    for (const auto& s : scenarios)
      if (s.size() != horizon) throw InputError("scenario horizon mismatch");
    if (!weights.empty()) {
      if (weights.size() != scenarios.size())
        throw InputError("scenario weights count mismatch");
      double sum = 0.0;
      for (double w : weights) {
        if (w < 0.0) throw InputError("scenario weight must be non-negative");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw InputError("scenario weights must sum to 1");
    }
  }
};

/// Seeded scenario generator: independent per-slot draws, uniform on
/// [mean - spread, mean + spread] truncated at zero.  Uses the raw
/// mt19937_64 stream, so output is identical on every platform.
inline ScenarioSet generate_scenarios(std::size_t horizon, std::size_t count, std::uint64_t seed,
                                      Energy mean, Energy spread) {
  if (mean < 0 || spread < 0)
    throw std::invalid_argument("generate_scenarios: mean and spread must be >= 0");
  std::mt19937_64 engine(seed);
  const std::uint64_t width = static_cast<std::uint64_t>(2 * spread + 1);
  ScenarioSet set;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<Energy> r(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const Energy offset = static_cast<Energy>(engine() % width) - spread;
      r[t] = std::max<Energy>(0, mean + offset);
    }
    set.scenarios.push_back(EnergyVector(std::move(r)));
  }
  return set;
}

/// Minimal purchase for the current slot: the smallest a >= 0 such that
/// the slot totals seen so far, extended by slot_supply + a, still cover
/// the matching tail of the demand-duration vector.  Solved in closed
/// form: only the constraints built from the k smallest earlier totals
/// bind, for k = 0..t-1.
inline Energy purchase_step(const DemandDuration& d, std::span<const Energy> fixed_totals,
                            Energy day_ahead_t, Energy renewable_t) {
  const std::size_t horizon = d.horizon();
  const std::size_t t = fixed_totals.size() + 1;
  if (t > horizon) throw std::invalid_argument("purchase_step: slot beyond horizon");
  if (day_ahead_t < 0 || renewable_t < 0)
    throw std::invalid_argument("purchase_step: negative slot supply");
  const Energy base = day_ahead_t + renewable_t;

  std::vector<Energy> ascending(fixed_totals.begin(), fixed_totals.end());
  std::sort(ascending.begin(), ascending.end());

  // tail(k+1) = d_{T-k} + ... + d_T, matched against the k smallest
  // earlier totals plus this slot's supply.
  Energy tail = 0;
  Energy smallest_sum = 0;
  Energy best = 0;
  for (std::size_t k = 0; k < t; ++k) {
    tail += d[horizon - 1 - k];
    if (k > 0) smallest_sum += ascending[k - 1];
    best = std::max(best, tail - smallest_sum - base);
  }
  return std::max<Energy>(best, 0);
}

/// Runs the minimal-purchase policy over the horizon.  The resulting
/// totals weakly cover the demand tail after every prefix, and the total
/// purchase equals the energy gap of day_ahead + renewable; both are
/// re-checked at runtime.
inline SupplyProfile run_purchase_policy(const DemandDuration& d, const EnergyVector& day_ahead,
                                         const EnergyVector& renewable) {
  const std::size_t horizon = d.horizon();
  if (day_ahead.size() != horizon || renewable.size() != horizon)
    throw std::invalid_argument("run_purchase_policy: length mismatch");

  std::vector<Energy> purchases(horizon, 0);
  std::vector<Energy> totals;
  totals.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const Energy a = purchase_step(d, totals, day_ahead[t], renewable[t]);
    purchases[t] = a;
    totals.push_back(day_ahead[t] + renewable[t] + a);

    std::vector<Energy> tail(d.vec().values().end() - static_cast<std::ptrdiff_t>(t + 1),
                             d.vec().values().end());
    if (!weakly_majorizes(EnergyVector(std::move(tail)), EnergyVector(totals)))
      throw std::logic_error("run_purchase_policy: prefix totals fail to cover demand tail");
  }

  SupplyProfile profile{day_ahead, renewable, EnergyVector(std::move(purchases)),
                        EnergyVector(std::move(totals))};
  if (profile.purchases.total() != energy_gap(d, day_ahead + renewable))
    throw std::logic_error("run_purchase_policy: total purchase differs from energy gap");
  return profile;
}

/// Full real-time trace for one renewable realization: purchases, totals,
/// unit-rate allocations, and per-service allocations merged back through
/// the decomposition origin.
struct PolicyTrace {
  SupplyProfile profile;
  AllocationMatrix unit_allocations;
  std::vector<std::vector<Energy>> service_allocations;  // one row per service
  Energy total_purchase = 0;
};

inline PolicyTrace simulate_delivery(const Portfolio& c, const EnergyVector& day_ahead,
                                     const EnergyVector& renewable) {
  const std::size_t horizon = c.horizon();
  if (day_ahead.size() != horizon || renewable.size() != horizon)
    throw std::invalid_argument("simulate_delivery: length mismatch");

  const UnitRatePortfolio units = decompose_portfolio(c);
  const DemandDuration d = demand_duration(units);

  PolicyTrace trace;
  trace.profile = run_purchase_policy(d, day_ahead, renewable);
  trace.total_purchase = trace.profile.purchases.total();

  LlfResult llf = llf_allocate(units.durations, trace.profile.total);
  if (!llf.complete)
    throw std::logic_error("simulate_delivery: purchase policy produced an inadequate supply");
  trace.unit_allocations = std::move(llf.allocation);

  trace.service_allocations.assign(c.services().size(), std::vector<Energy>(horizon, 0));
  for (std::size_t j = 0; j < units.durations.size(); ++j) {
    const std::size_t parent = units.origin[j].service;
    for (std::size_t t = 0; t < horizon; ++t)
      trace.service_allocations[parent][t] += trace.unit_allocations.nu[j][t];
  }
  for (std::size_t i = 0; i < c.services().size(); ++i) {
    Energy sum = 0;
    for (std::size_t t = 0; t < horizon; ++t) {
      const Energy v = trace.service_allocations[i][t];
      if (v < 0 || v > c.services()[i].rate)
        throw std::logic_error("simulate_delivery: merged allocation violates rate constraint");
      sum += v;
    }
    if (sum != c.services()[i].energy)
      throw std::logic_error("simulate_delivery: merged allocation misses total energy");
  }
  return trace;
}

/// Energy gap recomputed through the subset formulation: the worst value
/// of (demand tail of length k) minus (sum of the k smallest supply
/// entries), over k = 1..T.  Agrees with energy_gap on every input; the
/// two routes are kept separate on purpose.
inline Energy energy_gap_subset_form(const DemandDuration& d, const EnergyVector& x) {
  if (d.horizon() != x.size())
    throw std::invalid_argument("energy_gap_subset_form: length mismatch");
  std::vector<Energy> ascending = x.values();
  std::sort(ascending.begin(), ascending.end());

  Energy tail = 0;
  Energy prefix = 0;
  Energy best = 0;
  for (std::size_t k = 1; k <= x.size(); ++k) {
    tail += d[d.horizon() - k];
    prefix += ascending[k - 1];
    best = std::max(best, tail - prefix);
  }
  return std::max<Energy>(best, 0);
}

/// Expected real-time purchase cost at fixed portfolio and day-ahead
/// vector: rt_price times the weighted average energy gap over the
/// scenario set.  Zero for an empty set.  Accumulation follows scenario
/// order, so results are reproducible.
inline double expected_rt_cost(const Portfolio& c, const EnergyVector& day_ahead,
                               const ScenarioSet& set, double rt_price) {
  if (set.size() == 0) return 0.0;
  set.validate(c.horizon());
  if (day_ahead.size() != c.horizon())
    throw std::invalid_argument("expected_rt_cost: length mismatch");
  const DemandDuration d = demand_duration(decompose_portfolio(c));
  double acc = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i)
    acc += set.weight(i) * static_cast<double>(energy_gap(d, day_ahead + set.scenarios[i]));
  return rt_price * acc;
}

}  // namespace ratecon

#endif
