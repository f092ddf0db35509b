#ifndef RATECON_ORACLE_HPP
#define RATECON_ORACLE_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ratecon/adequacy.hpp"
#include "ratecon/core.hpp"
#include "ratecon/market.hpp"
#include "ratecon/portfolio.hpp"
#include "ratecon/realtime.hpp"

namespace ratecon::oracle {

/// Limits for the exhaustive reference checks.
struct SmallInstanceBounds {
  std::size_t horizon_max = 4;
  std::size_t services_max = 3;
  Energy duration_max = 4;
  Energy supply_max = 4;
  long long state_budget = 10'000'000;
};

/// Rough size of the instance sweep implied by the bounds: duration
/// multisets times supply vectors.
inline long long enumeration_size(const SmallInstanceBounds& b) {
  long long multisets = 0;
  long long layer = 1;  // multisets of size n from duration_max+1 symbols
  for (std::size_t n = 0; n <= b.services_max; ++n) {
    multisets += layer;
    layer = layer * (static_cast<long long>(b.duration_max) + static_cast<long long>(n) + 1) /
            (static_cast<long long>(n) + 1);
  }
  long long supplies = 0;
  long long pow = 1;
  for (std::size_t t = 1; t <= b.horizon_max; ++t) {
    pow *= static_cast<long long>(b.supply_max) + 1;
    supplies += pow;
  }
  return multisets * supplies;
}

namespace detail {

// Complete backtracking search for a feasible binary allocation.  At each
// slot a subset of unfinished rows is served; column sums stay <= p_t
// (or == p_t for the exact variant).  Rows with equal remaining demand
// are interchangeable, so failures memoize on the sorted remainder.
class AllocationSearch {
 public:
  AllocationSearch(std::vector<Energy> remaining, const EnergyVector& supply, bool exact)
      : remaining_(std::move(remaining)), supply_(supply), exact_(exact),
        failed_(supply.size() + 1) {}

  bool run() { return search(0); }

 private:
  bool search(std::size_t t) {
    const std::size_t horizon = supply_.size();
    if (t == horizon) {
      for (Energy e : remaining_)
        if (e != 0) return false;
      return true;
    }
    const Energy slots_left = static_cast<Energy>(horizon - t);
    Energy remaining_total = 0;
    for (Energy e : remaining_) {
      if (e > slots_left) return false;
      remaining_total += e;
    }
    Energy supply_left = 0;
    for (std::size_t s = t; s < horizon; ++s) supply_left += supply_[s];
    if (remaining_total > supply_left) return false;
    if (exact_ && remaining_total != supply_left) return false;

    std::vector<Energy> key = remaining_;
    std::sort(key.begin(), key.end());
    if (failed_[t].count(key)) return false;

    std::vector<std::size_t> unfinished;
    for (std::size_t j = 0; j < remaining_.size(); ++j)
      if (remaining_[j] > 0) unfinished.push_back(j);

    const Energy cap = supply_[t];
    const std::size_t u = unfinished.size();
    if (!(exact_ && cap > static_cast<Energy>(u))) {
      for (std::uint64_t mask = 0; mask < (1ull << u); ++mask) {
        const Energy served = static_cast<Energy>(__builtin_popcountll(mask));
        if (exact_ ? served != cap : served > cap) continue;
        for (std::size_t i = 0; i < u; ++i)
          if (mask >> i & 1) remaining_[unfinished[i]] -= 1;
        const bool ok = search(t + 1);
        for (std::size_t i = 0; i < u; ++i)
          if (mask >> i & 1) remaining_[unfinished[i]] += 1;
        if (ok) return true;
      }
    }
    failed_[t].insert(std::move(key));
    return false;
  }

  std::vector<Energy> remaining_;
  const EnergyVector& supply_;
  bool exact_;
  std::vector<std::set<std::vector<Energy>>> failed_;
};

}  // namespace detail

/// Exhaustive check: does some binary allocation serve every duration
/// with column sums at most the supply?
inline bool bf_adequate(const std::vector<Energy>& durations, const EnergyVector& supply) {
  return detail::AllocationSearch(durations, supply, false).run();
}

/// Variant with column sums exactly equal to the supply.
inline bool bf_exactly_adequate(const std::vector<Energy>& durations, const EnergyVector& supply) {
  return detail::AllocationSearch(durations, supply, true).run();
}

namespace detail {

// Rate-m variant: serves each service any amount in [0, m] per slot.
inline bool services_search(const std::vector<Service>& services, std::vector<Energy>& remaining,
                            const EnergyVector& supply, std::size_t t) {
  const std::size_t horizon = supply.size();
  if (t == horizon) {
    for (Energy e : remaining)
      if (e != 0) return false;
    return true;
  }
  for (std::size_t i = 0; i < services.size(); ++i)
    if (remaining[i] > services[i].rate * static_cast<Energy>(horizon - t)) return false;

  std::function<bool(std::size_t, Energy)> assign = [&](std::size_t i, Energy left) -> bool {
    if (i == services.size()) return services_search(services, remaining, supply, t + 1);
    const Energy hi = std::min({services[i].rate, remaining[i], left});
    for (Energy v = 0; v <= hi; ++v) {
      remaining[i] -= v;
      const bool ok = assign(i + 1, left - v);
      remaining[i] += v;
      if (ok) return true;
    }
    return false;
  };
  return assign(0, supply[t]);
}

}  // namespace detail

/// Exhaustive adequacy check directly on rate-constrained services,
/// without decomposing them.
inline bool bf_adequate_services(const Portfolio& c, const EnergyVector& supply) {
  if (supply.size() != c.horizon())
    throw std::invalid_argument("bf_adequate_services: length mismatch");
  std::vector<Energy> remaining;
  for (const Service& s : c.services()) remaining.push_back(s.energy);
  return detail::services_search(c.services(), remaining, supply, 0);
}

/// Smallest total purchase that makes the supply adequate, found by
/// enumerating purchase vectors of increasing total.  Purchases beyond
/// the total demand never help, so the search is finite.
inline Energy bf_min_purchase(const DemandDuration& d, const EnergyVector& day_ahead,
                              const EnergyVector& renewable) {
  const std::size_t horizon = d.horizon();
  if (day_ahead.size() != horizon || renewable.size() != horizon)
    throw std::invalid_argument("bf_min_purchase: length mismatch");
  const std::vector<Energy> durations = durations_with_demand(d);
  const EnergyVector base = day_ahead + renewable;

  std::vector<Energy> purchase(horizon, 0);
  std::function<bool(std::size_t, Energy)> try_compositions = [&](std::size_t t,
                                                                  Energy left) -> bool {
    if (t + 1 == horizon) {
      purchase[t] = left;
      std::vector<Energy> supply = base.values();
      for (std::size_t s = 0; s < horizon; ++s) supply[s] += purchase[s];
      return bf_adequate(durations, EnergyVector(std::move(supply)));
    }
    for (Energy v = 0; v <= left; ++v) {
      purchase[t] = v;
      if (try_compositions(t + 1, left - v)) return true;
    }
    return false;
  };

  for (Energy total = 0; total <= d.total(); ++total)
    if (try_compositions(0, total)) return total;
  return d.total();
}

/// Literal subset enumeration of the deficit function: for every subset S
/// of slots, the demand tail of length |S| minus the supply summed over
/// S, clamped at zero.  Feasible only for small horizons.
inline Energy bf_energy_gap_subsets(const DemandDuration& d, const EnergyVector& x) {
  const std::size_t horizon = d.horizon();
  if (x.size() != horizon)
    throw std::invalid_argument("bf_energy_gap_subsets: length mismatch");
  if (horizon > 20) throw std::invalid_argument("bf_energy_gap_subsets: horizon too large");
  std::vector<Energy> tail(horizon + 1, 0);
  for (std::size_t k = 1; k <= horizon; ++k) tail[k] = tail[k - 1] + d[horizon - k];
  Energy best = 0;
  for (std::uint64_t mask = 0; mask < (1ull << horizon); ++mask) {
    Energy sum = 0;
    for (std::size_t t = 0; t < horizon; ++t)
      if (mask >> t & 1) sum += x[t];
    const std::size_t k = static_cast<std::size_t>(__builtin_popcountll(mask));
    best = std::max(best, tail[k] - sum);
  }
  return std::max<Energy>(best, 0);
}

struct IntegerMarketOptimum {
  std::vector<Energy> demand;
  std::vector<Energy> day_ahead;
  double objective = 0.0;
};

/// Exhaustive grid search over integer non-increasing demand vectors and
/// integer day-ahead vectors within the caps.  Ties keep the
/// lexicographically smallest (demand, day_ahead).
inline IntegerMarketOptimum bf_optimal_integer_market(const MarketModel& mm,
                                                      const ScenarioSet& set, DecisionCaps caps,
                                                      long long grid_budget = 1'000'000) {
  validate_market(mm);
  set.validate(mm.horizon());
  const std::size_t horizon = mm.horizon();

  long long demand_count = 1;  // non-increasing vectors in [0, d_max]^T
  for (std::size_t t = 1; t <= horizon; ++t)
    demand_count = demand_count * (static_cast<long long>(caps.d_max) + static_cast<long long>(t)) /
                   static_cast<long long>(t);
  long long day_ahead_count = 1;
  for (std::size_t t = 0; t < horizon; ++t) {
    day_ahead_count *= static_cast<long long>(caps.y_max) + 1;
    if (day_ahead_count > grid_budget) break;
  }
  if (demand_count > grid_budget || day_ahead_count > grid_budget ||
      demand_count * day_ahead_count > grid_budget)
    throw InputError("bf_optimal_integer_market: grid exceeds budget");

  IntegerMarketOptimum best;
  best.demand.assign(horizon, 0);
  best.day_ahead.assign(horizon, 0);
  bool first = true;

  std::vector<Energy> demand(horizon, 0);
  std::vector<Energy> day_ahead(horizon, 0);
  std::vector<double> dd(horizon), yd(horizon);

  std::function<void(std::size_t)> sweep_day_ahead = [&](std::size_t t) {
    if (t == horizon) {
      for (std::size_t s = 0; s < horizon; ++s) {
        dd[s] = static_cast<double>(demand[s]);
        yd[s] = static_cast<double>(day_ahead[s]);
      }
      const double objective = expected_profit(mm, dd, yd, set);
      if (first || objective > best.objective) {
        first = false;
        best = {demand, day_ahead, objective};
      }
      return;
    }
    for (Energy v = 0; v <= caps.y_max; ++v) {
      day_ahead[t] = v;
      sweep_day_ahead(t + 1);
    }
  };
  std::function<void(std::size_t, Energy)> sweep_demand = [&](std::size_t t, Energy upper) {
    if (t == horizon) {
      sweep_day_ahead(0);
      return;
    }
    for (Energy v = 0; v <= upper; ++v) {
      demand[t] = v;
      sweep_demand(t + 1, v);
    }
  };
  sweep_demand(0, caps.d_max);
  return best;
}

// ---------------------------------------------------------------------
// Cross-check suites surfaced through the CLI.

struct VerifyOutcome {
  bool passed = true;
  long long checked = 0;
  std::string counterexample;
};

using AdequacyPredicate = std::function<bool(const DemandDuration&, const EnergyVector&)>;

namespace detail {

inline std::string describe_instance(const std::vector<Energy>& durations,
                                     const EnergyVector& supply) {
  std::ostringstream os;
  os << "durations=[";
  for (std::size_t i = 0; i < durations.size(); ++i)
    os << (i ? "," : "") << durations[i];
  os << "] supply=[";
  for (std::size_t i = 0; i < supply.size(); ++i)
    os << (i ? "," : "") << supply[i];
  os << "]";
  return os.str();
}

}  // namespace detail

/// Calls f for every duration multiset within the bounds that fits the
/// horizon (non-increasing duration lists, up to services_max entries).
inline void for_each_duration_multiset(const SmallInstanceBounds& b, std::size_t horizon,
                                       const std::function<void(const std::vector<Energy>&)>& f) {
  const Energy max_dur = std::min<Energy>(b.duration_max, static_cast<Energy>(horizon));
  std::vector<Energy> durations;
  std::function<void(Energy)> build = [&](Energy upper) {
    f(durations);
    if (durations.size() == b.services_max) return;
    for (Energy e = upper; e >= 0; --e) {
      durations.push_back(e);
      build(e);
      durations.pop_back();
    }
  };
  build(max_dur);
}

/// Calls f for every supply vector of the given horizon with entries in
/// [0, supply_max].
inline void for_each_supply_vector(const SmallInstanceBounds& b, std::size_t horizon,
                                   const std::function<void(const EnergyVector&)>& f) {
  std::vector<Energy> supply(horizon, 0);
  std::function<void(std::size_t)> build = [&](std::size_t t) {
    if (t == horizon) {
      f(EnergyVector(supply));
      return;
    }
    for (Energy v = 0; v <= b.supply_max; ++v) {
      supply[t] = v;
      build(t + 1);
    }
  };
  build(0);
}

/// Sweeps every instance within the bounds and compares the majorization
/// adequacy predicates against the brute-force allocation search.  The
/// predicates are injectable so a corrupted one can be shown to surface a
/// counterexample.
inline VerifyOutcome verify_adequacy_equivalence(const SmallInstanceBounds& b,
                                                 AdequacyPredicate adequate = {},
                                                 AdequacyPredicate exact = {}) {
  if (enumeration_size(b) > b.state_budget)
    throw InputError("verify_adequacy_equivalence: bounds exceed state budget");
  if (!adequate)
    adequate = [](const DemandDuration& d, const EnergyVector& p) { return is_adequate(d, p); };
  if (!exact)
    exact = [](const DemandDuration& d, const EnergyVector& p) {
      return is_exactly_adequate(d, p);
    };

  VerifyOutcome out;
  for (std::size_t horizon = 1; horizon <= b.horizon_max && out.passed; ++horizon) {
    for_each_duration_multiset(b, horizon, [&](const std::vector<Energy>& durations) {
      if (!out.passed) return;
      const DemandDuration d = demand_duration_of(durations, horizon);
      for_each_supply_vector(b, horizon, [&](const EnergyVector& supply) {
        if (!out.passed) return;
        ++out.checked;
        const bool lib_weak = adequate(d, supply);
        const bool bf_weak = bf_adequate(durations, supply);
        const bool lib_exact = exact(d, supply);
        const bool bf_exact = bf_exactly_adequate(durations, supply);
        if (lib_weak != bf_weak || lib_exact != bf_exact) {
          out.passed = false;
          out.counterexample = detail::describe_instance(durations, supply) +
                               " adequate=" + std::to_string(lib_weak) + "/" +
                               std::to_string(bf_weak) + " exact=" + std::to_string(lib_exact) +
                               "/" + std::to_string(bf_exact);
        }
      });
    });
  }
  return out;
}

/// Sweeps every instance within the bounds and checks that the brute
///-force minimum purchase, the energy gap, and the purchase policy's
/// total all agree.
inline VerifyOutcome verify_min_purchase(const SmallInstanceBounds& b) {
  if (enumeration_size(b) > b.state_budget)
    throw InputError("verify_min_purchase: bounds exceed state budget");
  VerifyOutcome out;
  for (std::size_t horizon = 1; horizon <= b.horizon_max && out.passed; ++horizon) {
    const EnergyVector zero = EnergyVector::zeros(horizon);
    for_each_duration_multiset(b, horizon, [&](const std::vector<Energy>& durations) {
      if (!out.passed) return;
      const DemandDuration d = demand_duration_of(durations, horizon);
      for_each_supply_vector(b, horizon, [&](const EnergyVector& supply) {
        if (!out.passed) return;
        ++out.checked;
        const Energy gap = energy_gap(d, supply);
        const Energy bf = bf_min_purchase(d, zero, supply);
        const Energy policy = run_purchase_policy(d, zero, supply).purchases.total();
        if (gap != bf || gap != policy) {
          out.passed = false;
          out.counterexample = detail::describe_instance(durations, supply) +
                               " gap=" + std::to_string(gap) + " bf=" + std::to_string(bf) +
                               " policy=" + std::to_string(policy);
        }
      });
    });
  }
  return out;
}

struct MarketVerifyConfig {
  int markets = 50;
  std::uint64_t seed = 7001;
  std::size_t horizon = 2;
  Energy cap = 3;
  double relax_tolerance = 1e-6;
};

/// Random small markets: the exhaustive integer optimum must sit within
/// the rounding gap bound of the rounded subgradient solution, and the
/// relaxed objective must dominate the integer optimum.
inline VerifyOutcome verify_market_gap(const MarketVerifyConfig& cfg = {}) {
  VerifyOutcome out;
  std::mt19937_64 rng(cfg.seed);
  for (int m = 0; m < cfg.markets && out.passed; ++m) {
    MarketModel mm;
    for (std::size_t t = 0; t < cfg.horizon; ++t)
      mm.unit_prices.push_back(static_cast<double>(rng() % 13));
    mm.day_ahead_price = static_cast<double>(rng() % 7);
    mm.realtime_price = static_cast<double>(rng() % 13);

    ScenarioSet set;
    const std::size_t n_scenarios = 1 + rng() % 4;
    for (std::size_t i = 0; i < n_scenarios; ++i) {
      std::vector<Energy> r(cfg.horizon);
      for (auto& v : r) v = static_cast<Energy>(rng() % 5);
      set.scenarios.push_back(EnergyVector(std::move(r)));
    }

    const DecisionCaps caps{cfg.cap, cfg.cap};
    const IntegerMarketOptimum opt = bf_optimal_integer_market(mm, set, caps);
    const SolveReport report = solve_relaxation(mm, set, caps);

    ++out.checked;
    std::ostringstream os;
    if (opt.objective - report.objective_rounded > report.gap_bound + 1e-9) {
      out.passed = false;
      os << "market " << m << ": J*=" << opt.objective
         << " rounded=" << report.objective_rounded << " bound=" << report.gap_bound;
      out.counterexample = os.str();
    } else if (report.objective_relaxed < opt.objective - cfg.relax_tolerance) {
      out.passed = false;
      os << "market " << m << ": relaxed=" << report.objective_relaxed
         << " below integer optimum J*=" << opt.objective;
      out.counterexample = os.str();
    }
  }
  return out;
}

}  // namespace ratecon::oracle

#endif
