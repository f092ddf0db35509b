#ifndef RATECON_PORTFOLIO_HPP
#define RATECON_PORTFOLIO_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ratecon/core.hpp"

namespace ratecon {

/// A rate-constrained energy service: `energy` units delivered over the
/// horizon, at most `rate` units per slot.
struct Service {
  Energy energy = 0;  // E
  Energy rate = 1;    // m
};

inline void validate_service(const Service& s) {
  if (s.energy < 0) throw std::invalid_argument("service: energy must be >= 0");
  if (s.rate < 1) throw std::invalid_argument("service: rate must be >= 1");
}

class Portfolio {
 public:
  Portfolio(std::vector<Service> services, std::size_t horizon)
      : services_(std::move(services)), horizon_(horizon) {
    if (horizon_ < 1) throw std::invalid_argument("portfolio: horizon must be >= 1");
    for (std::size_t i = 0; i < services_.size(); ++i) {
      validate_service(services_[i]);
      const Service& s = services_[i];
      if (s.energy > s.rate * static_cast<Energy>(horizon_))
        throw InfeasibleError(i, "services[" + std::to_string(i) + "] infeasible: E=" +
                                     std::to_string(s.energy) + " exceeds m*T=" +
                                     std::to_string(s.rate * static_cast<Energy>(horizon_)));
    }
  }

  const std::vector<Service>& services() const noexcept { return services_; }
  std::size_t horizon() const noexcept { return horizon_; }

 private:
  std::vector<Service> services_;
  std::size_t horizon_;
};

/// Which parent service a unit-rate component came from, and its position
/// within that parent's decomposition (0-based, one slot per rate unit).
struct UnitOrigin {
  std::size_t service = 0;
  Energy unit = 0;
};

/// A collection of rate-1 services, each characterized by the number of
/// slots it must be served in (its duration).
struct UnitRatePortfolio {
  std::vector<Energy> durations;
  std::vector<UnitOrigin> origin;
  std::size_t horizon = 0;
};

/// d_t = number of unit-rate services with duration >= t.  Non-increasing
/// with an implicit trailing zero at t = T+1.
class DemandDuration {
 public:
  explicit DemandDuration(EnergyVector d) : d_(std::move(d)) {
    for (std::size_t t = 0; t + 1 < d_.size(); ++t)
      if (d_[t] < d_[t + 1])
        throw std::invalid_argument("demand-duration vector must be non-increasing");
  }

  const EnergyVector& vec() const noexcept { return d_; }
  std::size_t horizon() const noexcept { return d_.size(); }
  Energy operator[](std::size_t i) const { return d_[i]; }
  Energy total() const noexcept { return d_.total(); }

  friend bool operator==(const DemandDuration& a, const DemandDuration& b) {
    return a.d_ == b.d_;
  }

 private:
  EnergyVector d_;
};

/// Splits (E, m) into m rate-1 services.  With E = k*m + l, 0 <= l < m,
/// the first l components need k+1 slots and the rest need k.
inline std::vector<Energy> decompose_service(const Service& s) {
  validate_service(s);
  const Energy k = s.energy / s.rate;
  const Energy l = s.energy % s.rate;
  std::vector<Energy> durations(static_cast<std::size_t>(s.rate), k);
  for (Energy j = 0; j < l; ++j) durations[static_cast<std::size_t>(j)] = k + 1;
  return durations;
}

/// Concatenated per-service decompositions, in service order, tagged with
/// their origin.
inline UnitRatePortfolio decompose_portfolio(const Portfolio& c) {
  UnitRatePortfolio u;
  u.horizon = c.horizon();
  for (std::size_t i = 0; i < c.services().size(); ++i) {
    const auto parts = decompose_service(c.services()[i]);
    for (std::size_t j = 0; j < parts.size(); ++j) {
      u.durations.push_back(parts[j]);
      u.origin.push_back({i, static_cast<Energy>(j)});
    }
  }
  return u;
}

/// Demand-duration vector of an explicit duration list.  Every duration
/// must fit the horizon.
inline DemandDuration demand_duration_of(const std::vector<Energy>& durations,
                                         std::size_t horizon) {
  if (horizon < 1) throw std::invalid_argument("demand_duration: horizon must be >= 1");
  std::vector<Energy> d(horizon, 0);
  for (Energy e : durations) {
    if (e < 0) throw std::invalid_argument("demand_duration: negative duration");
    if (e > static_cast<Energy>(horizon))
      throw std::invalid_argument("demand_duration: duration exceeds horizon");
    for (Energy t = 0; t < e; ++t) d[static_cast<std::size_t>(t)] += 1;
  }
  return DemandDuration(EnergyVector(std::move(d)));
}

inline DemandDuration demand_duration(const UnitRatePortfolio& u) {
  return demand_duration_of(u.durations, u.horizon);
}

/// Inverse of demand_duration for integer non-increasing d: emits
/// d_t - d_{t+1} services of duration t, in ascending duration order.
inline std::vector<Energy> durations_with_demand(const DemandDuration& d) {
  std::vector<Energy> out;
  const std::size_t horizon = d.horizon();
  for (std::size_t t = 0; t < horizon; ++t) {
    const Energy next = (t + 1 < horizon) ? d[t + 1] : 0;
    for (Energy c = 0; c < d[t] - next; ++c) out.push_back(static_cast<Energy>(t + 1));
  }
  return out;
}

/// Splits a feasible allocation of one (E, m) service into m binary rows,
/// one per unit-rate component.  Each pass marks the required number of
/// slots with the largest residual value (ties to the earliest slot) and
/// peels one unit off them.
inline std::vector<std::vector<Energy>> split_allocation(const Service& s,
                                                         const std::vector<Energy>& u) {
  validate_service(s);
  Energy total = 0;
  for (Energy v : u) {
    if (v < 0 || v > s.rate)
      throw std::invalid_argument("split_allocation: slot allocation outside [0, m]");
    total += v;
  }
  if (total != s.energy)
    throw std::invalid_argument("split_allocation: allocation total differs from E");

  const auto durations = decompose_service(s);
  const std::size_t horizon = u.size();
  std::vector<Energy> residual = u;
  std::vector<std::vector<Energy>> rows(durations.size(), std::vector<Energy>(horizon, 0));

  std::vector<std::size_t> order(horizon);
  for (std::size_t j = 0; j < durations.size(); ++j) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return residual[a] > residual[b];
    });
    for (Energy picked = 0; picked < durations[j]; ++picked) {
      const std::size_t slot = order[static_cast<std::size_t>(picked)];
      rows[j][slot] = 1;
      residual[slot] -= 1;
    }
  }
  for (Energy v : residual)
    if (v != 0) throw std::logic_error("split_allocation: peeling left a nonzero residual");
  return rows;
}

/// Slot-wise sum of binary unit-rate rows back into a per-service
/// allocation.
inline std::vector<Energy> merge_allocation(const std::vector<std::vector<Energy>>& unit_rows) {
  if (unit_rows.empty()) return {};
  const std::size_t horizon = unit_rows.front().size();
  std::vector<Energy> u(horizon, 0);
  for (const auto& row : unit_rows) {
    if (row.size() != horizon) throw std::invalid_argument("merge_allocation: ragged rows");
    for (std::size_t t = 0; t < horizon; ++t) {
      if (row[t] != 0 && row[t] != 1)
        throw std::invalid_argument("merge_allocation: rows must be binary");
      u[t] += row[t];
    }
  }
  return u;
}

}  // namespace ratecon

#endif
