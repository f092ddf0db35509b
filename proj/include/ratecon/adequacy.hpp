#ifndef RATECON_ADEQUACY_HPP
#define RATECON_ADEQUACY_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ratecon/core.hpp"
#include "ratecon/majorization.hpp"
#include "ratecon/portfolio.hpp"

namespace ratecon {

/// Binary on/off allocations for unit-rate services: nu[j][t] = 1 when
/// service j is served in slot t.  Row j sums to durations[j] once the
/// allocation is complete.
struct AllocationMatrix {
  std::vector<std::vector<Energy>> nu;
  std::vector<Energy> durations;
  std::size_t horizon = 0;
};

/// Progress of the sequential allocator: units served so far per row, and
/// the next slot to fill (1-based).
struct LaxityState {
  std::vector<Energy> served;
  std::size_t slot = 1;
};

/// A supply can serve every duration with slack allowed.
inline bool is_adequate(const DemandDuration& d, const EnergyVector& supply) {
  return weakly_majorizes(d.vec(), supply);
}

/// A supply can serve every duration while being consumed completely.
inline bool is_exactly_adequate(const DemandDuration& d, const EnergyVector& supply) {
  return majorizes(d.vec(), supply);
}

/// Minimum extra energy required to make the supply adequate: the worst
/// tail-sum deficit of demand against the supply-duration vector, clamped
/// at zero.  Zero exactly when the supply is adequate.
inline Energy energy_gap(const DemandDuration& d, const EnergyVector& supply) {
  if (d.horizon() != supply.size()) throw std::invalid_argument("energy_gap: length mismatch");
  const EnergyVector sorted = sort_nonincreasing(supply);
  Energy deficit = 0;
  Energy worst = 0;
  for (std::size_t t = d.horizon(); t-- > 0;) {
    deficit += d[t] - sorted[t];
    worst = std::max(worst, deficit);
  }
  return std::max<Energy>(worst, 0);
}

/// 1-based start index of the worst tail deficit (smallest such index),
/// or 0 when the supply is adequate.
inline std::size_t worst_tail_start(const DemandDuration& d, const EnergyVector& supply) {
  if (d.horizon() != supply.size())
    throw std::invalid_argument("worst_tail_start: length mismatch");
  const EnergyVector sorted = sort_nonincreasing(supply);
  Energy deficit = 0;
  Energy worst = 0;
  std::size_t start = 0;
  for (std::size_t t = d.horizon(); t-- > 0;) {
    deficit += d[t] - sorted[t];
    if (deficit >= worst && deficit > 0) {  // ties resolve to the smallest index
      worst = deficit;
      start = t + 1;
    }
  }
  return start;
}

struct LlfStep {
  LaxityState state;
  std::vector<Energy> column;
};

/// One slot of least-laxity-first allocation.  The laxity of row j at
/// slot t is (T - t + 1) - remaining_j: slots left minus service still
/// owed.  Unfinished rows are served smallest laxity first (ties to the
/// lower row index) until the slot's energy runs out.
inline LlfStep llf_allocate_step(const LaxityState& state, const std::vector<Energy>& durations,
                                 std::size_t horizon, Energy available) {
  if (available < 0) throw std::invalid_argument("llf_allocate_step: negative supply");
  if (state.served.size() != durations.size())
    throw std::invalid_argument("llf_allocate_step: state size mismatch");
  if (state.slot < 1 || state.slot > horizon)
    throw std::invalid_argument("llf_allocate_step: slot outside horizon");

  const Energy slots_left = static_cast<Energy>(horizon - state.slot + 1);
  std::vector<std::size_t> candidates;
  for (std::size_t j = 0; j < durations.size(); ++j)
    if (durations[j] - state.served[j] > 0) candidates.push_back(j);
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    const Energy lax_a = slots_left - (durations[a] - state.served[a]);
    const Energy lax_b = slots_left - (durations[b] - state.served[b]);
    return lax_a < lax_b;
  });

  LlfStep step{state, std::vector<Energy>(durations.size(), 0)};
  const Energy serve = std::min<Energy>(available, static_cast<Energy>(candidates.size()));
  for (Energy i = 0; i < serve; ++i) {
    const std::size_t j = candidates[static_cast<std::size_t>(i)];
    step.column[j] = 1;
    step.state.served[j] += 1;
  }
  step.state.slot += 1;
  return step;
}

struct LlfResult {
  AllocationMatrix allocation;
  bool complete = false;
  std::vector<std::size_t> unmet_rows;
  std::size_t failing_tail_start = 0;  // 1-based; 0 when complete
};

/// Sequential least-laxity-first allocation over the whole horizon.  The
/// decision at slot t reads only supply[0..t-1], so the allocator is
/// causal.  An inadequate supply is still allocated as far as possible;
/// the result then lists the rows left unserved and the start of the
/// worst tail deficit.
inline LlfResult llf_allocate(const std::vector<Energy>& durations, const EnergyVector& supply) {
  const std::size_t horizon = supply.size();
  for (Energy e : durations)
    if (e < 0 || e > static_cast<Energy>(horizon))
      throw std::invalid_argument("llf_allocate: duration outside [0, horizon]");

  LlfResult result;
  result.allocation.durations = durations;
  result.allocation.horizon = horizon;
  result.allocation.nu.assign(durations.size(), std::vector<Energy>(horizon, 0));

  LaxityState state{std::vector<Energy>(durations.size(), 0), 1};
  for (std::size_t t = 0; t < horizon; ++t) {
    LlfStep step = llf_allocate_step(state, durations, horizon, supply[t]);
    for (std::size_t j = 0; j < durations.size(); ++j)
      result.allocation.nu[j][t] = step.column[j];
    state = std::move(step.state);
  }

  for (std::size_t j = 0; j < durations.size(); ++j)
    if (state.served[j] != durations[j]) result.unmet_rows.push_back(j);
  result.complete = result.unmet_rows.empty();
  if (!result.complete) {
    const DemandDuration d = demand_duration_of(durations, horizon);
    result.failing_tail_start = worst_tail_start(d, supply);
    if (is_adequate(d, supply))
      throw std::logic_error("llf_allocate: adequate supply left rows unserved");
  }
  return result;
}

}  // namespace ratecon

#endif
