#ifndef RATECON_MAJORIZATION_HPP
#define RATECON_MAJORIZATION_HPP

#include <algorithm>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ratecon/core.hpp"

namespace ratecon {

/// Non-increasing rearrangement.  Equal entries keep their original
/// relative order, so traces are deterministic.
inline EnergyVector sort_nonincreasing(const EnergyVector& v) {
  std::vector<Energy> s = v.values();
  std::stable_sort(s.begin(), s.end(), std::greater<Energy>());
  return EnergyVector(std::move(s));
}

namespace detail {

// tails[t] = sum of entries t..T-1 of the non-increasing rearrangement.
inline std::vector<Energy> sorted_tail_sums(const EnergyVector& v) {
  const EnergyVector s = sort_nonincreasing(v);
  std::vector<Energy> tails(s.size());
  Energy acc = 0;
  for (std::size_t i = s.size(); i-- > 0;) {
    acc += s[i];
    tails[i] = acc;
  }
  return tails;
}

inline void require_same_length(const EnergyVector& a, const EnergyVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("majorization: length mismatch");
}

}  // namespace detail

/// Tail-sum order between the non-increasing rearrangements: every tail
/// sum of a is at most the matching tail sum of b.  With a as demand and
/// b as supply this reads "demand fits within supply".
inline bool weakly_majorizes(const EnergyVector& a, const EnergyVector& b) {
  detail::require_same_length(a, b);
  const auto ta = detail::sorted_tail_sums(a);
  const auto tb = detail::sorted_tail_sums(b);
  for (std::size_t t = 0; t < ta.size(); ++t)
    if (ta[t] > tb[t]) return false;
  return true;
}

/// Tail-sum order plus equal totals ("demand fits supply exactly").
inline bool majorizes(const EnergyVector& a, const EnergyVector& b) {
  detail::require_same_length(a, b);
  return a.total() == b.total() && weakly_majorizes(a, b);
}

/// One-unit transfer from a larger entry to a smaller one.  Indices refer
/// to positions in the sorted vector at the moment the transfer applies.
struct RHTransfer {
  std::size_t from = 0;
  std::size_t to = 0;
};

/// Moves one unit from `t.from` to `t.to` and restores non-increasing
/// order.  The source entry must strictly exceed the destination entry
/// and the input must already be sorted.
inline EnergyVector apply_rh_transfer(const EnergyVector& sorted, RHTransfer t) {
  const std::size_t n = sorted.size();
  if (t.from >= n || t.to >= n || t.from == t.to)
    throw std::invalid_argument("apply_rh_transfer: index out of range");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (sorted[i] < sorted[i + 1])
      throw std::invalid_argument("apply_rh_transfer: input not sorted non-increasing");
  if (sorted[t.from] <= sorted[t.to])
    throw std::invalid_argument("apply_rh_transfer: source must strictly exceed destination");
  std::vector<Energy> out = sorted.values();
  out[t.from] -= 1;
  out[t.to] += 1;
  std::stable_sort(out.begin(), out.end(), std::greater<Energy>());
  return EnergyVector(std::move(out));
}

/// Transfer chain from a down to b, defined whenever majorizes(a, b).
/// Replaying the transfers on the sorted a reproduces the sorted b, and
/// every intermediate vector sits between the two in majorization order.
/// Each step moves one unit from the first entry that differs from the
/// target to the first later entry at least two units below it.
inline std::vector<RHTransfer> rh_transfer_sequence(const EnergyVector& a, const EnergyVector& b) {
  if (!majorizes(a, b))
    throw std::invalid_argument("rh_transfer_sequence: first argument must majorize second");
  EnergyVector cur = sort_nonincreasing(a);
  const EnergyVector target = sort_nonincreasing(b);
  std::vector<RHTransfer> seq;

  // Termination: each transfer strictly advances cur in majorization
  // order and the chain of distinct integer vectors below target is finite.
  const std::size_t hard_cap = 1u << 20;
  while (!(cur == target)) {
    std::size_t from = 0;
    while (cur[from] == target[from]) ++from;
    std::size_t to = from + 1;
    while (to < cur.size() && cur[from] - cur[to] <= 1) ++to;
    if (to >= cur.size())
      throw std::logic_error("rh_transfer_sequence: no admissible transfer found");
    seq.push_back({from, to});
    cur = apply_rh_transfer(cur, seq.back());
    if (seq.size() > hard_cap)
      throw std::logic_error("rh_transfer_sequence: transfer chain did not terminate");
  }
  return seq;
}

}  // namespace ratecon

#endif
