#ifndef RATECON_CORE_HPP
#define RATECON_CORE_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ratecon {

/// Discrete energy amount (multiples of the market's basic unit).
using Energy = std::int64_t;

/// Malformed input: bad file contents, inconsistent horizons, missing
/// required configuration.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A service cannot be delivered within its horizon (E > m*T).
struct InfeasibleError : std::runtime_error {
  InfeasibleError(std::size_t index, const std::string& what)
      : std::runtime_error(what), service_index(index) {}
  std::size_t service_index;
};

/// Per-slot energy amounts over the planning horizon.  Entries are
/// non-negative; the total must fit the Energy accumulator.
class EnergyVector {
 public:
  EnergyVector() = default;

  explicit EnergyVector(std::vector<Energy> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("EnergyVector: must have at least one slot");
    for (Energy v : values_) {
      if (v < 0) throw std::invalid_argument("EnergyVector: negative entry");
      if (total_ > std::numeric_limits<Energy>::max() - v)
        throw std::invalid_argument("EnergyVector: total overflows accumulator");
      total_ += v;
    }
  }

  static EnergyVector zeros(std::size_t n) { return EnergyVector(std::vector<Energy>(n, 0)); }

  std::size_t size() const noexcept { return values_.size(); }
  Energy operator[](std::size_t i) const { return values_[i]; }
  const std::vector<Energy>& values() const noexcept { return values_; }
  Energy total() const noexcept { return total_; }

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  friend bool operator==(const EnergyVector& a, const EnergyVector& b) {
    return a.values_ == b.values_;
  }

 private:
  std::vector<Energy> values_;
  Energy total_ = 0;
};

inline EnergyVector operator+(const EnergyVector& a, const EnergyVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("EnergyVector: length mismatch");
  std::vector<Energy> sum(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) sum[i] = a[i] + b[i];
  return EnergyVector(std::move(sum));
}

}  // namespace ratecon

#endif
