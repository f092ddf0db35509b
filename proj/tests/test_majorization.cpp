#include <algorithm>
#include <functional>
#include <vector>

#include "doctest.h"
#include "ratecon/majorization.hpp"

using namespace ratecon;

namespace {

EnergyVector ev(std::vector<Energy> v) { return EnergyVector(std::move(v)); }

// All vectors of the given length with entries in [0, max_entry].
void for_each_vector(std::size_t len, Energy max_entry,
                     const std::function<void(const EnergyVector&)>& f) {
  std::vector<Energy> v(len, 0);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == len) {
      f(EnergyVector(v));
      return;
    }
    for (Energy x = 0; x <= max_entry; ++x) {
      v[i] = x;
      rec(i + 1);
    }
  };
  rec(0);
}

}  // namespace

TEST_CASE("sort_nonincreasing orders and conserves entries") {
  CHECK(sort_nonincreasing(ev({0, 1, 2})) == ev({2, 1, 0}));
  CHECK(sort_nonincreasing(ev({3, 3, 3})) == ev({3, 3, 3}));
  CHECK(sort_nonincreasing(ev({1, 0, 2, 2})) == ev({2, 2, 1, 0}));

  for_each_vector(4, 3, [](const EnergyVector& v) {
    const EnergyVector s = sort_nonincreasing(v);
    CHECK(sort_nonincreasing(s) == s);  // idempotent
    auto a = v.values();
    auto b = s.values();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);  // same multiset
  });
}

TEST_CASE("majorization predicates") {
  CHECK(majorizes(ev({3, 2, 1}), ev({2, 2, 2})));
  CHECK_FALSE(majorizes(ev({2, 2, 2}), ev({3, 2, 1})));
  CHECK(majorizes(ev({1, 1}), ev({1, 1})));

  CHECK(weakly_majorizes(ev({3, 2, 1}), ev({3, 3, 3})));
  CHECK_FALSE(weakly_majorizes(ev({2, 0}), ev({1, 0})));

  CHECK_THROWS_AS((void)majorizes(ev({1}), ev({1, 1})), std::invalid_argument);
}

TEST_CASE("majorization is a partial order on sorted vectors") {
  // Reflexive, antisymmetric up to rearrangement, transitive; checked by
  // enumeration over short vectors.
  std::vector<EnergyVector> all;
  for_each_vector(3, 3, [&](const EnergyVector& v) { all.push_back(v); });

  for (const auto& a : all) CHECK(majorizes(a, a));

  for (const auto& a : all)
    for (const auto& b : all) {
      if (majorizes(a, b) && majorizes(b, a))
        CHECK(sort_nonincreasing(a) == sort_nonincreasing(b));
      if (!weakly_majorizes(a, b)) continue;
      for (const auto& c : all)
        if (weakly_majorizes(b, c)) CHECK(weakly_majorizes(a, c));
    }
}

TEST_CASE("apply_rh_transfer examples") {
  CHECK(apply_rh_transfer(ev({3, 1}), {0, 1}) == ev({2, 2}));
  CHECK(apply_rh_transfer(ev({3, 2, 1}), {0, 2}) == ev({2, 2, 2}));
  CHECK_THROWS_AS(apply_rh_transfer(ev({2, 2}), {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(apply_rh_transfer(ev({1, 3}), {1, 0}), std::invalid_argument);  // unsorted
}

TEST_CASE("every transfer image is majorized by its pre-image") {
  for_each_vector(4, 4, [](const EnergyVector& raw) {
    const EnergyVector a = sort_nonincreasing(raw);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j) {
        if (i == j || a[i] <= a[j]) continue;
        CHECK(majorizes(a, apply_rh_transfer(a, {i, j})));
      }
  });
}

TEST_CASE("rh_transfer_sequence examples") {
  const auto seq = rh_transfer_sequence(ev({3, 2, 1}), ev({2, 2, 2}));
  REQUIRE(seq.size() == 1);
  CHECK(seq[0].from == 0);
  CHECK(seq[0].to == 2);

  CHECK(rh_transfer_sequence(ev({2, 1}), ev({2, 1})).empty());

  const auto two = rh_transfer_sequence(ev({4, 0}), ev({2, 2}));
  REQUIRE(two.size() == 2);
  for (const auto& t : two) {
    CHECK(t.from == 0);
    CHECK(t.to == 1);
  }

  CHECK_THROWS_AS(rh_transfer_sequence(ev({2, 2}), ev({3, 1})), std::invalid_argument);
}

TEST_CASE("transfer chains replay exactly and stay sandwiched") {
  std::vector<EnergyVector> all;
  for_each_vector(4, 3, [&](const EnergyVector& v) { all.push_back(sort_nonincreasing(v)); });

  for (const auto& a : all)
    for (const auto& b : all) {
      if (!majorizes(a, b)) continue;
      const auto seq = rh_transfer_sequence(a, b);
      EnergyVector cur = sort_nonincreasing(a);
      for (const auto& t : seq) {
        cur = apply_rh_transfer(cur, t);
        CHECK(majorizes(a, cur));
        CHECK(majorizes(cur, b));
      }
      CHECK(cur == sort_nonincreasing(b));
    }
}

TEST_CASE("flat-top majorizing pairs with a shared prefix coincide") {
  // If a majorizes b, both sorted, a and b agree before index t, and
  // a_t - a_T <= 1, the vectors must be equal.
  std::vector<EnergyVector> all;
  for_each_vector(4, 3, [&](const EnergyVector& v) { all.push_back(sort_nonincreasing(v)); });

  for (const auto& a : all)
    for (const auto& b : all) {
      if (!majorizes(a, b)) continue;
      for (std::size_t t = 0; t < a.size(); ++t) {
        bool shared_prefix = true;
        for (std::size_t j = 0; j < t; ++j)
          if (a[j] != b[j]) shared_prefix = false;
        if (shared_prefix && a[t] - a[a.size() - 1] <= 1) CHECK(a == b);
      }
    }
}
