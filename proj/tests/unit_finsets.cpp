#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "quasim/finsets.hpp"
#include "quasim/rng.hpp"

using namespace quasim;

namespace {

FinSet make(std::vector<long> v) { return FinSet(std::move(v)); }

// random nonempty subset of [lo, hi]
FinSet random_set(Rng& rng, long lo, long hi) {
  std::vector<long> v;
  for (long t = lo; t <= hi; ++t)
    if (rng.uniform() < 0.4) v.push_back(t);
  if (v.empty()) v.push_back(lo + long(rng.below(std::uint64_t(hi - lo + 1))));
  return FinSet(std::move(v));
}

}  // namespace

TEST_CASE("constructor sorts, deduplicates, rejects empty") {
  FinSet a({3, -1, 3, 0});
  CHECK(a.elems() == std::vector<long>{-1, 0, 3});
  CHECK(a.min() == -1);
  CHECK(a.max() == 3);
  CHECK(a.size() == 3);
  CHECK(a.contains(0));
  CHECK(!a.contains(1));
  CHECK_THROWS_AS(FinSet({}), std::invalid_argument);
}

TEST_CASE("hat keeps nonpositives and opens a gap at 1") {
  CHECK(hat(make({-2, 1, 3})) == make({-2, 2, 4}));
  CHECK(hat(make({0})) == make({0}));
  CHECK(hat(make({1})) == make({2}));
  // 1 is never in the image
  Rng rng(11);
  for (int t = 0; t < 200; ++t) CHECK(!hat(random_set(rng, -6, 6)).contains(1));
}

TEST_CASE("tilde closes the gap and rejects sets containing 1") {
  CHECK(tilde(make({-2, 2, 4})) == make({-2, 1, 3}));
  CHECK(tilde(make({0})) == make({0}));
  CHECK(tilde(make({2})) == make({1}));
  CHECK_THROWS_AS(tilde(make({1})), std::invalid_argument);
  CHECK_THROWS_AS(tilde(make({-1, 1, 2})), std::invalid_argument);
}

TEST_CASE("tilde-hat round trips") {
  Rng rng(7);
  for (int t = 0; t < 500; ++t) {
    FinSet a = random_set(rng, -6, 6);
    CHECK(tilde(hat(a)) == a);
    FinSet b = hat(a);  // guaranteed 1-free
    CHECK(hat(tilde(b)) == b);
  }
}

TEST_CASE("shift and canonical representatives") {
  CHECK(shift(make({-1, 2}), 3) == make({2, 5}));
  CHECK(shift(make({0}), -4) == make({-4}));
  CHECK(canonical_rep(make({3, 5})) == make({0, 2}));
  CHECK(canonical_rep(make({-2, 0})) == make({0, 2}));
  CHECK(are_equivalent(make({3, 5}), make({-2, 0})));
  CHECK(!are_equivalent(make({3, 5}), make({0, 3})));
  Rng rng(13);
  for (int t = 0; t < 200; ++t) {
    FinSet a = random_set(rng, -6, 6);
    long n = long(rng.below(9)) - 4;
    CHECK(are_equivalent(a, shift(a, n)));
    CHECK(shift(shift(a, n), -n) == a);
    CHECK(canonical_rep(a).min() == 0);
  }
}

TEST_CASE("deletion bookkeeping: sources of a sector under the shifted gap") {
  // For every target B and shift n: a set A with shift(hat(A), n) = B exists
  // iff n+1 is not in B, and then A = tilde(shift(B, -n)) is the unique one.
  Rng rng(17);
  for (int t = 0; t < 400; ++t) {
    FinSet b = random_set(rng, -6, 6);
    for (long n = -4; n <= 4; ++n) {
      if (b.contains(n + 1)) {
        CHECK_THROWS_AS(tilde(shift(b, -n)), std::invalid_argument);
      } else {
        FinSet a = tilde(shift(b, -n));
        CHECK(shift(hat(a), n) == b);
      }
    }
  }
}
