#include "quasim/finsets.hpp"

#include <algorithm>
#include <stdexcept>

namespace quasim {

FinSet::FinSet(std::vector<long> elems) : elems_(std::move(elems)) {
  if (elems_.empty()) throw std::invalid_argument("FinSet: empty set");
  std::sort(elems_.begin(), elems_.end());
  elems_.erase(std::unique(elems_.begin(), elems_.end()), elems_.end());
}

bool FinSet::contains(long t) const {
  return std::binary_search(elems_.begin(), elems_.end(), t);
}

FinSet hat(const FinSet& a) {
  std::vector<long> out;
  out.reserve(a.size());
  for (long s : a.elems()) out.push_back(s <= 0 ? s : s + 1);
  return FinSet(std::move(out));
}

FinSet tilde(const FinSet& b) {
  if (b.contains(1))
    throw std::invalid_argument("tilde: set contains 1");
  std::vector<long> out;
  out.reserve(b.size());
  for (long s : b.elems()) out.push_back(s <= 0 ? s : s - 1);
  return FinSet(std::move(out));
}

FinSet shift(const FinSet& a, long n) {
  std::vector<long> out;
  out.reserve(a.size());
  for (long s : a.elems()) out.push_back(s + n);
  return FinSet(std::move(out));
}

FinSet canonical_rep(const FinSet& a) { return shift(a, -a.min()); }

bool are_equivalent(const FinSet& a, const FinSet& b) {
  return canonical_rep(a) == canonical_rep(b);
}

}  // namespace quasim
