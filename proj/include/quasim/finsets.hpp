#pragma once

#include <vector>
#include <cstdint>

namespace quasim {

// Nonempty finite set of integers, kept sorted and duplicate-free.
// These sets index the sign-character sectors of the model space; the two
// index surgeries `hat` and `tilde` track how coordinate deletion rewrites
// a sector label, and `shift`/`canonical_rep` handle translation classes.
class FinSet {
public:
  explicit FinSet(std::vector<long> elems);   // throws if empty

  const std::vector<long>& elems() const { return elems_; }
  long min() const { return elems_.front(); }
  long max() const { return elems_.back(); }
  std::size_t size() const { return elems_.size(); }
  bool contains(long t) const;

  bool operator==(const FinSet& o) const { return elems_ == o.elems_; }
  bool operator!=(const FinSet& o) const { return !(*this == o); }

private:
  std::vector<long> elems_;
};

// hat(A): keep s <= 0, send s > 0 to s+1.  Opens a gap at position 1.
FinSet hat(const FinSet& a);

// tilde(B): keep s <= 0, send s > 1 to s-1.  Requires 1 not in B; closes the
// gap hat opened.  Throws otherwise.
FinSet tilde(const FinSet& b);

FinSet shift(const FinSet& a, long n);

// Translate so the minimum sits at 0 (class representatives with min zero).
FinSet canonical_rep(const FinSet& a);

// Same translation class?
bool are_equivalent(const FinSet& a, const FinSet& b);

}  // namespace quasim
