#pragma once

#include <vector>

#include "quasim/core.hpp"

namespace quasim {

// Closed integer interval [lo, hi].
struct IndexWindow {
  long lo = 0;
  long hi = 0;
  long size() const { return hi - lo + 1; }
  bool contains(long k) const { return lo <= k && k <= hi; }
};

// Two-sided weight sequence supported on [-half_width, half_width].
class WeightSequence {
public:
  WeightSequence(long half_width, std::vector<double> values);

  long half_width() const { return k_; }
  // a(n); zero outside the support window.
  double a(long n) const {
    return (n < -k_ || n > k_) ? 0.0 : v_[std::size_t(n + k_)];
  }
  const std::vector<double>& values() const { return v_; }
  double sum() const;  // compensated

private:
  long k_;
  std::vector<double> v_;  // v_[n + k_]
};

// The convolution kernel's generator: f(x) = exp(2 - 1/|x - 1/2|) with
// f(1/2) = 0, extended 1-periodically.  f(0) = 1, symmetric about 1/2,
// smooth except for the derivative corner at integers.
double eval_f(double x);

// Cosine coefficients a_n = integral of f(x) cos(2 pi n x) over [0,1] for
// |n| <= k, by periodic trapezoid sums at `resolution` and 2*`resolution`
// points.  The two resolutions must agree to agreement_tol per coefficient,
// otherwise throws (message carries the worst index).  resolution must be a
// power of two >= 4096.  Returns the finer-resolution values (unnormalized).
WeightSequence fourier_coefficients(long k, long resolution,
                                    double agreement_tol = 1e-10);

// Rescale so the total mass is exactly 1 at working precision.
WeightSequence normalize(const WeightSequence& w);

// One-sided geometric weights a_n = 2^{-(n+1)} for 0 <= n <= k, zero for
// n < 0, stored in the symmetric window.  Total mass 1 - 2^{-(k+1)}:
// deliberately NOT rescaled.
WeightSequence geometric_weights(long k);

// Matrix of x |-> (a * x) mapping sequences supported on in_window to values
// read on out_window; entry (k, j) = a(k - j).  out_window must contain
// in_window dilated by half_width.
RealMatrix convolution_operator(const WeightSequence& w,
                                const IndexWindow& in_window,
                                const IndexWindow& out_window);

// Smallest singular value of the convolution operator from sequences
// supported on [-m, m], read on rows [-m-K, m+K] minus `forbidden`.
// A positive value certifies: no nonzero sequence on [-m, m] convolves to
// something supported inside `forbidden`.
double injectivity_margin(const WeightSequence& w, long m,
                          const std::vector<long>& forbidden = {});

}  // namespace quasim
