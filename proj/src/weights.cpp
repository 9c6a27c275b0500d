#include "quasim/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace quasim {

namespace {

double kahan_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

bool is_pow2(long r) { return r > 0 && (r & (r - 1)) == 0; }

// One-sided coefficients a_0..a_k at a single resolution.
std::vector<double> trapezoid_coefficients(long k, long r) {
  std::vector<double> f(static_cast<std::size_t>(r));
  for (long j = 0; j < r; ++j) f[std::size_t(j)] = eval_f(double(j) / double(r));
  std::vector<double> cos_tab(static_cast<std::size_t>(r));
  for (long t = 0; t < r; ++t)
    cos_tab[std::size_t(t)] =
        std::cos(2.0 * std::numbers::pi * double(t) / double(r));
  std::vector<double> a(std::size_t(k + 1));
  for (long n = 0; n <= k; ++n) {
    double s = 0.0, c = 0.0;  // compensated accumulation
    for (long j = 0; j < r; ++j) {
      const double x = f[std::size_t(j)] * cos_tab[std::size_t((n * j) % r)];
      const double y = x - c;
      const double t = s + y;
      c = (t - s) - y;
      s = t;
    }
    a[std::size_t(n)] = s / double(r);
  }
  return a;
}

}  // namespace

WeightSequence::WeightSequence(long half_width, std::vector<double> values)
    : k_(half_width), v_(std::move(values)) {
  if (k_ < 0) throw std::invalid_argument("WeightSequence: negative width");
  if (long(v_.size()) != 2 * k_ + 1)
    throw std::invalid_argument("WeightSequence: wrong value count");
  for (double x : v_)
    if (!std::isfinite(x))
      throw std::invalid_argument("WeightSequence: non-finite value");
}

double WeightSequence::sum() const { return kahan_sum(v_); }

double eval_f(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("eval_f: non-finite x");
  x -= std::floor(x);  // 1-periodic
  const double d = std::abs(x - 0.5);
  if (d == 0.0) return 0.0;
  return std::exp(2.0 - 1.0 / d);
}

WeightSequence fourier_coefficients(long k, long resolution,
                                    double agreement_tol) {
  if (k < 0) throw std::invalid_argument("fourier_coefficients: k < 0");
  if (!is_pow2(resolution) || resolution < 4096)
    throw std::invalid_argument(
        "fourier_coefficients: resolution must be a power of two >= 4096");
  if (k >= resolution / 4)
    throw std::invalid_argument("fourier_coefficients: k too large for resolution");

  std::vector<double> coarse = trapezoid_coefficients(k, resolution);
  std::vector<double> fine = trapezoid_coefficients(k, 2 * resolution);
  long worst = 0;
  double worst_dev = 0.0;
  for (long n = 0; n <= k; ++n) {
    const double dev = std::abs(fine[std::size_t(n)] - coarse[std::size_t(n)]);
    if (dev > worst_dev) {
      worst_dev = dev;
      worst = n;
    }
  }
  if (worst_dev > agreement_tol)
    throw std::runtime_error(
        "fourier_coefficients: resolutions disagree at n=" +
        std::to_string(worst) + " by " + std::to_string(worst_dev) +
        "; raise the resolution");

  std::vector<double> v(std::size_t(2 * k + 1));
  for (long n = -k; n <= k; ++n)
    v[std::size_t(n + k)] = fine[std::size_t(std::labs(n))];
  return WeightSequence(k, std::move(v));
}

WeightSequence normalize(const WeightSequence& w) {
  const double s = w.sum();
  if (!(s > 0.0))
    throw std::invalid_argument("normalize: total mass not positive");
  std::vector<double> v = w.values();
  for (double& x : v) x /= s;
  // One compensated correction pass so the mass is 1 to the last bit.
  const double resid = kahan_sum(v) - 1.0;
  v[std::size_t(w.half_width())] -= resid;
  return WeightSequence(w.half_width(), std::move(v));
}

WeightSequence geometric_weights(long k) {
  if (k < 0) throw std::invalid_argument("geometric_weights: k < 0");
  std::vector<double> v(std::size_t(2 * k + 1), 0.0);
  for (long n = 0; n <= k; ++n)
    v[std::size_t(n + k)] = std::ldexp(1.0, int(-(n + 1)));
  return WeightSequence(k, std::move(v));
}

RealMatrix convolution_operator(const WeightSequence& w,
                                const IndexWindow& in_window,
                                const IndexWindow& out_window) {
  const long k = w.half_width();
  if (in_window.size() <= 0)
    throw std::invalid_argument("convolution_operator: empty input window");
  if (out_window.lo > in_window.lo - k || out_window.hi < in_window.hi + k)
    throw std::invalid_argument(
        "convolution_operator: output window must contain the dilated input");
  RealMatrix m = RealMatrix::Zero(out_window.size(), in_window.size());
  for (long row = out_window.lo; row <= out_window.hi; ++row)
    for (long col = in_window.lo; col <= in_window.hi; ++col)
      if (std::labs(row - col) <= k)
        m(row - out_window.lo, col - in_window.lo) = w.a(row - col);
  return m;
}

double injectivity_margin(const WeightSequence& w, long m,
                          const std::vector<long>& forbidden) {
  if (m < 0) throw std::invalid_argument("injectivity_margin: m < 0");
  const long k = w.half_width();
  const IndexWindow in{-m, m}, out{-m - k, m + k};
  RealMatrix full = convolution_operator(w, in, out);
  std::vector<long> keep;
  for (long row = out.lo; row <= out.hi; ++row)
    if (std::find(forbidden.begin(), forbidden.end(), row) == forbidden.end())
      keep.push_back(row - out.lo);
  if (keep.empty())
    throw std::invalid_argument("injectivity_margin: no rows left");
  if (long(keep.size()) < in.size()) return 0.0;  // cannot be injective
  RealMatrix sub(keep.size(), full.cols());
  for (std::size_t i = 0; i < keep.size(); ++i)
    sub.row(Eigen::Index(i)) = full.row(keep[i]);
  return smallest_singular_value(sub.cast<Complex>());
}

}  // namespace quasim
