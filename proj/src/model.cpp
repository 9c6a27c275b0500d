#include "quasim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "quasim/rng.hpp"

namespace quasim {

namespace {

long mod(long v, long n) { return ((v % n) + n) % n; }

std::vector<Complex> omega_table(long n) {
  std::vector<Complex> w(static_cast<std::size_t>(n));
  for (long r = 0; r < n; ++r)
    w[std::size_t(r)] = std::polar(1.0, 2.0 * M_PI * double(r) / double(n));
  return w;
}

std::vector<long> mask_elements(SectorMask m, long window) {
  std::vector<long> out;
  for (long t = -window; t <= window; ++t)
    if (m & (SectorMask(1) << (t + window))) out.push_back(t);
  return out;
}

// encode a set of positions, or -1 if any falls outside the window
long encode_elements(const std::vector<long>& elems, long window) {
  SectorMask m = 0;
  for (long t : elems) {
    if (t < -window || t > window) return -1;
    m |= SectorMask(1) << (t + window);
  }
  return long(m);
}

// diagonal block diag_j(omega^{j*r})
Operator phase_diag(long n, const std::vector<Complex>& omega, long r) {
  Operator d = Operator::Zero(n, n);
  for (long j = 0; j < n; ++j) d(j, j) = omega[std::size_t(mod(j * r, n))];
  return d;
}

void fwht(Complex* v, long len) {
  for (long h = 1; h < len; h <<= 1)
    for (long i = 0; i < len; i += h << 1)
      for (long k = i; k < i + h; ++k) {
        Complex a = v[k];
        Complex b = v[k + h];
        v[k] = a + b;
        v[k + h] = a - b;
      }
}

}  // namespace

void ModelConfig::validate() const {
  if (n_base < 1) throw std::invalid_argument("base cycle must be nonempty");
  if (std::gcd(mod(stride, n_base), n_base) != 1)
    throw std::invalid_argument("stride must be coprime to the base length");
  if (long(phi.size()) != n_base)
    throw std::invalid_argument("cocycle must have one value per base point");
  for (int v : phi)
    if (v != 0 && v != 1)
      throw std::invalid_argument("cocycle values must be 0 or 1");
  if (window < 1 || window_bits() > 24)
    throw std::invalid_argument("window out of range");
  if (half_width < 0 || half_width >= window)
    throw std::invalid_argument("half width must lie inside the window");
  if (safe_margin < half_width + 1 || safe_margin > window)
    throw std::invalid_argument(
        "safe margin must cover the half width and fit the window");
}

namespace {

void check_grid_size(const ModelConfig& cfg) {
  if (cfg.dim() > (1L << 22)) throw std::invalid_argument("grid too large");
}

}  // namespace

SectorMask mask_from_set(const FinSet& a, long window) {
  long m = encode_elements(a.elems(), window);
  if (m < 0) throw std::invalid_argument("set does not fit the window");
  return SectorMask(m);
}

FinSet set_from_mask(SectorMask m, long window) {
  auto elems = mask_elements(m, window);
  return FinSet(elems);  // throws on empty
}

long hat_shift_mask(SectorMask a, long n, long window) {
  std::vector<long> out;
  for (long t : mask_elements(a, window))
    out.push_back((t <= 0 ? t : t + 1) + n);
  return encode_elements(out, window);
}

long tilde_shift_mask(SectorMask b, long n, long window) {
  std::vector<long> out;
  for (long t : mask_elements(b, window)) {
    long s = t - n;
    if (s == 1) return -1;
    out.push_back(s > 1 ? s - 1 : s);
  }
  return encode_elements(out, window);
}

long shift_sector_mask(SectorMask a, long n, long window) {
  std::vector<long> out;
  for (long t : mask_elements(a, window)) out.push_back(t + n);
  return encode_elements(out, window);
}

CharOperator::CharOperator(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.sector_count() > (1L << 16))
    throw std::invalid_argument("sector table too large");
  edges_.resize(std::size_t(cfg_.sector_count()));
}

void CharOperator::add_edge(long src_sector, long dst_sector,
                            const Operator& block) {
  long s = cfg_.sector_count();
  if (src_sector < 0 || src_sector >= s || dst_sector < 0 || dst_sector >= s)
    throw std::out_of_range("sector index");
  if (block.rows() != cfg_.n_base || block.cols() != cfg_.n_base)
    throw std::invalid_argument("block must be N x N");
  auto& m = edges_[std::size_t(src_sector)];
  auto it = m.find(dst_sector);
  if (it == m.end())
    m.emplace(dst_sector, block);
  else
    it->second += block;
}

void CharOperator::add_scaled(const CharOperator& other, Complex factor) {
  if (other.dim() != dim())
    throw std::invalid_argument("dimension mismatch");
  for (long src = 0; src < cfg_.sector_count(); ++src)
    for (const auto& [dst, block] : other.edges_from(src))
      add_edge(src, dst, (factor * block).eval());
}

Vec CharOperator::apply(const Vec& x) const {
  if (x.size() != dim()) throw std::invalid_argument("dimension mismatch");
  long n = cfg_.n_base;
  Vec y = Vec::Zero(dim());
  for (long src = 0; src < cfg_.sector_count(); ++src) {
    const auto& m = edges_[std::size_t(src)];
    if (m.empty()) continue;
    auto xs = x.segment(src * n, n);
    for (const auto& [dst, block] : m) y.segment(dst * n, n) += block * xs;
  }
  return y;
}

Vec CharOperator::apply_adjoint(const Vec& x) const {
  if (x.size() != dim()) throw std::invalid_argument("dimension mismatch");
  long n = cfg_.n_base;
  Vec y = Vec::Zero(dim());
  for (long src = 0; src < cfg_.sector_count(); ++src)
    for (const auto& [dst, block] : edges_[std::size_t(src)])
      y.segment(src * n, n) += block.adjoint() * x.segment(dst * n, n);
  return y;
}

CharOperator CharOperator::adjointed() const {
  CharOperator out(cfg_);
  for (long src = 0; src < cfg_.sector_count(); ++src)
    for (const auto& [dst, block] : edges_[std::size_t(src)])
      out.add_edge(dst, src, block.adjoint());
  return out;
}

CharOperator CharOperator::composed_with(const CharOperator& inner) const {
  if (inner.dim() != dim()) throw std::invalid_argument("dimension mismatch");
  CharOperator out(cfg_);
  for (long src = 0; src < cfg_.sector_count(); ++src)
    for (const auto& [mid, b1] : inner.edges_from(src))
      for (const auto& [dst, b2] : edges_[std::size_t(mid)])
        out.add_edge(src, dst, (b2 * b1).eval());
  return out;
}

bool CharOperator::frequency_diagonal() const {
  for (const auto& m : edges_)
    for (const auto& [dst, block] : m) {
      (void)dst;
      for (long r = 0; r < block.rows(); ++r)
        for (long c = 0; c < block.cols(); ++c)
          if (r != c && block(r, c) != Complex(0.0, 0.0)) return false;
    }
  return true;
}

Operator CharOperator::frequency_block(long j) const {
  long s = cfg_.sector_count();
  if (j < 0 || j >= cfg_.n_base) throw std::out_of_range("frequency index");
  if (s > 4096) throw std::invalid_argument("sector matrix too large");
  if (!frequency_diagonal())
    throw std::invalid_argument("operator mixes base frequencies");
  Operator b = Operator::Zero(s, s);
  for (long src = 0; src < s; ++src)
    for (const auto& [dst, block] : edges_[std::size_t(src)])
      b(dst, src) = block(j, j);
  return b;
}

Operator CharOperator::dense() const {
  if (dim() > 4096) throw std::invalid_argument("dense form too large");
  long n = cfg_.n_base;
  Operator d = Operator::Zero(dim(), dim());
  for (long src = 0; src < cfg_.sector_count(); ++src)
    for (const auto& [dst, block] : edges_[std::size_t(src)])
      d.block(dst * n, src * n, n, n) += block;
  return d;
}

double max_entry_deviation(const CharOperator& a, const CharOperator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
  double dev = 0.0;
  long s = a.config().sector_count();
  for (long src = 0; src < s; ++src) {
    const auto& ma = a.edges_from(src);
    const auto& mb = b.edges_from(src);
    for (const auto& [dst, block] : ma) {
      auto it = mb.find(dst);
      double d = (it == mb.end())
                     ? block.cwiseAbs().maxCoeff()
                     : (block - it->second).cwiseAbs().maxCoeff();
      dev = std::max(dev, d);
    }
    for (const auto& [dst, block] : mb)
      if (ma.find(dst) == ma.end())
        dev = std::max(dev, block.cwiseAbs().maxCoeff());
  }
  return dev;
}

// --- grid side ---------------------------------------------------------------

namespace {

// per-base-point bit-flip masks for the two skew products
std::vector<SectorMask> flip_masks(const ModelConfig& cfg, bool second) {
  std::vector<SectorMask> f(std::size_t(cfg.n_base), 0);
  for (long x = 0; x < cfg.n_base; ++x)
    for (long t = -cfg.window; t <= cfg.window; ++t) {
      long shift = (second && t >= 1) ? t + 1 : t;
      if (cfg.phi[std::size_t(mod(x + shift * cfg.stride, cfg.n_base))])
        f[std::size_t(x)] |= SectorMask(1) << (t + cfg.window);
    }
  return f;
}

std::vector<long> skew_map(const ModelConfig& cfg, bool second) {
  cfg.validate();
  check_grid_size(cfg);
  long s = cfg.sector_count();
  auto f = flip_masks(cfg, second);
  std::vector<long> map(std::size_t(cfg.dim()));
  for (long x = 0; x < cfg.n_base; ++x) {
    long xn = mod(x + 1, cfg.n_base);
    for (long bits = 0; bits < s; ++bits)
      map[std::size_t(x * s + bits)] =
          xn * s + long(SectorMask(bits) ^ f[std::size_t(x)]);
  }
  return map;
}

// reading map: output coordinate t is input coordinate source(t), or reads 0
// when source(t) leaves the window
std::vector<long> reading_map(const ModelConfig& cfg, long base_step,
                              const std::vector<long>& source) {
  long s = cfg.sector_count();
  long w = cfg.window;
  std::vector<long> map(std::size_t(cfg.dim()));
  for (long bits = 0; bits < s; ++bits) {
    SectorMask nb = 0;
    for (long t = -w; t <= w; ++t) {
      long src = source[std::size_t(t + w)];
      if (src < -w || src > w) continue;
      if (SectorMask(bits) & (SectorMask(1) << (src + w)))
        nb |= SectorMask(1) << (t + w);
    }
    for (long x = 0; x < cfg.n_base; ++x)
      map[std::size_t(x * s + bits)] =
          mod(x + base_step, cfg.n_base) * s + long(nb);
  }
  return map;
}

}  // namespace

std::vector<long> grid_map_T1(const ModelConfig& cfg) {
  return skew_map(cfg, false);
}

std::vector<long> grid_map_T2(const ModelConfig& cfg) {
  return skew_map(cfg, true);
}

std::vector<long> grid_map_In(const ModelConfig& cfg, long n) {
  cfg.validate();
  check_grid_size(cfg);
  std::vector<long> source(std::size_t(cfg.window_bits()));
  for (long t = -cfg.window; t <= cfg.window; ++t)
    source[std::size_t(t + cfg.window)] = (t <= 0 ? t : t + 1) + n;
  return reading_map(cfg, cfg.stride * n, source);
}

std::vector<long> grid_map_Sbar(const ModelConfig& cfg) {
  cfg.validate();
  check_grid_size(cfg);
  std::vector<long> source(std::size_t(cfg.window_bits()));
  for (long t = -cfg.window; t <= cfg.window; ++t)
    source[std::size_t(t + cfg.window)] = t + 1;
  return reading_map(cfg, cfg.stride, source);
}

Vec compose_with_map(const std::vector<long>& map, const Vec& grid_values) {
  if (long(map.size()) != grid_values.size())
    throw std::invalid_argument("dimension mismatch");
  Vec out(grid_values.size());
  for (long p = 0; p < grid_values.size(); ++p)
    out(p) = grid_values(map[std::size_t(p)]);
  return out;
}

Vec to_grid(const ModelConfig& cfg, const Vec& coefficients) {
  cfg.validate();
  check_grid_size(cfg);
  if (coefficients.size() != cfg.dim())
    throw std::invalid_argument("dimension mismatch");
  long n = cfg.n_base;
  long s = cfg.sector_count();
  auto omega = omega_table(n);
  Vec out = Vec::Zero(cfg.dim());
  // out is laid out x * s + bits; fill with per-sector base values first
  for (long mask = 0; mask < s; ++mask) {
    auto c = coefficients.segment(mask * n, n);
    for (long x = 0; x < n; ++x) {
      Complex acc = 0.0;
      for (long j = 0; j < n; ++j) acc += c(j) * omega[std::size_t(mod(j * x, n))];
      out(x * s + mask) = acc;
    }
  }
  for (long x = 0; x < n; ++x) fwht(out.data() + x * s, s);
  return out;
}

Vec from_grid(const ModelConfig& cfg, const Vec& grid_values) {
  cfg.validate();
  check_grid_size(cfg);
  if (grid_values.size() != cfg.dim())
    throw std::invalid_argument("dimension mismatch");
  long n = cfg.n_base;
  long s = cfg.sector_count();
  auto omega = omega_table(n);
  Vec work = grid_values;
  for (long x = 0; x < n; ++x) fwht(work.data() + x * s, s);
  Vec out(cfg.dim());
  double scale = 1.0 / double(cfg.dim());
  for (long mask = 0; mask < s; ++mask)
    for (long j = 0; j < n; ++j) {
      Complex acc = 0.0;
      for (long x = 0; x < n; ++x)
        acc += work(x * s + mask) * omega[std::size_t(mod(-j * x, n))];
      out(mask * n + j) = acc * scale;
    }
  return out;
}

Vec character_values(const ModelConfig& cfg, long index) {
  cfg.validate();
  check_grid_size(cfg);
  if (index < 0 || index >= cfg.dim()) throw std::out_of_range("index");
  long n = cfg.n_base;
  long s = cfg.sector_count();
  long mask = index / n;
  long j = index % n;
  auto omega = omega_table(n);
  Vec out(cfg.dim());
  for (long x = 0; x < n; ++x) {
    Complex base = omega[std::size_t(mod(j * x, n))];
    for (long bits = 0; bits < s; ++bits) {
      int sign =
          __builtin_popcountl((unsigned long)(mask & bits)) & 1 ? -1 : 1;
      out(x * s + bits) = double(sign) * base;
    }
  }
  return out;
}

double grid_consistency_deviation(const CharOperator& op,
                                  const std::vector<long>& point_map,
                                  const std::vector<bool>* domain) {
  const ModelConfig& cfg = op.config();
  if (long(point_map.size()) != cfg.dim())
    throw std::invalid_argument("dimension mismatch");
  long n = cfg.n_base;
  double dev = 0.0;
  for (long src = 0; src < cfg.sector_count(); ++src) {
    if (domain && !(*domain)[std::size_t(src)]) continue;
    for (long j = 0; j < n; ++j) {
      Vec v = character_values(cfg, src * n + j);
      Vec c = from_grid(cfg, compose_with_map(point_map, v));
      for (const auto& [dst, block] : op.edges_from(src))
        c.segment(dst * n, n) -= block.col(j);
      dev = std::max(dev, c.cwiseAbs().maxCoeff());
    }
  }
  return dev;
}

// --- operator builders -------------------------------------------------------

namespace {

CharOperator skew_koopman(const ModelConfig& cfg, bool second) {
  CharOperator op(cfg);
  long n = cfg.n_base;
  auto omega = omega_table(n);
  auto flips = flip_masks(cfg, second);
  for (long a = 0; a < cfg.sector_count(); ++a) {
    // sign character of the bit increments seen by this sector
    std::vector<double> eps(static_cast<std::size_t>(n));
    for (long x = 0; x < n; ++x) {
      int par =
          __builtin_popcountl((unsigned long)(long(flips[std::size_t(x)]) & a)) &
          1;
      eps[std::size_t(x)] = par ? -1.0 : 1.0;
    }
    std::vector<Complex> eps_hat(std::size_t(n), 0.0);
    for (long m = 0; m < n; ++m) {
      Complex acc = 0.0;
      for (long x = 0; x < n; ++x)
        acc += eps[std::size_t(x)] * omega[std::size_t(mod(m * x, n))];
      eps_hat[std::size_t(m)] = acc / double(n);
    }
    Operator block(n, n);
    for (long j = 0; j < n; ++j)
      for (long jp = 0; jp < n; ++jp)
        block(jp, j) =
            omega[std::size_t(j)] * eps_hat[std::size_t(mod(j - jp, n))];
    op.add_edge(a, a, block);
  }
  return op;
}

}  // namespace

CharOperator koopman_T1(const ModelConfig& cfg) { return skew_koopman(cfg, false); }

CharOperator koopman_T2(const ModelConfig& cfg) { return skew_koopman(cfg, true); }

CharOperator koopman_Sbar(const ModelConfig& cfg) {
  return koopman_Sbar_pow(cfg, 1);
}

CharOperator koopman_Sbar_pow(const ModelConfig& cfg, long n) {
  CharOperator op(cfg);
  auto omega = omega_table(cfg.n_base);
  Operator d = phase_diag(cfg.n_base, omega, mod(cfg.stride * n, cfg.n_base));
  for (long a = 0; a < cfg.sector_count(); ++a) {
    long tgt = shift_sector_mask(SectorMask(a), n, cfg.window);
    if (tgt >= 0) op.add_edge(a, tgt, d);
  }
  return op;
}

CharOperator isometry_In(const ModelConfig& cfg, long n) {
  CharOperator op(cfg);
  auto omega = omega_table(cfg.n_base);
  Operator d = phase_diag(cfg.n_base, omega, mod(cfg.stride * n, cfg.n_base));
  for (long a = 0; a < cfg.sector_count(); ++a) {
    long tgt = hat_shift_mask(SectorMask(a), n, cfg.window);
    if (tgt >= 0) op.add_edge(a, tgt, d);
  }
  return op;
}

CharOperator adjoint_In(const ModelConfig& cfg, long n) {
  CharOperator op(cfg);
  auto omega = omega_table(cfg.n_base);
  Operator d = phase_diag(cfg.n_base, omega, mod(-cfg.stride * n, cfg.n_base));
  for (long b = 0; b < cfg.sector_count(); ++b) {
    long tgt = tilde_shift_mask(SectorMask(b), n, cfg.window);
    if (tgt >= 0) op.add_edge(b, tgt, d);
  }
  return op;
}

CharOperator weighted_isometry_sum(const ModelConfig& cfg,
                                   const WeightSequence& w) {
  CharOperator op(cfg);
  auto omega = omega_table(cfg.n_base);
  for (long n = -w.half_width(); n <= w.half_width(); ++n) {
    double an = w.a(n);
    if (an == 0.0) continue;
    Operator d =
        an * phase_diag(cfg.n_base, omega, mod(cfg.stride * n, cfg.n_base));
    for (long a = 0; a < cfg.sector_count(); ++a) {
      long tgt = hat_shift_mask(SectorMask(a), n, cfg.window);
      if (tgt >= 0) op.add_edge(a, tgt, d);
    }
  }
  return op;
}

CharOperator weighted_adjoint_sum(const ModelConfig& cfg,
                                  const WeightSequence& w) {
  CharOperator op(cfg);
  auto omega = omega_table(cfg.n_base);
  for (long n = -w.half_width(); n <= w.half_width(); ++n) {
    double an = w.a(n);
    if (an == 0.0) continue;
    Operator d =
        an * phase_diag(cfg.n_base, omega, mod(-cfg.stride * n, cfg.n_base));
    for (long b = 0; b < cfg.sector_count(); ++b) {
      long tgt = tilde_shift_mask(SectorMask(b), n, cfg.window);
      if (tgt >= 0) op.add_edge(b, tgt, d);
    }
  }
  return op;
}

namespace {

void check_markov_weights(const ModelConfig& cfg, const WeightSequence& w) {
  if (w.half_width() > cfg.half_width)
    throw std::invalid_argument("weight support exceeds the truncation");
  if (std::abs(w.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("weights must sum to 1");
  for (double v : w.values())
    if (v < -1e-9) throw std::invalid_argument("weights must be nonnegative");
}

}  // namespace

CharOperator markov_J(const ModelConfig& cfg, const WeightSequence& w) {
  check_markov_weights(cfg, w);
  return weighted_isometry_sum(cfg, w);
}

CharOperator markov_J_adjoint(const ModelConfig& cfg,
                              const WeightSequence& w) {
  check_markov_weights(cfg, w);
  return weighted_adjoint_sum(cfg, w);
}

Operator grid_koopman_dense(const ModelConfig& cfg,
                            const std::vector<long>& point_map) {
  cfg.validate();
  if (cfg.dim() > 4096) throw std::invalid_argument("dense form too large");
  if (long(point_map.size()) != cfg.dim())
    throw std::invalid_argument("dimension mismatch");
  std::vector<int> hit(std::size_t(cfg.dim()), 0);
  for (long t : point_map) {
    if (t < 0 || t >= cfg.dim() || hit[std::size_t(t)]++)
      throw std::invalid_argument("point map is not a bijection");
  }
  Operator u = Operator::Zero(cfg.dim(), cfg.dim());
  for (long p = 0; p < cfg.dim(); ++p) u(p, point_map[std::size_t(p)]) = 1.0;
  return u;
}

// --- sector filters ----------------------------------------------------------

std::vector<long> window_sectors(const ModelConfig& cfg, long margin,
                                 bool include_empty) {
  cfg.validate();
  long lim = cfg.window - margin;
  SectorMask allowed = 0;
  for (long t = -cfg.window; t <= cfg.window; ++t)
    if (lim >= 0 && -lim <= t && t <= lim)
      allowed |= SectorMask(1) << (t + cfg.window);
  std::vector<long> out;
  for (long a = 0; a < cfg.sector_count(); ++a) {
    if (SectorMask(a) & ~allowed) continue;
    if (a == 0 && !include_empty) continue;
    out.push_back(a);
  }
  return out;
}

std::vector<long> safe_sectors(const ModelConfig& cfg, bool include_empty) {
  return window_sectors(cfg, cfg.safe_margin, include_empty);
}

std::vector<bool> sector_predicate(const ModelConfig& cfg,
                                   const std::vector<long>& sectors) {
  std::vector<bool> p(std::size_t(cfg.sector_count()), false);
  for (long a : sectors) {
    if (a < 0 || a >= cfg.sector_count())
      throw std::out_of_range("sector index");
    p[std::size_t(a)] = true;
  }
  return p;
}

// --- verification ------------------------------------------------------------

namespace {

// Frobenius norm of (a - b) restricted to columns of the listed sectors
double restricted_frobenius(const CharOperator& a, const CharOperator& b,
                            const std::vector<long>& sectors) {
  double sq = 0.0;
  for (long src : sectors) {
    const auto& ma = a.edges_from(src);
    const auto& mb = b.edges_from(src);
    for (const auto& [dst, block] : ma) {
      auto it = mb.find(dst);
      sq += (it == mb.end()) ? block.squaredNorm()
                             : (block - it->second).squaredNorm();
    }
    for (const auto& [dst, block] : mb)
      if (ma.find(dst) == ma.end()) sq += block.squaredNorm();
  }
  return std::sqrt(sq);
}

}  // namespace

double IntertwiningReport::worst_per_n() const {
  double w = 0.0;
  for (const auto& [n, r] : per_n) {
    (void)n;
    w = std::max(w, r);
  }
  return w;
}

IntertwiningReport verify_intertwining(const CharOperator& j_op,
                                       const WeightSequence& w) {
  const ModelConfig& cfg = j_op.config();
  CharOperator u1 = koopman_T1(cfg);
  CharOperator u2 = koopman_T2(cfg);
  auto safe = safe_sectors(cfg, true);

  IntertwiningReport rep;
  rep.safe_columns = long(safe.size()) * cfg.n_base;
  rep.residual = restricted_frobenius(u1.composed_with(j_op),
                                      j_op.composed_with(u2), safe);
  for (long n = -w.half_width(); n <= w.half_width(); ++n) {
    if (w.a(n) == 0.0) continue;
    CharOperator in = isometry_In(cfg, n);
    double r = restricted_frobenius(u1.composed_with(in),
                                    in.composed_with(u2), safe);
    rep.per_n.emplace_back(n, r);
  }
  return rep;
}

double operator_norm(const CharOperator& op) {
  const ModelConfig& cfg = op.config();
  if (op.frequency_diagonal() && cfg.sector_count() <= 2048) {
    double nrm = 0.0;
    for (long j = 0; j < cfg.n_base; ++j)
      nrm = std::max(nrm, spectral_norm(op.frequency_block(j)));
    return nrm;
  }
  if (cfg.dim() <= 2048) return spectral_norm(op.dense());
  // power iteration on op* op
  Rng rng(0x6f70bULL);
  Vec v(op.dim());
  for (long i = 0; i < v.size(); ++i) v(i) = rng.complex_gaussian();
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < 300; ++it) {
    Vec w = op.apply(v);
    double s = w.norm();
    est = std::max(est, s);
    if (s == 0.0) break;
    v = op.apply_adjoint(w);
    double n2 = v.norm();
    if (n2 == 0.0) break;
    v /= n2;
  }
  return est;
}

bool MarkovReport::pass(double tol_const, double tol_pos,
                        double tol_norm) const {
  return constant_residual <= tol_const &&
         adjoint_constant_residual <= tol_const && min_entry >= -tol_pos &&
         max_imag <= tol_pos && operator_norm <= 1.0 + tol_norm;
}

MarkovReport verify_markov(const CharOperator& op, std::uint64_t seed,
                           int trials) {
  const ModelConfig& cfg = op.config();
  MarkovReport rep;
  rep.trials = trials;

  Vec ones = Vec::Zero(cfg.dim());
  ones(0) = 1.0;  // the constant function: sector empty, frequency zero
  rep.constant_residual = (op.apply(ones) - ones).norm();
  rep.adjoint_constant_residual = (op.apply_adjoint(ones) - ones).norm();

  Rng rng(seed);
  double min_entry = 0.0;
  double max_imag = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vec g(cfg.dim());
    for (long i = 0; i < g.size(); ++i) g(i) = rng.uniform();
    Vec h = to_grid(cfg, op.apply(from_grid(cfg, g)));
    min_entry = std::min(min_entry, h.real().minCoeff());
    max_imag = std::max(max_imag, h.imag().cwiseAbs().maxCoeff());
  }
  rep.min_entry = min_entry;
  rep.max_imag = max_imag;
  rep.operator_norm = operator_norm(op);
  return rep;
}

double kernel_margin(const CharOperator& op,
                     const std::vector<long>& sectors) {
  if (sectors.empty()) throw std::invalid_argument("no sectors selected");
  const ModelConfig& cfg = op.config();
  for (long a : sectors)
    if (a < 0 || a >= cfg.sector_count())
      throw std::out_of_range("sector index");
  long s = cfg.sector_count();
  long cols = long(sectors.size());
  if (cols > s) return 0.0;
  if (!op.frequency_diagonal() || s > 4096)
    throw std::invalid_argument("margin needs a frequency-diagonal operator");
  double margin = std::numeric_limits<double>::infinity();
  for (long j = 0; j < cfg.n_base; ++j) {
    Operator b = op.frequency_block(j);
    Operator sub(s, cols);
    for (long c = 0; c < cols; ++c) sub.col(c) = b.col(sectors[std::size_t(c)]);
    margin = std::min(margin, smallest_singular_value(sub));
  }
  return margin;
}

double xi_identity_check(const ModelConfig& cfg, const WeightSequence& w,
                         const Vec& coefficients, const FinSet& b) {
  cfg.validate();
  long bm = long(mask_from_set(b, cfg.window));
  Vec lhs = weighted_isometry_sum(cfg, w).apply(coefficients);
  auto omega = omega_table(cfg.n_base);
  double dev = 0.0;
  for (long j = 0; j < cfg.n_base; ++j) {
    Complex acc = 0.0;
    for (long n = -w.half_width(); n <= w.half_width(); ++n) {
      if (w.a(n) == 0.0) continue;
      long src = tilde_shift_mask(SectorMask(bm), n, cfg.window);
      if (src < 0) continue;
      acc += w.a(n) * omega[std::size_t(mod(cfg.stride * n * j, cfg.n_base))] *
             coefficients(src * cfg.n_base + j);
    }
    dev = std::max(dev, std::abs(lhs(bm * cfg.n_base + j) - acc));
  }
  return dev;
}

double zeta_identity_check(const ModelConfig& cfg, const WeightSequence& w,
                           const Vec& coefficients, const FinSet& a) {
  cfg.validate();
  long am = long(mask_from_set(a, cfg.window));
  Vec lhs = weighted_adjoint_sum(cfg, w).apply(coefficients);
  auto omega = omega_table(cfg.n_base);
  double dev = 0.0;
  for (long j = 0; j < cfg.n_base; ++j) {
    Complex acc = 0.0;
    for (long n = -w.half_width(); n <= w.half_width(); ++n) {
      if (w.a(n) == 0.0) continue;
      long src = hat_shift_mask(SectorMask(am), n, cfg.window);
      if (src < 0) continue;
      acc += w.a(n) *
             omega[std::size_t(mod(-cfg.stride * n * j, cfg.n_base))] *
             coefficients(src * cfg.n_base + j);
    }
    dev = std::max(dev, std::abs(lhs(am * cfg.n_base + j) - acc));
  }
  return dev;
}

// Sparse on purpose: the whole computation lives on a handful of characters
// at one base frequency, so large windows (big k) cost nothing.
CounterexampleReport counterexample_o7(const ModelConfig& cfg, long k, long j,
                                       const FinSet& g_set) {
  cfg.validate();
  if (k < 0) throw std::invalid_argument("negative truncation");
  if (j < 0 || j >= cfg.n_base) throw std::out_of_range("frequency index");
  if (!g_set.contains(1))
    throw std::invalid_argument("the seed sector must contain 1");
  if (g_set.min() - (k + 1) < -cfg.window || g_set.max() > cfg.window)
    throw std::invalid_argument("window too small for the chosen truncation");

  WeightSequence w = geometric_weights(k);
  CounterexampleReport rep;
  rep.k = k;
  rep.mass_deficit = 1.0 - w.sum();
  rep.g_norm = 1.0;

  auto omega = omega_table(cfg.n_base);
  auto phase = [&](long r) {
    return omega[std::size_t(mod(r, cfg.n_base))];
  };
  auto norm_of = [](const std::map<long, Complex>& v) {
    double sq = 0.0;
    for (const auto& [sec, c] : v) {
      (void)sec;
      sq += std::norm(c);
    }
    return std::sqrt(sq);
  };

  // coefficients by sector mask, all at frequency j
  long am = long(mask_from_set(g_set, cfg.window));
  std::map<long, Complex> f;
  f[am] = 1.0;
  long down = shift_sector_mask(SectorMask(am), -1, cfg.window);
  if (down < 0) throw std::logic_error("shifted sector left the window");
  f[down] -= 0.5 * phase(-cfg.stride * j);
  rep.f_norm = norm_of(f);

  std::map<long, Complex> r;
  for (const auto& [sec, c] : f)
    for (long n = 0; n <= k; ++n) {
      long tgt = tilde_shift_mask(SectorMask(sec), n, cfg.window);
      if (tgt < 0) continue;
      r[tgt] += w.a(n) * phase(-cfg.stride * n * j) * c;
    }
  rep.measured = norm_of(r);
  rep.bound = std::ldexp(rep.g_norm, -int(k + 2));

  std::map<long, Complex> expected;
  if (!g_set.contains(k + 2)) {
    long tgt = tilde_shift_mask(SectorMask(am), k + 1, cfg.window);
    if (tgt < 0) throw std::logic_error("boundary sector left the window");
    expected[tgt] =
        -std::ldexp(1.0, -int(k + 2)) * phase(-cfg.stride * (k + 1) * j);
  }
  double dev = 0.0;
  for (const auto& [sec, c] : r) {
    auto it = expected.find(sec);
    dev = std::max(dev, std::abs(c - (it == expected.end() ? 0.0 : it->second)));
  }
  for (const auto& [sec, c] : expected)
    if (r.find(sec) == r.end()) dev = std::max(dev, std::abs(c));
  rep.boundary_deviation = dev;
  rep.within_bound = rep.measured <= rep.bound + 1e-15;
  rep.f_large_enough = rep.f_norm + 1e-15 >= 0.5 * rep.g_norm;
  return rep;
}

bool skew_product_ergodic(const ModelConfig& cfg) {
  cfg.validate();
  long x = 0;
  int g = 0;
  long steps = 0;
  do {
    g ^= cfg.phi[std::size_t(x)];
    x = mod(x + 1, cfg.n_base);
    ++steps;
  } while (!(x == 0 && g == 0));
  return steps == 2 * cfg.n_base;
}

}  // namespace quasim
