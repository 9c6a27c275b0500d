#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "quasim/core.hpp"
#include "quasim/finsets.hpp"
#include "quasim/weights.hpp"

namespace quasim {

// Two skew-product transformations over one base cycle Z_N share the grid
// X x {0,1}^[-M,M]; their Koopman operators and the coordinate-deleting
// isometries between them act on the character basis
//   e_{(j,A)}(x, i) = exp(2 pi i j x / N) * (-1)^{sum_{t in A} i_t},
// indexed by a base frequency j and a sign sector A (a subset of the bit
// window, empty allowed).
struct ModelConfig {
  long n_base = 8;       // N: base cycle length
  long stride = 1;       // s: step of the second rotation, coprime to N
  std::vector<int> phi;  // 0/1 cocycle on the base cycle, size N
  long window = 4;       // M: bit positions run over [-M, M]
  long half_width = 2;   // K: truncation of the weight sequence
  long safe_margin = 3;  // shrink margin of the safe sector region

  long window_bits() const { return 2 * window + 1; }
  long sector_count() const { return 1L << window_bits(); }
  long dim() const { return n_base * sector_count(); }
  void validate() const;  // throws on inconsistent parameters
};

// Sector label as a bitmask over the window: bit (t + M) marks position t.
using SectorMask = std::uint32_t;

SectorMask mask_from_set(const FinSet& a, long window);  // throws if outside
FinSet set_from_mask(SectorMask m, long window);         // throws if empty
// shift(hat(A), n) as a mask; -1 when the result leaves the window.
long hat_shift_mask(SectorMask a, long n, long window);
// tilde(B - n) as a mask; -1 when n+1 lies in B or the result leaves the
// window.
long tilde_shift_mask(SectorMask b, long n, long window);
// A + n; -1 when outside the window.
long shift_sector_mask(SectorMask a, long n, long window);

// Character index <-> flat position: idx = sector * N + j.
inline long char_index(const ModelConfig& cfg, long sector, long j) {
  return sector * cfg.n_base + j;
}

// Operator on the character basis stored sector-to-sector; each edge carries
// an N x N block on the base-frequency index.  Columns whose sector has no
// outgoing edge are zero (domain restriction of a partial isometry).
class CharOperator {
public:
  explicit CharOperator(ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  long dim() const { return cfg_.dim(); }

  void add_edge(long src_sector, long dst_sector, const Operator& block);
  void add_scaled(const CharOperator& other, Complex factor);

  const std::map<long, Operator>& edges_from(long src_sector) const {
    return edges_[std::size_t(src_sector)];
  }
  bool has_edges(long src_sector) const {
    return !edges_[std::size_t(src_sector)].empty();
  }

  Vec apply(const Vec& x) const;
  Vec apply_adjoint(const Vec& x) const;
  CharOperator adjointed() const;
  // this after inner: (this ∘ inner) x = this(inner(x)).
  CharOperator composed_with(const CharOperator& inner) const;

  // All edge blocks diagonal <=> the operator never mixes base frequencies.
  bool frequency_diagonal() const;
  // Dense block over sectors at one base frequency j (requires
  // frequency_diagonal).
  Operator frequency_block(long j) const;

  Operator dense() const;  // guarded: dim() <= 4096

private:
  ModelConfig cfg_;
  std::vector<std::map<long, Operator>> edges_;  // by source sector
};

double max_entry_deviation(const CharOperator& a, const CharOperator& b);

// --- grid side -------------------------------------------------------------

// Point maps on the grid, index p = x * sector_count + bits.  The two
// transformations are bijections; the deleting maps and the sector shift read
// out-of-window bits as zero (partial maps realized as plain compositions).
std::vector<long> grid_map_T1(const ModelConfig& cfg);
std::vector<long> grid_map_T2(const ModelConfig& cfg);
std::vector<long> grid_map_In(const ModelConfig& cfg, long n);
std::vector<long> grid_map_Sbar(const ModelConfig& cfg);

// Koopman action of a point map on grid values: (out)(p) = f(map(p)).
Vec compose_with_map(const std::vector<long>& map, const Vec& grid_values);

// Character coefficients <-> grid values (uniform probability inner product;
// the character basis is orthonormal).
Vec to_grid(const ModelConfig& cfg, const Vec& coefficients);
Vec from_grid(const ModelConfig& cfg, const Vec& grid_values);

// Values of one character on the whole grid.
Vec character_values(const ModelConfig& cfg, long index);

// Max entry deviation between op and the basis-changed grid realization of
// point_map, over columns whose sector passes `domain` (nullptr = all).
double grid_consistency_deviation(const CharOperator& op,
                                  const std::vector<long>& point_map,
                                  const std::vector<bool>* domain = nullptr);

// --- operator builders -------------------------------------------------------

CharOperator koopman_T1(const ModelConfig& cfg);
CharOperator koopman_T2(const ModelConfig& cfg);
CharOperator koopman_Sbar(const ModelConfig& cfg);
CharOperator koopman_Sbar_pow(const ModelConfig& cfg, long n);
CharOperator isometry_In(const ModelConfig& cfg, long n);
CharOperator adjoint_In(const ModelConfig& cfg, long n);

// Sum over n of a(n) * isometry_In(n) (no normalization requirements).
CharOperator weighted_isometry_sum(const ModelConfig& cfg,
                                   const WeightSequence& w);
CharOperator weighted_adjoint_sum(const ModelConfig& cfg,
                                  const WeightSequence& w);

// The Markov intertwiner: weighted sum of the deleting isometries.  Requires
// nonnegative weights of total mass 1 (within 1e-12) supported inside
// [-K, K]; throws otherwise.
CharOperator markov_J(const ModelConfig& cfg, const WeightSequence& w);
CharOperator markov_J_adjoint(const ModelConfig& cfg, const WeightSequence& w);

// Dense permutation unitary of a grid bijection (for spectral comparisons).
Operator grid_koopman_dense(const ModelConfig& cfg,
                            const std::vector<long>& point_map);

// --- sector filters ----------------------------------------------------------

// Sectors contained in [-(M - margin), M - margin]; optionally keep the
// empty sector.
std::vector<long> window_sectors(const ModelConfig& cfg, long margin,
                                 bool include_empty);
std::vector<long> safe_sectors(const ModelConfig& cfg, bool include_empty);
std::vector<bool> sector_predicate(const ModelConfig& cfg,
                                   const std::vector<long>& sectors);

// --- verification ------------------------------------------------------------

struct IntertwiningReport {
  double residual = 0.0;       // Frobenius norm of (U1 J - J U2) on safe columns
  long safe_columns = 0;
  std::vector<std::pair<long, double>> per_n;  // same residual per isometry
  double worst_per_n() const;
};

IntertwiningReport verify_intertwining(const CharOperator& j_op,
                                       const WeightSequence& w);

struct MarkovReport {
  double constant_residual = 0.0;          // || op 1 - 1 ||
  double adjoint_constant_residual = 0.0;  // || op* 1 - 1 ||
  double min_entry = 0.0;    // worst grid-output entry over nonneg inputs
  double max_imag = 0.0;     // worst imaginary part over those outputs
  double operator_norm = 0.0;
  int trials = 0;
  bool pass(double tol_const = 1e-12, double tol_pos = 1e-12,
            double tol_norm = 1e-10) const;
};

MarkovReport verify_markov(const CharOperator& op, std::uint64_t seed,
                           int trials = 100);

// Exact operator norm for frequency-diagonal operators (per-frequency dense
// SVD); power-iteration estimate otherwise.
double operator_norm(const CharOperator& op);

// Smallest singular value of op restricted to the columns of the listed
// sectors (all base frequencies).
double kernel_margin(const CharOperator& op, const std::vector<long>& sectors);

// Convolution bookkeeping identities for the weighted sums: both regroupings
// of J (resp. J*) applied to a coefficient vector supported on safe sectors
// must agree.  Returns the max deviation over the tracked sector class.
double xi_identity_check(const ModelConfig& cfg, const WeightSequence& w,
                         const Vec& coefficients, const FinSet& b);
double zeta_identity_check(const ModelConfig& cfg, const WeightSequence& w,
                           const Vec& coefficients, const FinSet& a);

struct CounterexampleReport {
  long k = 0;
  double mass_deficit = 0.0;   // 1 - sum of the geometric weights
  double g_norm = 0.0;
  double f_norm = 0.0;         // || G - (1/2) G after the sector downshift ||
  double measured = 0.0;       // || J* F ||
  double bound = 0.0;          // 2^{-(K+2)} * ||G||
  double boundary_deviation = 0.0;  // distance from the closed-form residual
  bool within_bound = false;
  bool f_large_enough = false;  // ||F|| >= ||G|| / 2
};

// The vanishing-adjoint construction: with one-sided geometric weights the
// adjoint sum telescopes, leaving a single boundary character of size
// 2^{-(K+2)}.  g_set must contain 1 and fit the window with K+1 shifts.
CounterexampleReport counterexample_o7(const ModelConfig& cfg, long k,
                                       long j, const FinSet& g_set);

// Does the base-and-parity skew product (x, g) -> (x+1, g + phi(x)) have a
// single orbit?
bool skew_product_ergodic(const ModelConfig& cfg);

}  // namespace quasim
