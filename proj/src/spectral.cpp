#include "quasim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "quasim/rng.hpp"

namespace quasim {

double circular_distance(double a, double b) {
  double d = std::abs(a - b);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

double SpectralMeasure::total() const {
  double s = 0.0;
  for (const auto& at : atoms) s += at.mass;
  return s;
}

Complex SpectralMeasure::fourier_coefficient(long n) const {
  Complex s{0.0, 0.0};
  for (const auto& at : atoms)
    s += at.mass * std::polar(1.0, 2.0 * std::numbers::pi * double(n) * at.angle);
  return s;
}

Complex ComplexSpectralMeasure::fourier_coefficient(long n) const {
  Complex s{0.0, 0.0};
  for (const auto& at : atoms)
    s += at.mass * std::polar(1.0, 2.0 * std::numbers::pi * double(n) * at.angle);
  return s;
}

SpectralMeasure spectral_measure(const Operator& u, const Vec& x,
                                 double angle_tol, double prune_tol) {
  if (x.size() != u.rows())
    throw std::invalid_argument("spectral_measure: dimension mismatch");
  SpectralMeasure out;
  for (const EigenLine& line : unitary_eigensystem(u, angle_tol)) {
    const double mass = (line.basis.adjoint() * x).squaredNorm();
    if (mass >= prune_tol) out.atoms.push_back({line.angle, mass});
  }
  return out;
}

ComplexSpectralMeasure cross_spectral_measure(const Operator& u, const Vec& x,
                                              const Vec& y, double angle_tol,
                                              double prune_tol) {
  if (x.size() != u.rows() || y.size() != u.rows())
    throw std::invalid_argument("cross_spectral_measure: dimension mismatch");
  ComplexSpectralMeasure out;
  for (const EigenLine& line : unitary_eigensystem(u, angle_tol)) {
    const Vec px = line.basis.adjoint() * x;
    const Vec py = line.basis.adjoint() * y;
    const Complex mass = py.dot(px);  // <P x, y>
    if (std::abs(mass) >= prune_tol) out.atoms.push_back({line.angle, mass});
  }
  return out;
}

SpectralProfile spectral_profile(const Operator& u, double angle_tol) {
  SpectralProfile p;
  for (const EigenLine& line : unitary_eigensystem(u, angle_tol))
    p.lines.push_back({line.angle, long(line.multiplicity())});
  return p;
}

MultiplicityCertificate max_spectral_multiplicity(const Operator& u,
                                                  std::uint64_t seed,
                                                  int trials,
                                                  double angle_tol) {
  const Eigen::Index n = u.rows();
  SpectralProfile prof = spectral_profile(u, angle_tol);
  long m = 0;
  for (const auto& line : prof.lines) m = std::max(m, line.multiplicity);

  MultiplicityCertificate cert;
  cert.value = m;
  cert.trials = trials;
  Rng rng(seed);
  auto spans_all = [&](long count) {
    std::vector<Vec> gens;
    for (long i = 0; i < count; ++i) gens.push_back(rng.gaussian_vector(n));
    return krylov_span(u, gens).cols() == n;
  };
  bool m_spans = false;
  for (int t = 0; t < trials && !m_spans; ++t) m_spans = spans_all(m);
  bool fewer_never_span = true;
  if (m > 1)
    for (int t = 0; t < trials && fewer_never_span; ++t)
      fewer_never_span = !spans_all(m - 1);
  cert.certified = m_spans && fewer_never_span;
  return cert;
}

bool absolutely_continuous(const SpectralMeasure& sigma,
                           const SpectralMeasure& tau, double angle_tol,
                           double mass_tol) {
  for (const auto& at : sigma.atoms) {
    if (at.mass < mass_tol) continue;
    bool found = false;
    for (const auto& bt : tau.atoms)
      if (bt.mass >= mass_tol &&
          circular_distance(at.angle, bt.angle) <= angle_tol) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

bool profiles_match(const SpectralProfile& a, const SpectralProfile& b,
                    double angle_tol) {
  if (a.lines.size() != b.lines.size()) return false;
  std::vector<bool> used(b.lines.size(), false);
  for (const auto& la : a.lines) {
    // nearest unclaimed partner within tolerance
    double best = angle_tol;
    long pick = -1;
    for (std::size_t i = 0; i < b.lines.size(); ++i) {
      if (used[i] || b.lines[i].multiplicity != la.multiplicity) continue;
      const double d = circular_distance(la.angle, b.lines[i].angle);
      if (d <= best) {
        best = d;
        pick = long(i);
      }
    }
    if (pick < 0) return false;
    used[std::size_t(pick)] = true;
  }
  return true;
}

bool spectrally_equivalent(const Operator& u1, const Operator& u2,
                           double angle_tol) {
  return profiles_match(spectral_profile(u1, angle_tol),
                        spectral_profile(u2, angle_tol), angle_tol);
}

namespace {

// Dense-range margin: smallest singular value when the shape allows
// surjectivity at all, zero otherwise.
double range_margin(const Operator& v) {
  if (v.cols() < v.rows()) return 0.0;
  return smallest_singular_value(v);
}

}  // namespace

QuasiSimilarityReport certify_quasi_similarity(const Operator& u1,
                                               const Operator& u2,
                                               const Operator& v,
                                               const Operator& w,
                                               double res_tol,
                                               double margin_tol,
                                               double angle_tol) {
  const Eigen::Index n1 = u1.rows(), n2 = u2.rows();
  if (u1.cols() != n1 || u2.cols() != n2)
    throw std::invalid_argument("certify_quasi_similarity: operators not square");
  if (v.rows() != n2 || v.cols() != n1 || w.rows() != n1 || w.cols() != n2)
    throw std::invalid_argument("certify_quasi_similarity: shape mismatch");

  QuasiSimilarityReport rep;
  rep.residual_forward = spectral_norm(v * u1 - u2 * v);
  rep.residual_backward = spectral_norm(w * u2 - u1 * w);
  rep.margin_v = range_margin(v);
  rep.margin_w = range_margin(w);
  rep.certified = rep.residual_forward <= res_tol &&
                  rep.residual_backward <= res_tol &&
                  rep.margin_v > margin_tol && rep.margin_w > margin_tol;
  rep.spectra_match = spectrally_equivalent(u1, u2, angle_tol);
  return rep;
}

}  // namespace quasim
