#pragma once

#include <cstdint>
#include <vector>

#include "quasim/core.hpp"

namespace quasim {

// Distance between two angles measured around the circle (angles are
// fractions of a turn).
double circular_distance(double a, double b);

struct SpectralAtom {
  double angle = 0.0;
  double mass = 0.0;
};

// Finite positive measure on the circle: the spectral measure of a vector.
struct SpectralMeasure {
  std::vector<SpectralAtom> atoms;  // sorted by angle, masses above prune tol
  double total() const;
  // integral of e^{2 pi i n t}
  Complex fourier_coefficient(long n) const;
};

struct ComplexSpectralAtom {
  double angle = 0.0;
  Complex mass{0.0, 0.0};
};

// Complex measure: the cross spectral measure of a pair of vectors.
struct ComplexSpectralMeasure {
  std::vector<ComplexSpectralAtom> atoms;
  Complex fourier_coefficient(long n) const;
};

struct SpectralLine {
  double angle = 0.0;
  long multiplicity = 0;
};

// Finite analog of maximal spectral type + multiplicity function.
struct SpectralProfile {
  std::vector<SpectralLine> lines;  // sorted by angle
};

struct MultiplicityCertificate {
  long value = 0;        // largest eigenspace dimension
  bool certified = false;  // randomized generator-count check succeeded
  int trials = 0;
};

struct QuasiSimilarityReport {
  double residual_forward = 0.0;   // ||V U1 - U2 V||
  double residual_backward = 0.0;  // ||W U2 - U1 W||
  double margin_v = 0.0;           // dense-range margin of V
  double margin_w = 0.0;           // dense-range margin of W
  bool certified = false;          // residuals and margins within tolerance
  bool spectra_match = false;      // profiles of U1 and U2 agree
};

// sigma_x: masses ||P_k x||^2 on the eigenvalue angles of u.
SpectralMeasure spectral_measure(const Operator& u, const Vec& x,
                                 double angle_tol = 1e-8,
                                 double prune_tol = 1e-12);

// sigma_{x,y}: complex masses <P_k x, y>.
ComplexSpectralMeasure cross_spectral_measure(const Operator& u, const Vec& x,
                                              const Vec& y,
                                              double angle_tol = 1e-8,
                                              double prune_tol = 1e-12);

SpectralProfile spectral_profile(const Operator& u, double angle_tol = 1e-8);

// Largest eigenspace dimension plus a randomized certificate: some m-tuple of
// gaussian vectors generates everything under u, and across `trials` attempts
// no (m-1)-tuple does.
MultiplicityCertificate max_spectral_multiplicity(const Operator& u,
                                                  std::uint64_t seed,
                                                  int trials = 64,
                                                  double angle_tol = 1e-8);

// Every atom of sigma (mass above mass_tol) sits on an atom of tau.
bool absolutely_continuous(const SpectralMeasure& sigma,
                           const SpectralMeasure& tau,
                           double angle_tol = 1e-8, double mass_tol = 1e-12);

bool profiles_match(const SpectralProfile& a, const SpectralProfile& b,
                    double angle_tol = 1e-8);

// Same eigenvalue angles with the same multiplicities.
bool spectrally_equivalent(const Operator& u1, const Operator& u2,
                           double angle_tol = 1e-8);

// Check the intertwining pair V: H1 -> H2, W: H2 -> H1 (as matrices: V is
// dim2 x dim1, W is dim1 x dim2).  When both intertwining residuals are below
// res_tol and both dense-range margins exceed margin_tol, the report is
// `certified` and `spectra_match` must come out true.
QuasiSimilarityReport certify_quasi_similarity(const Operator& u1,
                                               const Operator& u2,
                                               const Operator& v,
                                               const Operator& w,
                                               double res_tol = 1e-8,
                                               double margin_tol = 1e-10,
                                               double angle_tol = 1e-8);

}  // namespace quasim
