#include "quasim/joinings.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cctype>
#include <limits>
#include <stdexcept>

#include "quasim/rng.hpp"

namespace quasim {

using Int = boost::multiprecision::cpp_int;

namespace {

// decimal integer literal with optional sign; leading zeros are stripped so
// the big-integer constructor never sees an octal-looking string
Int parse_int(const std::string& text) {
  std::string s = text;
  std::string sign;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    if (s[0] == '-') sign = "-";
    s.erase(s.begin());
  }
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("malformed rational literal");
  std::size_t nz = s.find_first_not_of('0');
  s = (nz == std::string::npos) ? "0" : s.substr(nz);
  return Int(sign + s);
}

}  // namespace

Rational parse_rational(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = t.find('/');
  if (slash != std::string::npos) {
    Int d = parse_int(t.substr(slash + 1));
    if (d == 0) throw std::invalid_argument("zero denominator");
    return Rational(parse_int(t.substr(0, slash)), d);
  }
  auto dot = t.find('.');
  if (dot != std::string::npos) {
    Int den = 1;
    for (std::size_t i = dot + 1; i < t.size(); ++i) den *= 10;
    return Rational(parse_int(t.substr(0, dot) + t.substr(dot + 1)), den);
  }
  return Rational(parse_int(t));
}

void FiniteMPS::validate() const {
  if (n < 1) throw std::invalid_argument("empty system");
  if (long(perm.size()) != n || p.size() != n)
    throw std::invalid_argument("size mismatch");
  std::vector<int> hit(std::size_t(n), 0);
  for (long t : perm)
    if (t < 0 || t >= n || hit[std::size_t(t)]++)
      throw std::invalid_argument("not a permutation");
  double sum = 0.0;
  for (long i = 0; i < n; ++i) {
    if (!(p(i) > 0.0)) throw std::invalid_argument("weights must be positive");
    sum += p(i);
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("weights must sum to 1");
  for (long i = 0; i < n; ++i)
    if (std::abs(p(perm[std::size_t(i)]) - p(i)) > 1e-12)
      throw std::invalid_argument("weights not invariant");
  if (!p_exact.empty()) {
    if (long(p_exact.size()) != n)
      throw std::invalid_argument("exact weight size mismatch");
    Rational total = 0;
    for (long i = 0; i < n; ++i) {
      if (p_exact[std::size_t(i)] <= 0)
        throw std::invalid_argument("exact weights must be positive");
      total += p_exact[std::size_t(i)];
      if (p_exact[std::size_t(perm[std::size_t(i)])] != p_exact[std::size_t(i)])
        throw std::invalid_argument("exact weights not invariant");
      double d = p_exact[std::size_t(i)].convert_to<double>();
      if (std::abs(d - p(i)) > 1e-12)
        throw std::invalid_argument("exact and float weights disagree");
    }
    if (total != 1) throw std::invalid_argument("exact weights must sum to 1");
  }
}

FiniteMPS uniform_cycle(long n) {
  FiniteMPS sys;
  sys.n = n;
  sys.perm.resize(std::size_t(n));
  for (long i = 0; i < n; ++i) sys.perm[std::size_t(i)] = (i + 1) % n;
  sys.p = RealVec::Constant(n, 1.0 / double(n));
  sys.p_exact.assign(std::size_t(n), Rational(1, n));
  sys.validate();
  return sys;
}

RealMatrix koopman_matrix(const FiniteMPS& sys) {
  sys.validate();
  RealMatrix u = RealMatrix::Zero(sys.n, sys.n);
  for (long x = 0; x < sys.n; ++x) u(x, sys.perm[std::size_t(x)]) = 1.0;
  return u;
}

RealMatrix product_joining(const FiniteMPS& s1, const FiniteMPS& s2) {
  s1.validate();
  s2.validate();
  return s1.p * s2.p.transpose();
}

bool JoiningCheck::pass(double tol) const {
  return min_entry >= -tol && row_marginal_residual <= tol &&
         col_marginal_residual <= tol && invariance_residual <= tol;
}

JoiningCheck validate_joining(const RealMatrix& lambda, const FiniteMPS& s1,
                              const FiniteMPS& s2) {
  s1.validate();
  s2.validate();
  if (lambda.rows() != s1.n || lambda.cols() != s2.n)
    throw std::invalid_argument("joining has wrong shape");
  JoiningCheck c;
  c.min_entry = lambda.minCoeff();
  c.row_marginal_residual = (lambda.rowwise().sum() - s1.p).cwiseAbs().maxCoeff();
  c.col_marginal_residual =
      (lambda.colwise().sum().transpose() - s2.p).cwiseAbs().maxCoeff();
  double inv = 0.0;
  for (long x = 0; x < s1.n; ++x)
    for (long y = 0; y < s2.n; ++y)
      inv = std::max(inv, std::abs(lambda(s1.perm[std::size_t(x)],
                                           s2.perm[std::size_t(y)]) -
                                   lambda(x, y)));
  c.invariance_residual = inv;
  return c;
}

namespace {

// homogeneous constraints on an n1 x n2 array h, flattened u = x * n2 + y:
// zero row sums, zero column sums, invariance under the product permutation
std::vector<std::vector<double>> constraint_rows(const FiniteMPS& s1,
                                                 const FiniteMPS& s2) {
  long n1 = s1.n;
  long n2 = s2.n;
  long m = n1 * n2;
  std::vector<std::vector<double>> rows;
  for (long x = 0; x < n1; ++x) {
    std::vector<double> r(std::size_t(m), 0.0);
    for (long y = 0; y < n2; ++y) r[std::size_t(x * n2 + y)] = 1.0;
    rows.push_back(std::move(r));
  }
  for (long y = 0; y < n2; ++y) {
    std::vector<double> r(std::size_t(m), 0.0);
    for (long x = 0; x < n1; ++x) r[std::size_t(x * n2 + y)] = 1.0;
    rows.push_back(std::move(r));
  }
  for (long x = 0; x < n1; ++x)
    for (long y = 0; y < n2; ++y) {
      long u = x * n2 + y;
      long v = s1.perm[std::size_t(x)] * n2 + s2.perm[std::size_t(y)];
      if (u == v) continue;
      std::vector<double> r(std::size_t(m), 0.0);
      r[std::size_t(v)] += 1.0;
      r[std::size_t(u)] -= 1.0;
      rows.push_back(std::move(r));
    }
  return rows;
}

// exact rational nullspace via Gauss-Jordan; the constraint coefficients are
// integers, so this is exact regardless of the weight vectors
std::vector<std::vector<Rational>> exact_nullspace(
    const std::vector<std::vector<double>>& rows_d, long m) {
  std::vector<std::vector<Rational>> rows;
  rows.reserve(rows_d.size());
  for (const auto& r : rows_d) {
    std::vector<Rational> q(static_cast<std::size_t>(m));
    for (long i = 0; i < m; ++i)
      q[std::size_t(i)] = Rational(long(r[std::size_t(i)]));
    rows.push_back(std::move(q));
  }
  std::vector<long> pivot_col;
  long rank = 0;
  for (long col = 0; col < m && rank < long(rows.size()); ++col) {
    long piv = -1;
    for (long r = rank; r < long(rows.size()); ++r)
      if (rows[std::size_t(r)][std::size_t(col)] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(rows[std::size_t(rank)], rows[std::size_t(piv)]);
    Rational lead = rows[std::size_t(rank)][std::size_t(col)];
    for (long c = col; c < m; ++c) rows[std::size_t(rank)][std::size_t(c)] /= lead;
    for (long r = 0; r < long(rows.size()); ++r) {
      if (r == rank) continue;
      Rational f = rows[std::size_t(r)][std::size_t(col)];
      if (f == 0) continue;
      for (long c = col; c < m; ++c)
        rows[std::size_t(r)][std::size_t(c)] -=
            f * rows[std::size_t(rank)][std::size_t(c)];
    }
    pivot_col.push_back(col);
    ++rank;
  }
  std::vector<bool> is_pivot(std::size_t(m), false);
  for (long c : pivot_col) is_pivot[std::size_t(c)] = true;
  std::vector<std::vector<Rational>> basis;
  for (long f = 0; f < m; ++f) {
    if (is_pivot[std::size_t(f)]) continue;
    std::vector<Rational> v(std::size_t(m), Rational(0));
    v[std::size_t(f)] = 1;
    for (long r = 0; r < rank; ++r)
      v[std::size_t(pivot_col[std::size_t(r)])] =
          -rows[std::size_t(r)][std::size_t(f)];
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<RealMatrix> orthonormalized(std::vector<Eigen::VectorXd> vecs,
                                        long n1, long n2) {
  std::vector<RealMatrix> out;
  if (vecs.empty()) return out;
  long m = n1 * n2;
  Eigen::MatrixXd b(m, long(vecs.size()));
  for (long c = 0; c < long(vecs.size()); ++c) b.col(c) = vecs[std::size_t(c)];
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(b);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(m, long(vecs.size()));
  for (long c = 0; c < long(vecs.size()); ++c) {
    RealMatrix h(n1, n2);
    for (long x = 0; x < n1; ++x)
      for (long y = 0; y < n2; ++y) h(x, y) = q(x * n2 + y, c);
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace

JoiningSpace joining_space(const FiniteMPS& s1, const FiniteMPS& s2,
                           bool prefer_exact) {
  s1.validate();
  s2.validate();
  JoiningSpace sp;
  sp.n1 = s1.n;
  sp.n2 = s2.n;
  sp.particular = product_joining(s1, s2);
  long m = s1.n * s2.n;
  auto rows = constraint_rows(s1, s2);

  std::vector<Eigen::VectorXd> raw;
  if (prefer_exact && m <= 256) {
    auto basis = exact_nullspace(rows, m);
    for (const auto& v : basis) {
      Eigen::VectorXd d(m);
      for (long i = 0; i < m; ++i)
        d(i) = v[std::size_t(i)].convert_to<double>();
      raw.push_back(std::move(d));
    }
    sp.exact = true;
  } else {
    Eigen::MatrixXd a(long(rows.size()), m);
    for (long r = 0; r < long(rows.size()); ++r)
      for (long c = 0; c < m; ++c) a(r, c) = rows[std::size_t(r)][std::size_t(c)];
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cut = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
    long rank = 0;
    for (long i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++rank;
    for (long c = rank; c < m; ++c)
      raw.push_back(svd.matrixV().col(c));
    sp.exact = false;
  }
  sp.basis = orthonormalized(std::move(raw), s1.n, s2.n);
  return sp;
}

ExtremePointReport is_indecomposable(const RealMatrix& lambda,
                                     const JoiningSpace& space,
                                     std::uint64_t seed, double support_tol) {
  if (lambda.rows() != space.n1 || lambda.cols() != space.n2)
    throw std::invalid_argument("joining has wrong shape");
  ExtremePointReport rep;
  rep.space_dimension = space.dimension();

  std::vector<std::pair<long, long>> zeros;
  for (long x = 0; x < space.n1; ++x)
    for (long y = 0; y < space.n2; ++y)
      if (std::abs(lambda(x, y)) <= support_tol) zeros.emplace_back(x, y);
  rep.zero_count = long(zeros.size());
  rep.support_size = space.n1 * space.n2 - rep.zero_count;

  if (space.dimension() == 0) {
    rep.indecomposable = true;
    rep.support_margin = std::numeric_limits<double>::infinity();
    return rep;
  }
  if (zeros.empty()) {
    rep.indecomposable = false;
    rep.support_margin = 0.0;
    return rep;
  }
  long d = space.dimension();
  if (long(zeros.size()) < d) {
    rep.indecomposable = false;
    rep.support_margin = 0.0;
    return rep;
  }
  Operator e(long(zeros.size()), d);
  for (long r = 0; r < long(zeros.size()); ++r)
    for (long b = 0; b < d; ++b)
      e(r, b) = space.basis[std::size_t(b)](zeros[std::size_t(r)].first,
                                            zeros[std::size_t(r)].second);
  double margin = smallest_singular_value(e);

  // every unit combination of basis directions must clear the margin on the
  // zero set; confirm on random combinations
  Rng rng(seed);
  int trials = 32;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd c(d);
    for (long i = 0; i < d; ++i) c(i) = rng.gaussian();
    c.normalize();
    double sq = 0.0;
    for (const auto& [x, y] : zeros) {
      double h = 0.0;
      for (long b = 0; b < d; ++b) h += c(b) * space.basis[std::size_t(b)](x, y);
      sq += h * h;
    }
    margin = std::min(margin, std::sqrt(sq) + 1e-15);
  }
  rep.trials = trials;
  rep.support_margin = margin;
  rep.indecomposable = margin > 1e-8;
  return rep;
}

RealMatrix markov_from_joining(const RealMatrix& lambda, const FiniteMPS& s1,
                               const FiniteMPS& s2) {
  if (lambda.rows() != s1.n || lambda.cols() != s2.n)
    throw std::invalid_argument("joining has wrong shape");
  RealMatrix phi(s2.n, s1.n);
  for (long y = 0; y < s2.n; ++y)
    for (long x = 0; x < s1.n; ++x) phi(y, x) = lambda(x, y) / s2.p(y);
  return phi;
}

RealMatrix joining_from_markov(const RealMatrix& phi, const FiniteMPS& s1,
                               const FiniteMPS& s2) {
  if (phi.rows() != s2.n || phi.cols() != s1.n)
    throw std::invalid_argument("kernel has wrong shape");
  RealMatrix lambda(s1.n, s2.n);
  for (long x = 0; x < s1.n; ++x)
    for (long y = 0; y < s2.n; ++y) lambda(x, y) = s2.p(y) * phi(y, x);
  return lambda;
}

RealMatrix weighted_adjoint(const RealMatrix& phi, const FiniteMPS& s1,
                            const FiniteMPS& s2) {
  if (phi.rows() != s2.n || phi.cols() != s1.n)
    throw std::invalid_argument("kernel has wrong shape");
  RealMatrix adj(s1.n, s2.n);
  for (long x = 0; x < s1.n; ++x)
    for (long y = 0; y < s2.n; ++y)
      adj(x, y) = s2.p(y) * phi(y, x) / s1.p(x);
  return adj;
}

double weighted_norm(const RealMatrix& phi, const FiniteMPS& s1,
                     const FiniteMPS& s2) {
  if (phi.rows() != s2.n || phi.cols() != s1.n)
    throw std::invalid_argument("kernel has wrong shape");
  RealMatrix scaled = s2.p.cwiseSqrt().asDiagonal() * phi *
                      s1.p.cwiseSqrt().cwiseInverse().asDiagonal();
  return spectral_norm(scaled.cast<Complex>());
}

bool MarkovOpCheck::pass(double tol, double norm_tol) const {
  return min_entry >= -tol && unit_residual <= tol &&
         adjoint_unit_residual <= tol && intertwining_residual <= tol &&
         norm <= 1.0 + norm_tol;
}

MarkovOpCheck validate_markov_operator(const RealMatrix& phi,
                                       const FiniteMPS& s1,
                                       const FiniteMPS& s2) {
  s1.validate();
  s2.validate();
  if (phi.rows() != s2.n || phi.cols() != s1.n)
    throw std::invalid_argument("kernel has wrong shape");
  MarkovOpCheck c;
  c.min_entry = phi.minCoeff();
  c.unit_residual =
      (phi * RealVec::Ones(s1.n) - RealVec::Ones(s2.n)).cwiseAbs().maxCoeff();
  c.adjoint_unit_residual = (weighted_adjoint(phi, s1, s2) * RealVec::Ones(s2.n) -
                             RealVec::Ones(s1.n))
                                .cwiseAbs()
                                .maxCoeff();
  c.norm = weighted_norm(phi, s1, s2);
  RealMatrix r = phi * koopman_matrix(s1) - koopman_matrix(s2) * phi;
  c.intertwining_residual = weighted_norm(r, s1, s2);
  return c;
}

RealMatrix markov_from_factor_map(const std::vector<long>& pi,
                                  const FiniteMPS& s1, const FiniteMPS& s2) {
  s1.validate();
  s2.validate();
  if (long(pi.size()) != s1.n)
    throw std::invalid_argument("factor map has wrong size");
  RealVec push = RealVec::Zero(s2.n);
  for (long x = 0; x < s1.n; ++x) {
    long y = pi[std::size_t(x)];
    if (y < 0 || y >= s2.n) throw std::out_of_range("factor map target");
    if (pi[std::size_t(s1.perm[std::size_t(x)])] != s2.perm[std::size_t(y)])
      throw std::invalid_argument("factor map is not equivariant");
    push(y) += s1.p(x);
  }
  if ((push - s2.p).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("factor map does not push the measure forward");
  RealMatrix v = RealMatrix::Zero(s1.n, s2.n);
  for (long x = 0; x < s1.n; ++x) v(x, pi[std::size_t(x)]) = 1.0;
  return v;
}

RealMatrix joining_from_factor_map(const std::vector<long>& pi,
                                   const FiniteMPS& s1, const FiniteMPS& s2) {
  RealMatrix v = markov_from_factor_map(pi, s1, s2);  // runs all checks
  RealMatrix lambda = RealMatrix::Zero(s1.n, s2.n);
  for (long x = 0; x < s1.n; ++x) lambda(x, pi[std::size_t(x)]) = s1.p(x);
  return lambda;
}

RealMatrix compose_markov(const RealMatrix& outer, const RealMatrix& inner) {
  if (outer.cols() != inner.rows())
    throw std::invalid_argument("composition shape mismatch");
  return outer * inner;
}

double distance_to_constants(const RealMatrix& phi, const FiniteMPS& s1,
                             const FiniteMPS& s2) {
  if (phi.rows() != s2.n || phi.cols() != s1.n)
    throw std::invalid_argument("kernel has wrong shape");
  RealMatrix proj(s2.n, s1.n);
  for (long y = 0; y < s2.n; ++y)
    for (long x = 0; x < s1.n; ++x) proj(y, x) = s1.p(x);
  return weighted_norm(phi - proj, s1, s2);
}

}  // namespace quasim
