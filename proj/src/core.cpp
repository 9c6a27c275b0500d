#include "quasim/core.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>

namespace quasim {

RealVec singular_values(const Operator& a) {
  if (a.rows() == 0 || a.cols() == 0)
    throw std::invalid_argument("singular_values: empty matrix");
  if (std::min(a.rows(), a.cols()) <= 96) {
    Eigen::JacobiSVD<Operator> svd(a);
    return svd.singularValues();
  }
  Eigen::BDCSVD<Operator> svd(a);
  return svd.singularValues();
}

namespace {

// Split a sorted value sequence wherever the gap exceeds `gap`.
// Returns cluster boundaries [b_0=0, b_1, ..., b_k=n].
std::vector<Eigen::Index> cluster_boundaries(const RealVec& sorted,
                                             double gap) {
  std::vector<Eigen::Index> b{0};
  for (Eigen::Index i = 1; i < sorted.size(); ++i)
    if (sorted(i) - sorted(i - 1) > gap) b.push_back(i);
  b.push_back(sorted.size());
  return b;
}

}  // namespace

std::vector<EigenLine> unitary_eigensystem(const Operator& u,
                                           double angle_tol,
                                           double unitary_tol) {
  const Eigen::Index n = u.rows();
  if (n == 0 || u.cols() != n)
    throw std::invalid_argument("unitary_eigensystem: not a square matrix");
  const double defect =
      (u * u.adjoint() - Operator::Identity(n, n)).norm();
  if (defect > unitary_tol)
    throw std::invalid_argument("unitary_eigensystem: matrix not unitary");

  const double gap = 2.0 * std::numbers::pi * angle_tol;

  // Stage 1: cosine part.
  Operator re = (u + u.adjoint()) / 2.0;
  Operator im = (u - u.adjoint()) / Complex(0.0, 2.0);
  Eigen::SelfAdjointEigenSolver<Operator> es_re(re);
  if (es_re.info() != Eigen::Success)
    throw std::runtime_error("unitary_eigensystem: eigensolver failed");
  const RealVec c = es_re.eigenvalues();
  const Operator q = es_re.eigenvectors();

  std::vector<EigenLine> lines;
  std::vector<Eigen::Index> cb = cluster_boundaries(c, gap);
  for (std::size_t ci = 0; ci + 1 < cb.size(); ++ci) {
    const Eigen::Index lo = cb[ci], m = cb[ci + 1] - cb[ci];
    Operator qc = q.middleCols(lo, m);
    // Stage 2: sine part restricted to the cosine eigenspace.
    Operator bc = qc.adjoint() * (im * qc);
    Eigen::SelfAdjointEigenSolver<Operator> es_im(bc);
    if (es_im.info() != Eigen::Success)
      throw std::runtime_error("unitary_eigensystem: eigensolver failed");
    const RealVec s = es_im.eigenvalues();
    Operator v = qc * es_im.eigenvectors();
    std::vector<Eigen::Index> sb = cluster_boundaries(s, gap);
    for (std::size_t si = 0; si + 1 < sb.size(); ++si) {
      const Eigen::Index slo = sb[si], sm = sb[si + 1] - sb[si];
      EigenLine line;
      line.basis = v.middleCols(slo, sm);
      // Eigenvalue from the Rayleigh quotient of the cluster.
      Complex lambda = (line.basis.adjoint() * (u * line.basis)).trace() /
                       double(sm);
      double theta = std::atan2(lambda.imag(), lambda.real()) /
                     (2.0 * std::numbers::pi);
      if (theta < 0.0) theta += 1.0;
      if (theta >= 1.0 - angle_tol / 2.0) theta = 0.0;  // wraparound snap
      line.angle = theta;
      lines.push_back(std::move(line));
    }
  }
  std::sort(lines.begin(), lines.end(),
            [](const EigenLine& a, const EigenLine& b) {
              return a.angle < b.angle;
            });
  return lines;
}

Operator krylov_span(const Operator& u, const std::vector<Vec>& generators,
                     double tol) {
  const Eigen::Index n = u.rows();
  if (u.cols() != n)
    throw std::invalid_argument("krylov_span: operator not square");
  Operator basis(n, 0);
  std::deque<Vec> queue;
  for (const Vec& g : generators) {
    if (g.size() != n)
      throw std::invalid_argument("krylov_span: generator dimension mismatch");
    double nrm = g.norm();
    if (nrm > 1e-14) queue.push_back(g / nrm);
  }
  while (!queue.empty() && basis.cols() < n) {
    Vec v = std::move(queue.front());
    queue.pop_front();
    // Orthogonalize twice for stability.
    for (int pass = 0; pass < 2; ++pass)
      if (basis.cols() > 0) v -= basis * (basis.adjoint() * v);
    const double r = v.norm();
    if (r <= tol) continue;
    v /= r;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = v;
    queue.push_back(u * v);
  }
  return basis;
}

}  // namespace quasim
