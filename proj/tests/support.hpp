// Test-only oracles and instance generators. Everything here is computed by
// a route independent of the library code it is compared against.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dcons/dcons.hpp"

namespace oracle {

using dcons::Index;
using dcons::Matrix;
using dcons::Vector;

// L = D - A by explicit loops.
inline Matrix laplacian(const Matrix& a) {
  const Index n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    double d = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j != i) {
        l(i, j) = -a(i, j);
        d += a(i, j);
      }
    }
    l(i, i) = d;
  }
  return l;
}

// Transitive closure (Floyd-Warshall) on the positive pattern.
inline bool strongly_connected(const Matrix& a) {
  const Index n = a.rows();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (Index i = 0; i < n; ++i) {
    r[i][i] = true;
    for (Index j = 0; j < n; ++j) r[i][j] = r[i][j] || a(i, j) > 0.0;
  }
  for (Index k = 0; k < n; ++k)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (!r[i][j]) return false;
  return true;
}

// Left Perron vector from a general eigensolve of W^T.
inline Vector stationary(const Matrix& w) {
  Eigen::EigenSolver<Matrix> es(w.transpose());
  Index best = 0;
  for (Index i = 1; i < w.rows(); ++i) {
    if (std::abs(es.eigenvalues()(i) - 1.0) < std::abs(es.eigenvalues()(best) - 1.0)) best = i;
  }
  Vector v = es.eigenvectors().col(best).real();
  return v / v.sum();
}

// A# for A = I - T from the identity (I - T + 1 pi^T)^{-1} - 1 pi^T.
inline Matrix group_inverse(const Matrix& t) {
  const Index n = t.rows();
  const Matrix p = Vector::Ones(n) * stationary(t).transpose();
  const Matrix z = (Matrix::Identity(n, n) - t + p).inverse();
  return z - p;
}

// exp(A) by Taylor series after scaling by 2^s, then squaring.
inline Matrix expm_taylor(const Matrix& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (norm / std::ldexp(1.0, s) > 0.125) ++s;
  const Matrix b = a / std::ldexp(1.0, s);
  Matrix sum = Matrix::Identity(a.rows(), a.cols());
  Matrix term = sum;
  for (int k = 1; k < 40; ++k) {
    term = term * b / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

// exp(-L t) for symmetric L via its eigendecomposition.
inline Matrix expm_symmetric(const Matrix& l, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(l);
  const Vector d = (-t * es.eigenvalues().array()).exp();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

// Largest singular value.
inline double spectral_norm(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

}  // namespace oracle

namespace gen {

using dcons::Graph;
using dcons::Index;
using dcons::Matrix;
using dcons::rng::Stream;

// Unit-weight undirected Erdos-Renyi graph, resampled until connected.
inline Graph connected_graph(Stream& rs, Index n, double p = 0.5) {
  for (;;) {
    Matrix a = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (rs.uniform() < p) a(i, j) = a(j, i) = 1.0;
    if (oracle::strongly_connected(a)) return Graph(a);
  }
}

// Four probabilities, iid U(0.05, 1) normalized.
inline std::vector<double> scenario_probs(Stream& rs) {
  std::vector<double> p(4);
  double s = 0.0;
  for (auto& v : p) s += (v = rs.uniform(0.05, 1.0));
  for (auto& v : p) v /= s;
  return p;
}

struct ScenarioInstance {
  dcons::SwitchingEnsemble ensemble;
  dcons::SamplingScheme sampling;
  dcons::StateVector x0;
};

// Random Scenario I/II ensemble on n in [n_lo, n_hi] agents with
// h = h_frac / d_max.
inline ScenarioInstance scenario(Stream& rs, dcons::FaultKind kind, Index n_lo, Index n_hi,
                                 double h_frac, std::uint64_t k_bar) {
  const Index n = rs.integer(n_lo, n_hi);
  const Graph g = connected_graph(rs, n);
  const Index a = rs.integer(0, n - 1);
  Index b = rs.integer(0, n - 2);
  if (b >= a) ++b;
  dcons::SwitchingEnsemble e = dcons::make_scenario(g, kind, a, b, scenario_probs(rs));
  const auto s = dcons::SamplingScheme::discrete(h_frac / e.d_max(), k_bar);
  dcons::Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = rs.uniform(-1.0, 1.0);
  return {std::move(e), s, {x, 0.0}};
}

// Row-stochastic primitive matrix: random sparse entries plus a Hamiltonian
// cycle and a self loop at 0 (strongly connected and aperiodic).
inline Matrix primitive_chain(Stream& rs, Index n) {
  Matrix t = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (rs.uniform() < 0.5) t(i, j) = rs.uniform(0.05, 1.0);
  for (Index i = 0; i < n; ++i) t(i, (i + 1) % n) += rs.uniform(0.05, 1.0);
  t(0, 0) += rs.uniform(0.05, 1.0);
  for (Index i = 0; i < n; ++i) t.row(i) /= t.row(i).sum();
  return t;
}

}  // namespace gen
