#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Eigenvalues>

#include "dcons/types.hpp"

namespace dcons {

// Weighted digraph on n agents. adj(i, j) > 0 means agent i receives from
// agent j. Immutable once built.
class Graph {
 public:
  Graph() = default;

  explicit Graph(Matrix adjacency) : adj_(std::move(adjacency)) {
    if (adj_.rows() != adj_.cols()) {
      throw DimensionError("graph: adjacency must be square");
    }
    if (adj_.rows() == 0) {
      throw DimensionError("graph: agent count must be positive");
    }
    for (Index i = 0; i < adj_.rows(); ++i) {
      if (adj_(i, i) != 0.0) {
        throw Error("graph: adjacency diagonal must be zero");
      }
      for (Index j = 0; j < adj_.cols(); ++j) {
        if (!(adj_(i, j) >= 0.0) || !std::isfinite(adj_(i, j))) {
          throw Error("graph: edge weights must be finite and nonnegative");
        }
      }
    }
  }

  static Graph empty(Index n) { return Graph(Matrix::Zero(n, n)); }

  // Edges are (i, j, w): agent i receives from agent j with weight w.
  // With undirected=true each edge also materializes (j, i, w).
  static Graph from_edges(Index n,
                          const std::vector<std::tuple<Index, Index, double>>& edges,
                          bool undirected) {
    if (n <= 0) throw DimensionError("graph: agent count must be positive");
    Matrix a = Matrix::Zero(n, n);
    for (const auto& [i, j, w] : edges) {
      if (i < 0 || i >= n || j < 0 || j >= n) {
        throw IndexError("graph: edge endpoint out of range");
      }
      if (i == j) throw Error("graph: self loops are not allowed");
      a(i, j) = w;
      if (undirected) a(j, i) = w;
    }
    return Graph(std::move(a));
  }

  Index n() const { return adj_.rows(); }
  const Matrix& adj() const { return adj_; }

  bool is_undirected() const { return adj_ == adj_.transpose(); }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.adj_.rows() == b.adj_.rows() && a.adj_ == b.adj_;
  }

 private:
  Matrix adj_;
};

struct Laplacian {
  Matrix mat;      // D - A
  Vector degrees;  // diagonal of D

  Index n() const { return mat.rows(); }
};

struct FaultSpec {
  std::set<Index> receive_disabled;
  std::set<Index> send_disabled;
};

inline Laplacian build_laplacian(const Graph& g) {
  Laplacian l;
  l.degrees = g.adj().rowwise().sum();
  l.mat = -g.adj();
  l.mat.diagonal() += l.degrees;
  return l;
}

// Receive fault on i zeroes row i; send fault on j zeroes column j.
inline Graph apply_fault(const Graph& g, const FaultSpec& f) {
  Matrix a = g.adj();
  for (Index i : f.receive_disabled) {
    if (i < 0 || i >= g.n()) throw IndexError("apply_fault: receive-disabled agent out of range");
    a.row(i).setZero();
  }
  for (Index j : f.send_disabled) {
    if (j < 0 || j >= g.n()) throw IndexError("apply_fault: send-disabled agent out of range");
    a.col(j).setZero();
  }
  return Graph(std::move(a));
}

namespace detail {

// Vertices reachable from `start` following information flow: an edge
// j -> i exists when adj(i, j) > 0 (or adj(j, i) > 0 when `reversed`).
inline std::vector<bool> reachable(const Matrix& adj, Index start, bool reversed) {
  const Index n = adj.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Index> stack{start};
  seen[static_cast<std::size_t>(start)] = true;
  while (!stack.empty()) {
    const Index v = stack.back();
    stack.pop_back();
    for (Index w = 0; w < n; ++w) {
      const double weight = reversed ? adj(v, w) : adj(w, v);
      if (weight > 0.0 && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace detail

// Forward sweep and a sweep on the transpose from vertex 0.
inline bool is_strongly_connected(const Graph& g) {
  const auto all = [](const std::vector<bool>& v) {
    return std::all_of(v.begin(), v.end(), [](bool b) { return b; });
  };
  return all(detail::reachable(g.adj(), 0, false)) && all(detail::reachable(g.adj(), 0, true));
}

inline double max_degree(const Graph& g) { return g.adj().rowwise().sum().maxCoeff(); }

// Eigenvalues sorted by real part ascending (imaginary part breaks ties).
inline std::vector<std::complex<double>> laplacian_spectrum(const Laplacian& l) {
  std::vector<std::complex<double>> out;
  out.reserve(static_cast<std::size_t>(l.n()));
  if (l.mat == l.mat.transpose()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(l.mat, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
      throw ConvergenceError("laplacian_spectrum: symmetric eigensolver did not converge");
    }
    for (Index i = 0; i < l.n(); ++i) out.emplace_back(es.eigenvalues()(i), 0.0);
  } else {
    Eigen::EigenSolver<Matrix> es(l.mat, false);
    if (es.info() != Eigen::Success) {
      throw ConvergenceError("laplacian_spectrum: eigensolver did not converge");
    }
    for (Index i = 0; i < l.n(); ++i) out.push_back(es.eigenvalues()(i));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

inline constexpr double kZeroEigenvalueTol = 1e-9;

inline int zero_eigenvalue_multiplicity(const std::vector<std::complex<double>>& spectrum,
                                        double tol = kZeroEigenvalueTol) {
  return static_cast<int>(std::count_if(spectrum.begin(), spectrum.end(),
                                        [tol](const auto& z) { return std::abs(z) < tol; }));
}

}  // namespace dcons
