#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "dcons/dynamics.hpp"
#include "dcons/graph.hpp"
#include "dcons/matrix_functions.hpp"
#include "dcons/switching.hpp"
#include "dcons/types.hpp"

namespace dcons {

// ---------------------------------------------------------------------------
// Norms. Both are squared: ||x|| = x^T x and ||A|| = lambda_max(A^T A).

inline double norm_sq_vec(const Vector& x) { return x.squaredNorm(); }

inline double norm_sq_mat(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.transpose() * a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("norm_sq_mat: eigensolver failed");
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

// max_i |lambda_i(A)|^2
inline double lambda_bar(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("lambda_bar: matrix must be square");
  if (a.size() == 0) return 0.0;
  double best = 0.0;
  if (a == a.transpose()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConvergenceError("lambda_bar: eigensolver failed");
    for (Index i = 0; i < a.rows(); ++i) best = std::max(best, es.eigenvalues()(i) * es.eigenvalues()(i));
  } else {
    Eigen::EigenSolver<Matrix> es(a, false);
    if (es.info() != Eigen::Success) throw ConvergenceError("lambda_bar: eigensolver failed");
    for (Index i = 0; i < a.rows(); ++i) best = std::max(best, std::norm(es.eigenvalues()(i)));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Expected transitions and stationary vectors.

enum class TransitionMode { sampled, continuous_limit };

inline const char* to_string(TransitionMode m) {
  return m == TransitionMode::sampled ? "sampled" : "continuous-limit";
}

struct ExpectedTransition {
  Matrix w;
  TransitionMode mode = TransitionMode::sampled;
  std::vector<Matrix> components;  // per-graph dwell transitions
  std::vector<double> probs;
};

inline constexpr double kRowSumTol = 1e-12;

inline ExpectedTransition expected_transition(const SwitchingEnsemble& e, const SamplingScheme& s) {
  require_ensemble_sampling(e, s, "expected_transition");
  ExpectedTransition out;
  out.mode = s.continuous_limit ? TransitionMode::continuous_limit : TransitionMode::sampled;
  out.probs = e.probs();
  out.w = Matrix::Zero(e.n(), e.n());
  out.components.reserve(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    out.components.push_back(dwell_transition(e.laplacians()[i], s));
    out.w += e.probs()[i] * out.components.back();
  }
  return out;
}

struct StationaryVector {
  Vector pi;
  double residual = 0.0;  // ||pi^T W - pi^T||_2
};

inline constexpr double kStationaryCrossCheckTol = 1e-8;

namespace detail {

// Row of lim W^k, by repeated squaring until all rows agree.
inline Vector limit_row(const Matrix& w) {
  Matrix p = w;
  for (int i = 0; i < 64; ++i) {
    const Vector mean = p.colwise().mean().transpose();
    double spread = 0.0;
    for (Index r = 0; r < p.rows(); ++r) spread = std::max(spread, (p.row(r).transpose() - mean).cwiseAbs().maxCoeff());
    if (spread < 1e-13) return mean / mean.sum();
    p = p * p;
  }
  throw ConvergenceError("stationary_vector: powers of W did not converge");
}

}  // namespace detail

// Positive left eigenvector of W at eigenvalue 1 with entries summing to 1.
// Solved from [W^T - I; 1^T] pi = e_{n+1} and cross-checked against lim W^k.
inline StationaryVector stationary_vector(const Matrix& w) {
  if (w.rows() != w.cols()) throw DimensionError("stationary_vector: W must be square");
  const Index n = w.rows();
  if (!is_primitive(w)) {
    throw ConnectivityError(
        "stationary_vector: W is not primitive (expected graph not strongly connected)");
  }
  Matrix m(n + 1, n);
  m.topRows(n) = w.transpose() - Matrix::Identity(n, n);
  m.row(n).setOnes();
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = 1.0;
  Vector pi = m.colPivHouseholderQr().solve(rhs);

  const double sum = pi.sum();
  if (!std::isfinite(sum) || std::abs(sum - 1.0) > 1e-10) {
    throw ConvergenceError("stationary_vector: normalization failed");
  }
  pi /= sum;

  const Vector via_powers = detail::limit_row(w);
  const double gap = (pi - via_powers).cwiseAbs().maxCoeff();
  if (gap > kStationaryCrossCheckTol) {
    std::ostringstream os;
    os << "stationary_vector: linear solve and power limit disagree by " << gap;
    throw ConvergenceError(os.str());
  }
  if (pi.minCoeff() <= 0.0) throw ConvergenceError("stationary_vector: non-positive entry");
  StationaryVector out;
  out.residual = (w.transpose() * pi - pi).norm();
  out.pi = std::move(pi);
  return out;
}

inline StationaryVector stationary_vector(const ExpectedTransition& w) { return stationary_vector(w.w); }

inline double consensus_value(const StationaryVector& pi, const StateVector& x0) {
  if (pi.pi.size() != x0.n()) throw DimensionError("consensus_value: size mismatch");
  return pi.pi.dot(x0.x);
}

// ---------------------------------------------------------------------------
// Group inverse and stationary-vector perturbation.

inline constexpr double kGroupInverseIdentityTol = 1e-9;
inline constexpr double kSeriesTermTol = 1e-16;
inline constexpr long kSeriesTermCap = 100000;

struct GroupInverseIdentities {
  double aga_minus_a = 0.0;    // max |A G A - A|
  double gag_minus_g = 0.0;    // max |G A G - G|
  double commutator = 0.0;     // max |A G - G A|

  double worst() const { return std::max({aga_minus_a, gag_minus_g, commutator}); }
};

inline GroupInverseIdentities group_inverse_identities(const Matrix& a, const Matrix& g) {
  return {max_abs(a * g * a - a), max_abs(g * a * g - g), max_abs(a * g - g * a)};
}

// Group inverse of A = I - T as sum_{k>=0} (T^k - 1 pi^T) for a regular chain
// T, summed in doubling blocks: with P = 1 pi^T and D_N = T^N - P,
//   S_2N = S_N + D_N S_N,   D_2N = D_N^2.
// Stops once the block term's squared Frobenius norm (an upper bound on
// norm_sq_mat) drops below 1e-16; one more doubling has already been added
// by then, so the neglected tail is O(||D_N||^2).
inline Matrix group_inverse(const Matrix& t) {
  if (t.rows() != t.cols()) throw DimensionError("group_inverse: T must be square");
  const Index n = t.rows();
  if (!is_primitive(t)) throw ConnectivityError("group_inverse: T is not a regular chain");
  const StationaryVector s = stationary_vector(t);
  const Matrix t_inf = ones(n) * s.pi.transpose();

  Matrix sum = Matrix::Identity(n, n) - t_inf;
  Matrix d = t - t_inf;
  long terms = 1;
  for (;;) {
    sum += d * sum;
    terms *= 2;
    if (d.squaredNorm() < kSeriesTermTol) break;
    if (terms >= kSeriesTermCap) {
      throw ConvergenceError("group_inverse: series did not converge within the term cap");
    }
    d = d * d;
  }

  const Matrix a = Matrix::Identity(n, n) - t;
  const auto ids = group_inverse_identities(a, sum);
  if (ids.worst() > kGroupInverseIdentityTol) {
    std::ostringstream os;
    os << "group_inverse: defining identities violated by " << ids.worst();
    throw ConvergenceError(os.str());
  }
  return sum;
}

inline constexpr double kPerturbationRowSumTol = 1e-12;

// s - s~ = s E A# (I + E A#)^{-1} for T~ = T - E, A = I - T.
inline Vector perturbation_shift(const Matrix& t, const Matrix& e) {
  if (t.rows() != t.cols() || e.rows() != t.rows() || e.cols() != t.cols()) {
    throw DimensionError("perturbation_shift: T and E must be square of equal size");
  }
  const Index n = t.rows();
  if ((e * ones(n)).cwiseAbs().maxCoeff() > kPerturbationRowSumTol) {
    throw HypothesisError("perturbation_shift: E 1 = 0 violated");
  }
  const Matrix t_pert = t - e;
  if (!is_primitive(t_pert) || (t_pert.array() < -kNegativeClampTol).any()) {
    throw HypothesisError("perturbation_shift: T - E is not a regular-chain transition matrix");
  }
  const Matrix g = group_inverse(t);
  const Vector s = stationary_vector(t).pi;
  const Matrix eg = e * g;
  const Eigen::FullPivLU<Matrix> lu(Matrix::Identity(n, n) + eg);
  if (!lu.isInvertible()) throw HypothesisError("perturbation_shift: I + E A# is singular");
  // Row vector times inverse: solve (I + E A#)^T y = (s^T E A#)^T.
  const Vector lhs = eg.transpose() * s;
  return lu.transpose().solve(lhs);
}

// ---------------------------------------------------------------------------
// Error bounds.

enum class BoundKind { t4_sampled, t4_continuous, t5, c1 };

inline const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::t4_sampled: return "T4-sampled";
    case BoundKind::t4_continuous: return "T4-continuous";
    case BoundKind::t5: return "T5";
    case BoundKind::c1: return "C1";
  }
  return "?";
}

inline constexpr double kSoundnessTol = 1e-10;

struct BoundReport {
  BoundKind theorem = BoundKind::t4_sampled;
  double d_norm = 0.0;      // norm_sq_mat(D), or c / c~ for the closed forms
  double lambda_bar = 0.0;  // lambda_bar(W_bar - 11^T/n)
  double bound_e = 0.0;
  std::optional<double> bound_e_statement;  // alternative probability factor
  std::optional<double> bound_state;        // n * bound_e * ||x0||
  double measured_e = 0.0;                  // ||pi - 1/n||
  std::optional<double> measured_state;     // ||1 (pi - 1/n)^T x0||
  Vector pi;
  std::optional<double> predicted_value;  // pi^T x0
  double prob_factor = 0.0;               // closed forms only
  double prob_factor_statement = 0.0;

  bool sound() const { return bound_e + kSoundnessTol >= measured_e; }
};

namespace detail {

inline void attach_state(BoundReport& r, const std::optional<StateVector>& x0, Index n) {
  if (!x0) return;
  if (x0->n() != n) throw DimensionError("bound: x0 length differs from ensemble n");
  const double sq = norm_sq_vec(x0->x);
  r.bound_state = static_cast<double>(n) * r.bound_e * sq;
  const double shift = (r.pi.array() - 1.0 / static_cast<double>(n)).matrix().dot(x0->x);
  r.measured_state = static_cast<double>(n) * shift * shift;
  r.predicted_value = r.pi.dot(x0->x);
}

inline double contraction_of_base(const Matrix& w_bar) {
  const Index n = w_bar.rows();
  const double lb = lambda_bar(w_bar - averaging_matrix(n));
  if (!(lb < 1.0)) {
    std::ostringstream os;
    os << "bound: lambda_bar(W_bar - 11^T/n) = " << lb << " >= 1, bound hypothesis fails";
    throw HypothesisError(os.str());
  }
  return lb;
}

inline void require_expected_connected(const SwitchingEnsemble& e, const std::string& ctx) {
  if (!is_strongly_connected(expected_graph(e))) {
    throw ConnectivityError(ctx + ": expected graph is not strongly connected");
  }
}

}  // namespace detail

inline constexpr double kDeviationRowSumTol = 1e-12;

// ||pi^T - 1^T/n|| <= ||D|| / (1 - lambda_bar(W_bar - 11^T/n)) with
// W_bar the base-graph dwell transition and D = sum_i p_i (W_i - W_bar).
inline BoundReport bound_theorem4(const SwitchingEnsemble& e, const SamplingScheme& s,
                                  const std::optional<StateVector>& x0 = std::nullopt) {
  detail::require_expected_connected(e, "bound_theorem4");
  const ExpectedTransition w = expected_transition(e, s);
  const Index n = e.n();
  const Matrix& w_bar = w.components[e.base_index()];

  Matrix d = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (i == e.base_index()) continue;
    d += (w.components[i] - w_bar) * e.probs()[i];
  }
  if ((d * ones(n)).cwiseAbs().maxCoeff() > kDeviationRowSumTol) {
    throw ConvergenceError("bound_theorem4: D 1 = 0 violated beyond rounding");
  }

  BoundReport r;
  r.theorem = s.continuous_limit ? BoundKind::t4_continuous : BoundKind::t4_sampled;
  r.lambda_bar = detail::contraction_of_base(w_bar);
  r.d_norm = norm_sq_mat(d);
  r.bound_e = r.d_norm / (1.0 - r.lambda_bar);
  r.pi = stationary_vector(w).pi;
  r.measured_e = norm_sq_vec(r.pi.array() - 1.0 / static_cast<double>(n));
  detail::attach_state(r, x0, n);
  return r;
}

namespace detail {

inline void require_closed_form(const SwitchingEnsemble& e, const SamplingScheme& s,
                                FaultKind kind, const std::string& ctx) {
  if (s.continuous_limit || s.k_bar != 1) {
    throw HypothesisError(ctx + ": requires delta = h (k_bar = 1) in sampled mode");
  }
  const auto& sc = e.scenario();
  if (!sc || sc->kind != kind || e.size() != 4 || e.base_index() != 3) {
    throw HypothesisError(ctx + ": ensemble is not in " + to_string(kind) + "-fault scenario form");
  }
  const Graph& base = e.base();
  const bool ok = e.graphs()[0] == faulted(base, kind, {sc->first}) &&
                  e.graphs()[1] == faulted(base, kind, {sc->second}) &&
                  e.graphs()[2] == faulted(base, kind, {sc->first, sc->second});
  if (!ok) throw HypothesisError(ctx + ": fault graphs do not match the base graph");
  require_expected_connected(e, ctx);
}

// Sum of squares in index order, so a row and the matching column of a
// symmetric matrix give bit-identical results.
template <typename Vec>
double sum_of_squares(const Vec& v) {
  double acc = 0.0;
  for (Index j = 0; j < v.size(); ++j) acc += v(j) * v(j);
  return acc;
}

inline BoundReport closed_form_bound(const SwitchingEnsemble& e, const SamplingScheme& s,
                                     BoundKind kind, double c, double prefactor) {
  const double a = e.probs()[0], b = e.probs()[1], g = e.probs()[2];
  const Index n = e.n();
  const Matrix w_bar = dwell_transition(e.laplacians()[e.base_index()], s);

  BoundReport r;
  r.theorem = kind;
  r.lambda_bar = contraction_of_base(w_bar);
  r.d_norm = c;
  r.prob_factor = std::max((a + g) * (a + g), (b + g) * (b + g));
  r.prob_factor_statement = std::max((a + b) * (a + b), (b + g) * (b + g));
  r.bound_e = prefactor * c * r.prob_factor / (1.0 - r.lambda_bar);
  r.bound_e_statement = prefactor * c * r.prob_factor_statement / (1.0 - r.lambda_bar);
  r.pi = stationary_vector(expected_transition(e, s)).pi;
  r.measured_e = norm_sq_vec(r.pi.array() - 1.0 / static_cast<double>(n));
  return r;
}

}  // namespace detail

// Receive-fault scenario with delta = h:
//   2 c max{(a+g)^2, (b+g)^2} / (1 - lambda_bar),  c = h^2 max_k sum_j l_kj^2
// over the two faulty rows of the base Laplacian. The (a+b, b+g) variant is
// reported as bound_e_statement.
inline BoundReport bound_theorem5(const SwitchingEnsemble& e, const SamplingScheme& s,
                                  const std::optional<StateVector>& x0 = std::nullopt) {
  detail::require_closed_form(e, s, FaultKind::receive, "bound_theorem5");
  const Matrix& l = e.laplacians()[e.base_index()].mat;
  const auto& sc = *e.scenario();
  const double c = s.h * s.h * std::max(detail::sum_of_squares(l.row(sc.first)),
                                             detail::sum_of_squares(l.row(sc.second)));
  BoundReport r = detail::closed_form_bound(e, s, BoundKind::t5, c, 2.0);
  detail::attach_state(r, x0, e.n());
  return r;
}

// Send-fault counterpart: column sums of squares and prefactor 4.
inline BoundReport bound_corollary1(const SwitchingEnsemble& e, const SamplingScheme& s,
                                    const std::optional<StateVector>& x0 = std::nullopt) {
  detail::require_closed_form(e, s, FaultKind::send, "bound_corollary1");
  const Matrix& l = e.laplacians()[e.base_index()].mat;
  const auto& sc = *e.scenario();
  const double c = s.h * s.h * std::max(detail::sum_of_squares(l.col(sc.first)),
                                             detail::sum_of_squares(l.col(sc.second)));
  BoundReport r = detail::closed_form_bound(e, s, BoundKind::c1, c, 4.0);
  detail::attach_state(r, x0, e.n());
  return r;
}

}  // namespace dcons
