#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include "dcons/graph.hpp"
#include "dcons/matrix_functions.hpp"
#include "dcons/types.hpp"

namespace dcons {

// Sampling period h and dwell time delta_t = k_bar * h. In the continuous
// limit only delta_t drives the dynamics; h is kept for reporting.
struct SamplingScheme {
  double h = 0.0;
  std::uint64_t k_bar = 1;
  double delta_t = 0.0;
  bool continuous_limit = false;

  static SamplingScheme discrete(double h, std::uint64_t k_bar) {
    if (!(h > 0.0) || !std::isfinite(h)) throw SamplingPeriodError("sampling: h must be positive");
    if (k_bar == 0) throw SamplingPeriodError("sampling: k_bar must be positive");
    return SamplingScheme{h, k_bar, static_cast<double>(k_bar) * h, false};
  }

  // Requires delta to be an integer multiple of h.
  static SamplingScheme from_dwell(double h, double delta) {
    if (!(h > 0.0) || !(delta > 0.0)) {
      throw SamplingPeriodError("sampling: h and delta must be positive");
    }
    const double ratio = std::round(delta / h);
    if (ratio < 1.0 || std::abs(ratio * h - delta) > 1e-9 * delta) {
      std::ostringstream os;
      os << "sampling: delta = " << delta << " is not an integer multiple of h = " << h;
      throw SamplingPeriodError(os.str());
    }
    return discrete(h, static_cast<std::uint64_t>(ratio));
  }

  static SamplingScheme continuous(double delta, double h = 0.0) {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
      throw SamplingPeriodError("sampling: delta must be positive");
    }
    std::uint64_t k = 0;
    if (h > 0.0) k = static_cast<std::uint64_t>(std::llround(delta / h));
    return SamplingScheme{h, k, delta, true};
  }
};

struct StateVector {
  Vector x;
  double t = 0.0;

  Index n() const { return x.size(); }
};

// Throws unless 0 < h < 1/d_max. `context` names the caller in the message.
inline void require_sampling_period(double h, double d_max, const std::string& context) {
  if (!(h > 0.0) || !(h * d_max < 1.0)) {
    std::ostringstream os;
    os << context << ": precondition h < 1/d_max violated (h = " << h << ", d_max = " << d_max
       << ", 1/d_max = " << (d_max > 0.0 ? 1.0 / d_max : INFINITY) << ")";
    throw SamplingPeriodError(os.str());
  }
}

// x(t+h) = x(t) - h L x(t)
inline StateVector delta_step(const StateVector& x, const Laplacian& l, double h) {
  if (x.n() != l.n()) throw DimensionError("delta_step: state and Laplacian sizes differ");
  if (!(h > 0.0)) throw SamplingPeriodError("delta_step: h must be positive");
  return StateVector{x.x - h * (l.mat * x.x), x.t + h};
}

// One dwell interval: (I - hL)^k_bar, or exp(-L delta_t) in the continuous
// limit. Row-stochastic and nonnegative.
inline Matrix dwell_transition(const Laplacian& l, const SamplingScheme& s) {
  const Index n = l.n();
  Matrix w;
  if (s.continuous_limit) {
    w = expm(-s.delta_t * l.mat);
  } else {
    require_sampling_period(s.h, l.degrees.size() ? l.degrees.maxCoeff() : 0.0,
                            "dwell_transition");
    w = matrix_power(Matrix::Identity(n, n) - s.h * l.mat, s.k_bar);
  }
  clamp_rounding_negatives(w, "dwell_transition");
  return w;
}

// nu = x - mean_ref * 1, V = nu^T nu. Returns the delta-operator derivative
// (V(t+h) - V(t)) / h along one protocol step. `mean_ref` is (1^T x(0)) / n
// for the run.
inline double lyapunov_delta(const StateVector& x, const Laplacian& l, double h,
                             double mean_ref) {
  if (x.n() != l.n()) throw DimensionError("lyapunov_delta: state and Laplacian sizes differ");
  const Vector nu = x.x.array() - mean_ref;
  const Vector nu_next = delta_step(x, l, h).x.array() - mean_ref;
  return (nu_next.squaredNorm() - nu.squaredNorm()) / h;
}

inline double lyapunov_delta(const StateVector& x, const Laplacian& l, double h) {
  return lyapunov_delta(x, l, h, x.x.mean());
}

// Closed form nu^T (-2L + h L^T L) nu of the same quantity (undirected L).
inline double lyapunov_quadratic_form(const StateVector& x, const Laplacian& l, double h,
                                      double mean_ref) {
  if (x.n() != l.n()) throw DimensionError("lyapunov_quadratic_form: size mismatch");
  const Vector nu = x.x.array() - mean_ref;
  const Matrix xi = -2.0 * l.mat + h * l.mat.transpose() * l.mat;
  return nu.dot(xi * nu);
}

}  // namespace dcons
