#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/LU>

#include "dcons/types.hpp"

namespace dcons {

// m^k by repeated squaring over the binary expansion of k.
inline Matrix matrix_power(const Matrix& m, std::uint64_t k) {
  if (m.rows() != m.cols()) throw DimensionError("matrix_power: matrix must be square");
  Matrix result = Matrix::Identity(m.rows(), m.cols());
  Matrix base = m;
  while (k > 0) {
    if (k & 1u) result = result * base;
    k >>= 1u;
    if (k > 0) base = base * base;
  }
  return result;
}

namespace detail {

inline double norm1(const Matrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

// Pade coefficients b_0..b_m of the diagonal [m/m] approximant to exp.
inline constexpr std::array<double, 4> kPade3{120.0, 60.0, 12.0, 1.0};
inline constexpr std::array<double, 6> kPade5{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
inline constexpr std::array<double, 8> kPade7{17297280.0, 8648640.0, 1995840.0, 277200.0,
                                              25200.0,    1512.0,    56.0,      1.0};
inline constexpr std::array<double, 10> kPade9{17643225600.0, 8821612800.0, 2075673600.0,
                                               302702400.0,   30270240.0,   2162160.0,
                                               110880.0,      3960.0,       90.0,
                                               1.0};
inline constexpr std::array<double, 14> kPade13{
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

// Largest 1-norm for which the [m/m] approximant meets unit roundoff.
inline constexpr double kTheta3 = 1.495585217958292e-2;
inline constexpr double kTheta5 = 2.539398330063230e-1;
inline constexpr double kTheta7 = 9.504178996162932e-1;
inline constexpr double kTheta9 = 2.097847961257068e0;
inline constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t N>
Matrix pade_low_order(const Matrix& a, const std::array<double, N>& b) {
  const Index n = a.rows();
  const Matrix a2 = a * a;
  Matrix u = b[1] * Matrix::Identity(n, n);
  Matrix v = b[0] * Matrix::Identity(n, n);
  Matrix p = Matrix::Identity(n, n);
  for (std::size_t k = 2; k < N; k += 2) {
    p = p * a2;
    v += b[k] * p;
    if (k + 1 < N) u += b[k + 1] * p;
  }
  u = a * u;
  return (v - u).partialPivLu().solve(v + u);
}

inline Matrix pade13(const Matrix& a) {
  const auto& b = kPade13;
  const Index n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const Matrix v =
      a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  return (v - u).partialPivLu().solve(v + u);
}

}  // namespace detail

// Matrix exponential by scaling and squaring with diagonal Pade approximants
// of degree 3, 5, 7, 9 or 13, selected from the 1-norm of the argument.
inline Matrix expm(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("expm: matrix must be square");
  if (a.size() == 0) return a;
  if (!a.allFinite()) throw Error("expm: non-finite input");
  const double nrm = detail::norm1(a);
  if (nrm <= detail::kTheta3) return detail::pade_low_order(a, detail::kPade3);
  if (nrm <= detail::kTheta5) return detail::pade_low_order(a, detail::kPade5);
  if (nrm <= detail::kTheta7) return detail::pade_low_order(a, detail::kPade7);
  if (nrm <= detail::kTheta9) return detail::pade_low_order(a, detail::kPade9);
  int s = 0;
  if (nrm > detail::kTheta13) s = static_cast<int>(std::ceil(std::log2(nrm / detail::kTheta13)));
  Matrix r = detail::pade13(a / std::ldexp(1.0, s));
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

inline constexpr double kNegativeClampTol = 1e-12;

// Entries in (-tol, 0) are rounding noise and become 0; anything more
// negative means the matrix was never nonnegative.
inline void clamp_rounding_negatives(Matrix& m, const std::string& what,
                                     double tol = kNegativeClampTol) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      double& v = m(i, j);
      if (v < 0.0) {
        if (v < -tol) {
          throw Error(what + ": entry (" + std::to_string(i) + "," + std::to_string(j) +
                      ") = " + std::to_string(v) + " is negative beyond rounding");
        }
        v = 0.0;
      }
    }
  }
}

// Wielandt: a nonnegative n x n matrix is primitive iff its
// (n^2 - 2n + 2)-th power is entrywise positive. Evaluated on the 0/1
// sparsity pattern so that underflow cannot fake a zero.
inline bool is_primitive(const Matrix& w) {
  if (w.rows() != w.cols()) throw DimensionError("is_primitive: matrix must be square");
  const Index n = w.rows();
  if (n == 0) return false;
  const auto pattern = [](const Matrix& m) {
    return Matrix((m.array() > 0.0).cast<double>().matrix());
  };
  std::uint64_t k = static_cast<std::uint64_t>(n * n - 2 * n + 2);
  Matrix result = Matrix::Identity(n, n);
  Matrix base = pattern(w);
  while (k > 0) {
    if (k & 1u) result = pattern(result * base);
    k >>= 1u;
    if (k > 0) base = pattern(base * base);
  }
  return (result.array() > 0.0).all();
}

}  // namespace dcons
