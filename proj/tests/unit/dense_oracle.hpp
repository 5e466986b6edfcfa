#pragma once

// Dense reference constructions used as test oracles. Nothing here calls
// into the library's assembly or transform code: matrices are built entry
// by entry from their defining formulas and solved with Eigen.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "allatonce/fem1d.hpp"

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;

inline Mat dense(const aao::TriDiagMatrix& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Mat a = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = t.diag[i];
    if (i + 1 < n) {
      a(i + 1, i) = t.sub[i];
      a(i, i + 1) = t.sup[i];
    }
  }
  return a;
}

// Element-by-element assembly of the P1 matrices on the full mesh followed by
// removal of the two boundary rows and columns.
inline Mat full_mass(std::size_t n) {
  const auto nodes = static_cast<Eigen::Index>(n + 2);
  const double h = 1.0 / static_cast<double>(n + 1);
  Mat m = Mat::Zero(nodes, nodes);
  for (Eigen::Index e = 0; e + 1 < nodes; ++e) {
    m(e, e) += h / 3.0;
    m(e + 1, e + 1) += h / 3.0;
    m(e, e + 1) += h / 6.0;
    m(e + 1, e) += h / 6.0;
  }
  return m;
}

inline Mat full_stiffness(std::size_t n) {
  const auto nodes = static_cast<Eigen::Index>(n + 2);
  const double h = 1.0 / static_cast<double>(n + 1);
  Mat k = Mat::Zero(nodes, nodes);
  for (Eigen::Index e = 0; e + 1 < nodes; ++e) {
    k(e, e) += 1.0 / h;
    k(e + 1, e + 1) += 1.0 / h;
    k(e, e + 1) -= 1.0 / h;
    k(e + 1, e) -= 1.0 / h;
  }
  return k;
}

inline Mat interior(const Mat& full) {
  const auto n = full.rows() - 2;
  return full.block(1, 1, n, n);
}

inline Mat mass(std::size_t n) { return interior(full_mass(n)); }
inline Mat stiffness(std::size_t n) { return interior(full_stiffness(n)); }

// Places block b at block position (r, c) of an (ell n) x (ell n) matrix.
inline void put(Mat& a, std::size_t r, std::size_t c, const Mat& b) {
  const auto n = b.rows();
  a.block(static_cast<Eigen::Index>(r) * n, static_cast<Eigen::Index>(c) * n, n, n) += b;
}

inline Mat heat(const Mat& m, const Mat& k, const std::vector<double>& steps) {
  const std::size_t ell = steps.size();
  const auto n = m.rows();
  Mat a = Mat::Zero(static_cast<Eigen::Index>(ell) * n, static_cast<Eigen::Index>(ell) * n);
  for (std::size_t r = 0; r < ell; ++r) {
    put(a, r, r, m + steps[r] * k);
    if (r > 0) put(a, r, r - 1, -m);
  }
  return a;
}

inline Mat wave_cd(const Mat& m, const Mat& k, double tau, std::size_t ell) {
  const auto n = m.rows();
  Mat a = Mat::Zero(static_cast<Eigen::Index>(ell) * n, static_cast<Eigen::Index>(ell) * n);
  for (std::size_t r = 0; r < ell; ++r) {
    put(a, r, r, tau * tau * k - 2.0 * m);
    if (r > 0) put(a, r, r - 1, m);
    if (r + 1 < ell) put(a, r, r + 1, m);
  }
  return a;
}

inline Mat wave_bd2(const Mat& m, const Mat& k, double tau, std::size_t ell) {
  const auto n = m.rows();
  Mat a = Mat::Zero(static_cast<Eigen::Index>(ell) * n, static_cast<Eigen::Index>(ell) * n);
  for (std::size_t r = 0; r < ell; ++r) {
    put(a, r, r, m + tau * tau * k);
    if (r >= 1) put(a, r, r - 1, -2.0 * m);
    if (r >= 2) put(a, r, r - 2, m);
  }
  return a;
}

inline Mat wave_bd4(const Mat& m, const Mat& k, double tau, std::size_t ell) {
  const auto n = m.rows();
  const Mat b = m + tau * tau * k;
  Mat a = Mat::Zero(static_cast<Eigen::Index>(ell) * n, static_cast<Eigen::Index>(ell) * n);
  put(a, 0, 0, b);
  put(a, 1, 0, -2.0 * m);
  put(a, 1, 1, b);
  for (std::size_t r = 2; r < ell; ++r) {
    put(a, r, r, 2.0 * m + tau * tau * k);
    put(a, r, r - 1, -5.0 * m);
    put(a, r, r - 2, 4.0 * m);
    if (r >= 3) put(a, r, r - 3, -m);
  }
  return a;
}

// Block circulant with block (r, c) = sum of A_j over bands j with
// (r - c - offset_j) = 0 mod ell.
struct DenseBand {
  int offset;
  Mat block;
};

inline Mat circulant(const std::vector<DenseBand>& bands, std::size_t ell) {
  const auto n = bands.front().block.rows();
  const auto L = static_cast<long>(ell);
  Mat a = Mat::Zero(static_cast<Eigen::Index>(ell) * n, static_cast<Eigen::Index>(ell) * n);
  for (long r = 0; r < L; ++r) {
    for (long c = 0; c < L; ++c) {
      for (const auto& b : bands) {
        if ((((r - c - b.offset) % L) + L) % L == 0) put(a, r, c, b.block);
      }
    }
  }
  return a;
}

// Unitary DFT U(j, k) = exp(-2 pi i j k / ell) / sqrt(ell), Kronecker I_n.
inline CMat dft_kron(std::size_t ell, std::size_t n) {
  const auto N = static_cast<Eigen::Index>(ell * n);
  CMat u = CMat::Zero(N, N);
  const double s = 1.0 / std::sqrt(static_cast<double>(ell));
  for (std::size_t j = 0; j < ell; ++j) {
    for (std::size_t k = 0; k < ell; ++k) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(j * k) / static_cast<double>(ell);
      const std::complex<double> w = std::polar(s, ang);
      for (std::size_t i = 0; i < n; ++i) {
        u(static_cast<Eigen::Index>(j * n + i), static_cast<Eigen::Index>(k * n + i)) = w;
      }
    }
  }
  return u;
}

// Sequential implicit Euler: (M + tau_k K) u_k = M u_{k-1}.
inline std::vector<Vec> implicit_euler(const Mat& m, const Mat& k, const std::vector<double>& steps,
                                       const Vec& u0) {
  std::vector<Vec> out;
  Vec prev = u0;
  for (double tau : steps) {
    prev = (m + tau * k).partialPivLu().solve(m * prev);
    out.push_back(prev);
  }
  return out;
}

inline Vec to_eigen(std::span<const double> v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

inline std::vector<double> random_vector(std::size_t size, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(size);
  for (double& x : v) x = d(rng);
  return v;
}

inline double rel_err(const Vec& got, const Vec& want) {
  const double den = want.norm();
  return den == 0.0 ? got.norm() : (got - want).norm() / den;
}

}  // namespace oracle
