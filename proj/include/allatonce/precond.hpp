#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "allatonce/fem1d.hpp"
#include "allatonce/operators.hpp"
#include "allatonce/parallel.hpp"

namespace aao {

/// A frequency symbol S_k could not be factorized.
class SingularSymbolError : public std::runtime_error {
 public:
  SingularSymbolError(std::size_t frequency, std::size_t row);
  [[nodiscard]] std::size_t frequency() const noexcept { return frequency_; }

 private:
  std::size_t frequency_;
};

struct ComplexTriDiag {
  std::vector<cplx> sub;
  std::vector<cplx> diag;
  std::vector<cplx> sup;

  [[nodiscard]] std::size_t size() const noexcept { return diag.size(); }
  [[nodiscard]] double max_abs() const noexcept;
  void apply(std::span<const cplx> x, std::span<cplx> y) const;
};

/// Block circulant built from the bands of a block Toeplitz stencil,
/// C = sum_j Sigma^(j mod ell) (x) A_j with Sigma the cyclic downshift.
///
/// C = (U (x) I) diag(S_0..S_{ell-1}) (U^* (x) I) with S_k = sum_j w_k^j A_j,
/// w_k = exp(2 pi i k / ell). Only S_0..S_{ell/2} are factorized; the others
/// are their conjugates. Stencil corrections are ignored.
class CirculantPreconditioner {
 public:
  CirculantPreconditioner(const BlockStencil& stencil, std::size_t ell);

  [[nodiscard]] std::size_t n() const noexcept { return n_; }
  [[nodiscard]] std::size_t ell() const noexcept { return ell_; }
  [[nodiscard]] const BlockStencil& stencil() const noexcept { return stencil_; }

  /// S_k for any k in [0, ell).
  [[nodiscard]] ComplexTriDiag symbol(std::size_t k) const;

  /// v <- S_k^{-1} v using the stored pivoted LU factors.
  void solve_frequency(std::size_t k, std::span<cplx> v) const;

  /// out = C^{-1} z using the engine's strategy.
  void apply_inverse(ParallelEngine& engine, std::span<const double> z, std::span<double> out) const;
  [[nodiscard]] MonolithicVector apply_inverse(ParallelEngine& engine,
                                               std::span<const double> z) const;

  /// y = C x (matrix-free circulant product).
  void apply(std::span<const double> x, std::span<double> y) const;

 private:
  // Tridiagonal LU with partial pivoting in LAPACK gttrf layout.
  struct Factor {
    std::vector<cplx> dl;
    std::vector<cplx> d;
    std::vector<cplx> du;
    std::vector<cplx> du2;
    std::vector<int> ipiv;
  };

  void apply_inverse_rowsplit(ParallelEngine& engine, std::span<const double> z,
                              std::span<double> out) const;
  void apply_inverse_fft(ParallelEngine& engine, std::span<const double> z,
                         std::span<double> out) const;

  std::size_t n_;
  std::size_t ell_;
  BlockStencil stencil_;
  std::vector<ComplexTriDiag> symbols_;  // k = 0..ell/2
  std::vector<Factor> factors_;
};

[[nodiscard]] CirculantPreconditioner build_circulant(const BlockStencil& stencil, std::size_t ell);

/// out chunk k = sigma[k] * K * (v chunk k).
void sigma_kron_apply(std::span<const double> sigma, const TriDiagMatrix& k,
                      std::span<const double> v, std::span<double> out);

/// Truncated Neumann series for (P + sigma (x) K)^{-1}:
/// t_1 = P^{-1} z, t_{m+1} = -P^{-1} (sigma (x) K) t_m, result = t_1 + ... + t_order.
class NeumannPreconditioner {
 public:
  NeumannPreconditioner(std::shared_ptr<const CirculantPreconditioner> base, TriDiagMatrix k,
                        std::vector<double> sigma, std::size_t order);

  [[nodiscard]] std::size_t order() const noexcept { return order_; }
  [[nodiscard]] const CirculantPreconditioner& base() const noexcept { return *base_; }

  /// max |sigma_i| times a Gershgorin bound on ||K||_2. The series is only
  /// guaranteed to converge when this is below one.
  [[nodiscard]] double coupling_norm_bound() const noexcept;

  void apply(ParallelEngine& engine, std::span<const double> z, std::span<double> out) const;

 private:
  std::shared_ptr<const CirculantPreconditioner> base_;
  TriDiagMatrix k_;
  std::vector<double> sigma_;
  std::size_t order_;
};

void apply_neumann(const NeumannPreconditioner& q, ParallelEngine& engine,
                   std::span<const double> z, std::span<double> out);

}  // namespace aao
