#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "allatonce/fem1d.hpp"
#include "allatonce/timegrid.hpp"

namespace aao {

class ParallelEngine;

/// n*ell real values, chunk k (0-based) holding the spatial vector u_{k+1}.
using MonolithicVector = std::vector<double>;

[[nodiscard]] inline std::span<double> chunk(std::span<double> v, std::size_t n, std::size_t k) {
  return v.subspan(k * n, n);
}
[[nodiscard]] inline std::span<const double> chunk(std::span<const double> v, std::size_t n,
                                                   std::size_t k) {
  return v.subspan(k * n, n);
}

enum class SystemKind { heat, wave_cd, wave_bd2, wave_bd4 };

[[nodiscard]] SystemKind parse_system_kind(std::string_view name);

/// Block band at signed offset: block row r couples to block column r - offset.
/// Positive offsets lie below the diagonal.
struct Band {
  int offset = 0;
  TriDiagMatrix block;
};

/// Replaces the Toeplitz block at (row, col).
struct BlockCorrection {
  std::size_t row = 0;
  std::size_t col = 0;
  TriDiagMatrix block;
};

struct BlockStencil {
  std::vector<Band> bands;
  std::vector<BlockCorrection> corrections;

  [[nodiscard]] std::size_t n() const;
  /// Throws std::invalid_argument if offsets repeat, offset 0 is missing or
  /// the blocks disagree in size.
  void validate() const;
  [[nodiscard]] const TriDiagMatrix& band(int offset) const;
};

/// Matrix-free all-at-once operator on n*ell vectors.
///
/// The diagonal band may be overridden per step (non-uniform heat), and
/// individual block positions by stencil corrections (BD4 start-up rows).
class BlockToeplitzOperator {
 public:
  BlockToeplitzOperator(std::size_t ell, BlockStencil stencil,
                        std::vector<TriDiagMatrix> per_step_diag = {});

  [[nodiscard]] std::size_t n() const noexcept { return n_; }
  [[nodiscard]] std::size_t ell() const noexcept { return ell_; }
  [[nodiscard]] std::size_t size() const noexcept { return n_ * ell_; }
  [[nodiscard]] const BlockStencil& stencil() const noexcept { return stencil_; }
  [[nodiscard]] const std::vector<TriDiagMatrix>& per_step_diag() const noexcept {
    return per_step_diag_;
  }

  void apply(std::span<const double> x, std::span<double> y) const;
  /// Block rows partitioned across the engine's workers; bitwise identical
  /// to the serial apply.
  void apply(ParallelEngine& engine, std::span<const double> x, std::span<double> y) const;
  void apply_rows(std::size_t begin, std::size_t end, std::span<const double> x,
                  std::span<double> y) const;

  /// Block (row, col) as the operator sees it, or nullptr if zero.
  [[nodiscard]] const TriDiagMatrix* block_at(std::size_t row, std::size_t col) const;

 private:
  std::size_t n_;
  std::size_t ell_;
  BlockStencil stencil_;
  std::vector<TriDiagMatrix> per_step_diag_;
  std::vector<std::vector<std::size_t>> row_corrections_;  // indices into stencil_.corrections
};

/// Implicit Euler: diagonal blocks M + tau_k K, sub-diagonal -M. With a
/// uniform grid the operator is block Toeplitz; otherwise the per-step
/// diagonal is stored and band 0 keeps the base-step block M + K / ell.
[[nodiscard]] BlockToeplitzOperator build_heat(const TriDiagMatrix& m, const TriDiagMatrix& k,
                                               const TimeGrid& grid);
/// Central differences: tridiagonal with diagonal tau^2 K - 2M and M on both sides.
[[nodiscard]] BlockToeplitzOperator build_wave_cd(const TriDiagMatrix& m, const TriDiagMatrix& k,
                                                  double tau, std::size_t ell);
/// Two-step backward difference: bands M + tau^2 K, -2M, M.
[[nodiscard]] BlockToeplitzOperator build_wave_bd2(const TriDiagMatrix& m, const TriDiagMatrix& k,
                                                   double tau, std::size_t ell);
/// Four-step backward difference: bands 2M + tau^2 K, -5M, 4M, -M, with the
/// first two block rows replaced by the BD2 start-up [B] and [C B],
/// B = M + tau^2 K, C = -2M.
[[nodiscard]] BlockToeplitzOperator build_wave_bd4(const TriDiagMatrix& m, const TriDiagMatrix& k,
                                                   double tau, std::size_t ell);

[[nodiscard]] BlockToeplitzOperator build_operator(SystemKind kind, const TriDiagMatrix& m,
                                                   const TriDiagMatrix& k, const TimeGrid& grid);

/// Right-hand side carrying the initial data:
///   heat  [M u0; 0; ...]
///   cd    [-M u0; 0; ...]
///   bd2   [(M + tau^2 K) u0; -M u0; 0; ...]
///   bd4   [(M + tau^2 K) u0; -M u0; M u0; 0; ...]
[[nodiscard]] MonolithicVector build_rhs(SystemKind kind, const TriDiagMatrix& m,
                                         const TriDiagMatrix& k, double tau,
                                         std::span<const double> u0, std::size_t ell);

}  // namespace aao
