#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace aao {

using cplx = std::complex<double>;

class CirculantPreconditioner;

/// How (U (x) I_n) is applied inside the preconditioner.
///
/// row_split_dft: every worker owns a contiguous range of output chunks and
/// forms each one as a combination of all input chunks with its row of U.
/// transpose_fft: the vector is transposed to space-major order and each
/// length-ell column is transformed with an FFT.
enum class Strategy { row_split_dft, transpose_fft };

enum class Layout { time_major, space_major };

/// forward applies U^* (time -> frequency), inverse applies U.
///
/// U is the unitary DFT with U(j, k) = exp(-2 pi i j k / ell) / sqrt(ell), whose
/// k-th column is an eigenvector of the cyclic downshift with eigenvalue
/// exp(2 pi i k / ell).
enum class Direction { forward, inverse };

[[nodiscard]] Strategy parse_strategy(std::string_view name);
[[nodiscard]] std::string_view to_string(Strategy s) noexcept;

/// n*ell complex values, viewed either as ell chunks of length n
/// (time_major, index k*n + i) or as n chunks of length ell (space_major,
/// index i*ell + k).
struct ChunkedVector {
  Layout layout = Layout::time_major;
  std::size_t n = 0;
  std::size_t ell = 0;
  std::vector<cplx> data;

  ChunkedVector() = default;
  ChunkedVector(Layout layout_, std::size_t n_, std::size_t ell_);

  static ChunkedVector from_real(std::span<const double> values, std::size_t n, std::size_t ell);

  [[nodiscard]] std::span<cplx> chunk(std::size_t c);
  [[nodiscard]] std::span<const cplx> chunk(std::size_t c) const;
  [[nodiscard]] std::size_t chunk_count() const noexcept {
    return layout == Layout::time_major ? ell : n;
  }
  [[nodiscard]] std::size_t chunk_size() const noexcept {
    return layout == Layout::time_major ? n : ell;
  }
};

/// Fixed pool of p workers executing one collective at a time.
///
/// The calling thread acts as rank 0; p = 1 runs everything inline. Index
/// ranges are contiguous with the remainder spread over the first ranks, so a
/// given index is always processed by the same code path and the results of
/// disjoint-write kernels do not depend on p.
class ParallelEngine {
 public:
  struct Range {
    std::size_t begin;
    std::size_t end;
  };

  explicit ParallelEngine(std::size_t workers = 1, Strategy strategy = Strategy::row_split_dft);
  ~ParallelEngine();
  ParallelEngine(const ParallelEngine&) = delete;
  ParallelEngine& operator=(const ParallelEngine&) = delete;

  [[nodiscard]] std::size_t workers() const noexcept { return workers_; }
  [[nodiscard]] Strategy strategy() const noexcept { return strategy_; }

  [[nodiscard]] static Range partition(std::size_t count, std::size_t workers, std::size_t rank);

  /// Runs fn(begin, end) for every rank's share of [0, count) and waits for
  /// all of them. The first exception thrown by any rank is rethrown here.
  void run(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn);

  /// Cached in-place FFT plan of length ell; opaque fftw_plan.
  void* fft_plan(std::size_t ell, Direction dir);

 private:
  struct Pool;
  struct Plans;
  std::size_t workers_;
  Strategy strategy_;
  std::unique_ptr<Pool> pool_;
  std::unique_ptr<Plans> plans_;
};

/// (U (x) I_n) z or (U^* (x) I_n) z for a time-major vector. Each output
/// chunk accumulates input chunks in ascending order.
[[nodiscard]] ChunkedVector dft_apply(ParallelEngine& engine, Direction dir, const ChunkedVector& z);

/// Swap between time-major and space-major order.
[[nodiscard]] ChunkedVector vector_transpose(ParallelEngine& engine, const ChunkedVector& z);

/// Applies U or U^* to every length-ell column of a space-major vector.
[[nodiscard]] ChunkedVector fft_apply(ParallelEngine& engine, Direction dir, const ChunkedVector& z);

/// Replaces frequency chunk k by S_k^{-1} chunk k.
[[nodiscard]] ChunkedVector frequency_solve(ParallelEngine& engine, const CirculantPreconditioner& p,
                                            const ChunkedVector& zhat);

/// Forward transform of a real time-major vector. Only frequencies
/// 0..ell/2 are produced (the rest are their conjugates); out holds
/// (ell/2 + 1) chunks of n.
void dft_forward_real(ParallelEngine& engine, std::span<const double> x, std::size_t n,
                      std::size_t ell, std::vector<cplx>& out);

/// Inverse transform of a conjugate-symmetric spectrum given by its
/// frequencies 0..ell/2; writes the real time-major result into y.
void dft_inverse_real(ParallelEngine& engine, std::span<const cplx> half, std::size_t n,
                      std::size_t ell, std::span<double> y);

}  // namespace aao
