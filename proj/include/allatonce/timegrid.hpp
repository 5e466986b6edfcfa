#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace aao {

/// Temporal grid on [0, 1] with ell steps.
///
/// points has ell+1 entries (t_0 = 0, t_ell = 1); steps, sigma have ell
/// entries. sigma[k] = steps[k] - tau_base is the offset of step k+1 from the
/// uniform step 1/ell, i.e. the diagonal of the block-diagonal correction that
/// turns the uniform circulant into the non-uniform one.
struct TimeGrid {
  std::size_t ell = 0;
  double tau_base = 0.0;
  std::vector<double> points;
  std::vector<double> steps;
  std::vector<double> sigma;

  static TimeGrid uniform(std::size_t ell);

  /// Interior points t_j = (j + delta (r_j - 0.5)) / ell with r_j uniform in
  /// [0, 1) from a seeded mt19937_64 stream (53-bit mantissa conversion, one
  /// draw per interior point in ascending j). Endpoints pinned to 0 and 1.
  static TimeGrid perturbed(std::size_t ell, double delta, std::uint64_t seed);

  [[nodiscard]] bool is_uniform() const noexcept;
  [[nodiscard]] double sigma_max_abs() const noexcept;

  /// CSV with header j,t_j,tau_j,sigma_j; row j = 0 has empty step columns.
  void write_csv(std::ostream& os) const;
};

}  // namespace aao
