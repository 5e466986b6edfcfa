#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace aao {

/// Real tridiagonal n x n matrix stored by diagonals.
///
/// Holds the P1 mass and stiffness matrices and their linear combinations,
/// which are the only spatial blocks the all-at-once systems need.
struct TriDiagMatrix {
  std::vector<double> sub;   // length n-1, entry (i+1, i)
  std::vector<double> diag;  // length n
  std::vector<double> sup;   // length n-1, entry (i, i+1)

  TriDiagMatrix() = default;
  explicit TriDiagMatrix(std::size_t n);
  TriDiagMatrix(std::vector<double> sub_, std::vector<double> diag_, std::vector<double> sup_);

  [[nodiscard]] std::size_t size() const noexcept { return diag.size(); }

  /// y = A x
  void apply(std::span<const double> x, std::span<double> y) const;
  /// y += alpha * A x
  void apply_add(double alpha, std::span<const double> x, std::span<double> y) const;

  [[nodiscard]] double max_abs() const noexcept;
  [[nodiscard]] bool symmetric() const noexcept;
};

/// alpha * A + beta * B. Throws std::invalid_argument on size mismatch.
[[nodiscard]] TriDiagMatrix combine(double alpha, const TriDiagMatrix& a, double beta,
                                    const TriDiagMatrix& b);

/// Uniform mesh on [0,1] with n interior nodes; Dirichlet nodes are eliminated.
struct SpatialGrid {
  std::size_t n = 0;
  double h = 0.0;

  SpatialGrid() = default;
  explicit SpatialGrid(std::size_t n_);

  /// Coordinate of interior node i (0-based).
  [[nodiscard]] double node(std::size_t i) const noexcept {
    return static_cast<double>(i + 1) * h;
  }
};

[[nodiscard]] TriDiagMatrix assemble_mass(const SpatialGrid& grid);
[[nodiscard]] TriDiagMatrix assemble_stiffness(const SpatialGrid& grid);

enum class Projection { interpolation, l2 };

/// Nodal interpolant u0[i] = f(x_i). With Projection::l2 the Galerkin
/// projection M u0 = (f, phi_i) is solved instead.
[[nodiscard]] std::vector<double> project_initial(const std::function<double(double)>& f,
                                                  const SpatialGrid& grid,
                                                  Projection kind = Projection::interpolation);

/// Real Thomas solve for a tridiagonal system (no pivoting).
[[nodiscard]] std::vector<double> thomas_solve(const TriDiagMatrix& a, std::span<const double> rhs);

}  // namespace aao
