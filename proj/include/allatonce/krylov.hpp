#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace aao {

/// y = Op(x). Used for both the system operator and the preconditioner.
using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct SolveReport {
  std::size_t iterations = 0;
  std::vector<double> residual_history;  // preconditioned relative residuals, entry 0 is 1
  bool converged = false;
  bool breakdown = false;
  double wall_ms_total = 0.0;
  double wall_ms_precond = 0.0;
  double wall_ms_matvec = 0.0;
  std::size_t workers = 1;
};

struct GmresResult {
  std::vector<double> x;
  SolveReport report;
};

/// Full left-preconditioned GMRES with modified Gram-Schmidt and a zero
/// initial guess. Stops when ||Pinv(b - A x)|| <= tol ||Pinv b|| or after
/// maxit iterations (non-convergence is reported, not thrown).
[[nodiscard]] GmresResult gmres(const LinearMap& a, const LinearMap& pinv, std::span<const double> b,
                                double tol = 1e-5, std::size_t maxit = 500);

/// ||b - A x|| / ||b||; 0 when b = 0 and A x = 0.
[[nodiscard]] double residual_true(const LinearMap& a, std::span<const double> x,
                                   std::span<const double> b);

}  // namespace aao
