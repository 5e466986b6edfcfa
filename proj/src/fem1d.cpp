#include "allatonce/fem1d.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aao {

TriDiagMatrix::TriDiagMatrix(std::size_t n)
    : sub(n > 0 ? n - 1 : 0, 0.0), diag(n, 0.0), sup(n > 0 ? n - 1 : 0, 0.0) {}

TriDiagMatrix::TriDiagMatrix(std::vector<double> sub_, std::vector<double> diag_,
                             std::vector<double> sup_)
    : sub(std::move(sub_)), diag(std::move(diag_)), sup(std::move(sup_)) {
  const std::size_t off = diag.empty() ? 0 : diag.size() - 1;
  if (sub.size() != off || sup.size() != off) {
    throw std::invalid_argument("TriDiagMatrix: off-diagonal length must be n-1");
  }
}

void TriDiagMatrix::apply(std::span<const double> x, std::span<double> y) const {
  std::fill(y.begin(), y.end(), 0.0);
  apply_add(1.0, x, y);
}

void TriDiagMatrix::apply_add(double alpha, std::span<const double> x, std::span<double> y) const {
  const std::size_t n = diag.size();
  if (x.size() != n || y.size() != n) {
    throw std::invalid_argument("TriDiagMatrix::apply: vector length " + std::to_string(x.size()) +
                                " does not match n = " + std::to_string(n));
  }
  if (n == 0) return;
  if (n == 1) {
    y[0] += alpha * diag[0] * x[0];
    return;
  }
  y[0] += alpha * (diag[0] * x[0] + sup[0] * x[1]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    y[i] += alpha * (sub[i - 1] * x[i - 1] + diag[i] * x[i] + sup[i] * x[i + 1]);
  }
  y[n - 1] += alpha * (sub[n - 2] * x[n - 2] + diag[n - 1] * x[n - 1]);
}

double TriDiagMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : sub) m = std::max(m, std::abs(v));
  for (double v : diag) m = std::max(m, std::abs(v));
  for (double v : sup) m = std::max(m, std::abs(v));
  return m;
}

bool TriDiagMatrix::symmetric() const noexcept { return sub == sup; }

TriDiagMatrix combine(double alpha, const TriDiagMatrix& a, double beta, const TriDiagMatrix& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("combine: dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  TriDiagMatrix out(a.size());
  for (std::size_t i = 0; i < a.diag.size(); ++i) out.diag[i] = alpha * a.diag[i] + beta * b.diag[i];
  for (std::size_t i = 0; i < a.sub.size(); ++i) {
    out.sub[i] = alpha * a.sub[i] + beta * b.sub[i];
    out.sup[i] = alpha * a.sup[i] + beta * b.sup[i];
  }
  return out;
}

SpatialGrid::SpatialGrid(std::size_t n_) : n(n_), h(0.0) {
  if (n == 0) throw std::invalid_argument("SpatialGrid: need at least one interior node");
  h = 1.0 / static_cast<double>(n + 1);
}

namespace {

void require_nodes(const SpatialGrid& grid) {
  if (grid.n == 0) throw std::invalid_argument("assemble: grid has no interior nodes");
}

}  // namespace

// Element matrix h/6 [2 1; 1 2]; every interior node touches two elements.
TriDiagMatrix assemble_mass(const SpatialGrid& grid) {
  require_nodes(grid);
  TriDiagMatrix m(grid.n);
  std::fill(m.diag.begin(), m.diag.end(), 4.0 * grid.h / 6.0);
  std::fill(m.sub.begin(), m.sub.end(), grid.h / 6.0);
  std::fill(m.sup.begin(), m.sup.end(), grid.h / 6.0);
  return m;
}

// Element matrix 1/h [1 -1; -1 1].
TriDiagMatrix assemble_stiffness(const SpatialGrid& grid) {
  require_nodes(grid);
  TriDiagMatrix k(grid.n);
  std::fill(k.diag.begin(), k.diag.end(), 2.0 / grid.h);
  std::fill(k.sub.begin(), k.sub.end(), -1.0 / grid.h);
  std::fill(k.sup.begin(), k.sup.end(), -1.0 / grid.h);
  return k;
}

std::vector<double> project_initial(const std::function<double(double)>& f, const SpatialGrid& grid,
                                    Projection kind) {
  require_nodes(grid);
  std::vector<double> u(grid.n);
  if (kind == Projection::interpolation) {
    for (std::size_t i = 0; i < grid.n; ++i) u[i] = f(grid.node(i));
    return u;
  }

  // Load vector (f, phi_i) with 3-point Gauss on each element.
  constexpr std::array<double, 3> gx{-0.7745966692414834, 0.0, 0.7745966692414834};
  constexpr std::array<double, 3> gw{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  std::vector<double> load(grid.n, 0.0);
  for (std::size_t e = 0; e <= grid.n; ++e) {
    const double x0 = static_cast<double>(e) * grid.h;
    for (std::size_t q = 0; q < 3; ++q) {
      const double s = 0.5 * (gx[q] + 1.0);
      const double fx = f(x0 + s * grid.h) * gw[q] * 0.5 * grid.h;
      if (e > 0) load[e - 1] += fx * (1.0 - s);
      if (e < grid.n) load[e] += fx * s;
    }
  }
  return thomas_solve(assemble_mass(grid), load);
}

std::vector<double> thomas_solve(const TriDiagMatrix& a, std::span<const double> rhs) {
  const std::size_t n = a.size();
  if (rhs.size() != n) throw std::invalid_argument("thomas_solve: rhs length mismatch");
  std::vector<double> c(n, 0.0);
  std::vector<double> x(rhs.begin(), rhs.end());
  if (n == 0) return x;
  double pivot = a.diag[0];
  if (pivot == 0.0) throw std::runtime_error("thomas_solve: zero pivot at row 0");
  x[0] /= pivot;
  for (std::size_t i = 1; i < n; ++i) {
    c[i - 1] = a.sup[i - 1] / pivot;
    pivot = a.diag[i] - a.sub[i - 1] * c[i - 1];
    if (pivot == 0.0) throw std::runtime_error("thomas_solve: zero pivot at row " + std::to_string(i));
    x[i] = (x[i] - a.sub[i - 1] * x[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

}  // namespace aao
