#include "allatonce/krylov.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace aao {

namespace {

using clock_type = std::chrono::steady_clock;

double elapsed_ms(clock_type::time_point since) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - since).count();
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

GmresResult gmres(const LinearMap& a, const LinearMap& pinv, std::span<const double> b, double tol,
                  std::size_t maxit) {
  if (!(tol > 0.0)) throw std::invalid_argument("gmres: tol must be positive");
  if (maxit == 0) throw std::invalid_argument("gmres: maxit must be at least 1");
  const auto t_start = clock_type::now();
  const std::size_t dim = b.size();

  GmresResult out{std::vector<double>(dim, 0.0), {}};
  SolveReport& rep = out.report;

  auto precond = [&](std::span<const double> in, std::span<double> res) {
    const auto t = clock_type::now();
    pinv(in, res);
    rep.wall_ms_precond += elapsed_ms(t);
  };
  auto matvec = [&](std::span<const double> in, std::span<double> res) {
    const auto t = clock_type::now();
    a(in, res);
    rep.wall_ms_matvec += elapsed_ms(t);
  };

  if (norm2(b) == 0.0) {
    rep.residual_history = {0.0};
    rep.converged = true;
    rep.wall_ms_total = elapsed_ms(t_start);
    return out;
  }

  std::vector<std::vector<double>> basis;
  basis.emplace_back(dim);
  precond(b, basis[0]);
  const double beta = norm2(basis[0]);
  if (beta == 0.0) throw std::runtime_error("gmres: preconditioner maps b to zero");
  for (double& v : basis[0]) v /= beta;

  // Hessenberg columns after Givens rotation, i.e. the upper triangle R.
  std::vector<std::vector<double>> r;
  std::vector<double> cs;
  std::vector<double> sn;
  std::vector<double> g{beta};
  rep.residual_history.push_back(1.0);

  std::vector<double> av(dim);
  std::vector<double> w(dim);
  std::size_t steps = 0;
  for (std::size_t j = 0; j < maxit; ++j) {
    matvec(basis[j], av);
    precond(av, w);

    std::vector<double> h(j + 2, 0.0);
    for (std::size_t i = 0; i <= j; ++i) {
      h[i] = dot(w, basis[i]);
      const double hij = h[i];
      const auto& vi = basis[i];
      for (std::size_t q = 0; q < dim; ++q) w[q] -= hij * vi[q];
    }
    h[j + 1] = norm2(w);
    const double subdiag = h[j + 1];

    for (std::size_t i = 0; i < j; ++i) {
      const double t = cs[i] * h[i] + sn[i] * h[i + 1];
      h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
      h[i] = t;
    }
    const double rho = std::hypot(h[j], h[j + 1]);
    const double c = rho == 0.0 ? 1.0 : h[j] / rho;
    const double s = rho == 0.0 ? 0.0 : h[j + 1] / rho;
    cs.push_back(c);
    sn.push_back(s);
    h[j] = rho;
    h[j + 1] = 0.0;
    g.push_back(-s * g[j]);
    g[j] = c * g[j];
    h.pop_back();
    r.push_back(std::move(h));

    steps = j + 1;
    const double rel = std::abs(g[j + 1]) / beta;
    rep.residual_history.push_back(rel);
    if (rel <= tol) {
      rep.converged = true;
      break;
    }
    if (subdiag < 1e-14 * beta) {
      rep.breakdown = true;
      break;
    }
    if (j + 1 == maxit) break;
    basis.emplace_back(w);
    for (double& v : basis.back()) v /= subdiag;
  }

  // Back substitution R y = g, then x = V y.
  std::vector<double> y(steps, 0.0);
  for (std::size_t i = steps; i-- > 0;) {
    double s = g[i];
    for (std::size_t k = i + 1; k < steps; ++k) s -= r[k][i] * y[k];
    y[i] = r[i][i] == 0.0 ? 0.0 : s / r[i][i];
  }
  for (std::size_t k = 0; k < steps; ++k) {
    const auto& vk = basis[k];
    for (std::size_t q = 0; q < dim; ++q) out.x[q] += y[k] * vk[q];
  }

  rep.iterations = steps;
  rep.wall_ms_total = elapsed_ms(t_start);
  return out;
}

double residual_true(const LinearMap& a, std::span<const double> x, std::span<const double> b) {
  std::vector<double> ax(b.size());
  a(x, ax);
  double num = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) num += (b[i] - ax[i]) * (b[i] - ax[i]);
  const double den = norm2(b);
  if (den == 0.0) return std::sqrt(num) == 0.0 ? 0.0 : INFINITY;
  return std::sqrt(num) / den;
}

}  // namespace aao
