#include "allatonce/timegrid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace aao {

namespace {

void fill_steps(TimeGrid& g) {
  g.steps.resize(g.ell);
  g.sigma.resize(g.ell);
  for (std::size_t k = 0; k < g.ell; ++k) {
    g.steps[k] = g.points[k + 1] - g.points[k];
    g.sigma[k] = g.steps[k] - g.tau_base;
  }
}

}  // namespace

TimeGrid TimeGrid::uniform(std::size_t ell) {
  if (ell == 0) throw std::invalid_argument("TimeGrid::uniform: ell must be positive");
  TimeGrid g;
  g.ell = ell;
  g.tau_base = 1.0 / static_cast<double>(ell);
  g.points.resize(ell + 1);
  for (std::size_t j = 0; j <= ell; ++j) g.points[j] = static_cast<double>(j) / static_cast<double>(ell);
  g.points.back() = 1.0;
  g.steps.assign(ell, g.tau_base);
  g.sigma.assign(ell, 0.0);
  return g;
}

TimeGrid TimeGrid::perturbed(std::size_t ell, double delta, std::uint64_t seed) {
  if (ell == 0) throw std::invalid_argument("TimeGrid::perturbed: ell must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("TimeGrid::perturbed: delta must lie in (0, 1)");
  }
  TimeGrid g;
  g.ell = ell;
  g.tau_base = 1.0 / static_cast<double>(ell);
  g.points.resize(ell + 1);
  g.points.front() = 0.0;
  g.points.back() = 1.0;
  std::mt19937_64 rng(seed);
  for (std::size_t j = 1; j < ell; ++j) {
    const double r = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    g.points[j] = (static_cast<double>(j) + delta * (r - 0.5)) / static_cast<double>(ell);
  }
  fill_steps(g);
  return g;
}

bool TimeGrid::is_uniform() const noexcept {
  return std::all_of(sigma.begin(), sigma.end(), [](double s) { return s == 0.0; });
}

double TimeGrid::sigma_max_abs() const noexcept {
  double m = 0.0;
  for (double s : sigma) m = std::max(m, std::abs(s));
  return m;
}

void TimeGrid::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "j,t_j,tau_j,sigma_j\n";
  os << 0 << ',' << points[0] << ",,\n";
  for (std::size_t j = 1; j <= ell; ++j) {
    os << j << ',' << points[j] << ',' << steps[j - 1] << ',' << sigma[j - 1] << '\n';
  }
  os.precision(old);
}

}  // namespace aao
