#include "allatonce/operators.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

#include "allatonce/parallel.hpp"

namespace aao {

SystemKind parse_system_kind(std::string_view name) {
  if (name == "heat") return SystemKind::heat;
  if (name == "wave_cd" || name == "cd") return SystemKind::wave_cd;
  if (name == "wave_bd2" || name == "bd2") return SystemKind::wave_bd2;
  if (name == "wave_bd4" || name == "bd4") return SystemKind::wave_bd4;
  throw std::invalid_argument("unknown system kind '" + std::string(name) + "'");
}

std::size_t BlockStencil::n() const { return band(0).size(); }

const TriDiagMatrix& BlockStencil::band(int offset) const {
  for (const auto& b : bands) {
    if (b.offset == offset) return b.block;
  }
  throw std::invalid_argument("BlockStencil: no band at offset " + std::to_string(offset));
}

void BlockStencil::validate() const {
  std::set<int> seen;
  for (const auto& b : bands) {
    if (!seen.insert(b.offset).second) {
      throw std::invalid_argument("BlockStencil: duplicate band offset " + std::to_string(b.offset));
    }
  }
  if (!seen.contains(0)) throw std::invalid_argument("BlockStencil: diagonal band missing");
  const std::size_t nn = n();
  for (const auto& b : bands) {
    if (b.block.size() != nn) throw std::invalid_argument("BlockStencil: band size mismatch");
  }
  for (const auto& c : corrections) {
    if (c.block.size() != nn) throw std::invalid_argument("BlockStencil: correction size mismatch");
  }
}

BlockToeplitzOperator::BlockToeplitzOperator(std::size_t ell, BlockStencil stencil,
                                             std::vector<TriDiagMatrix> per_step_diag)
    : n_(0), ell_(ell), stencil_(std::move(stencil)), per_step_diag_(std::move(per_step_diag)) {
  if (ell_ == 0) throw std::invalid_argument("BlockToeplitzOperator: ell must be positive");
  stencil_.validate();
  n_ = stencil_.n();
  if (!per_step_diag_.empty()) {
    if (per_step_diag_.size() != ell_) {
      throw std::invalid_argument("BlockToeplitzOperator: per-step diagonal needs ell blocks");
    }
    for (const auto& d : per_step_diag_) {
      if (d.size() != n_) throw std::invalid_argument("BlockToeplitzOperator: per-step size mismatch");
    }
  }
  row_corrections_.resize(ell_);
  for (std::size_t i = 0; i < stencil_.corrections.size(); ++i) {
    const auto& c = stencil_.corrections[i];
    if (c.row >= ell_ || c.col >= ell_) {
      throw std::invalid_argument("BlockToeplitzOperator: correction outside the block grid");
    }
    row_corrections_[c.row].push_back(i);
  }
}

const TriDiagMatrix* BlockToeplitzOperator::block_at(std::size_t row, std::size_t col) const {
  for (std::size_t idx : row_corrections_[row]) {
    if (stencil_.corrections[idx].col == col) return &stencil_.corrections[idx].block;
  }
  const auto offset = static_cast<long long>(row) - static_cast<long long>(col);
  for (const auto& b : stencil_.bands) {
    if (b.offset != offset) continue;
    if (offset == 0 && !per_step_diag_.empty()) return &per_step_diag_[row];
    return &b.block;
  }
  return nullptr;
}

void BlockToeplitzOperator::apply_rows(std::size_t begin, std::size_t end,
                                       std::span<const double> x, std::span<double> y) const {
  for (std::size_t r = begin; r < end; ++r) {
    auto yr = chunk(y, n_, r);
    std::fill(yr.begin(), yr.end(), 0.0);
    const auto& fixes = row_corrections_[r];
    for (const auto& b : stencil_.bands) {
      const long long col = static_cast<long long>(r) - b.offset;
      if (col < 0 || col >= static_cast<long long>(ell_)) continue;
      const auto c = static_cast<std::size_t>(col);
      const bool overridden = std::any_of(fixes.begin(), fixes.end(), [&](std::size_t idx) {
        return stencil_.corrections[idx].col == c;
      });
      if (overridden) continue;
      const TriDiagMatrix& blk = (b.offset == 0 && !per_step_diag_.empty()) ? per_step_diag_[r] : b.block;
      blk.apply_add(1.0, chunk(x, n_, c), yr);
    }
    for (std::size_t idx : fixes) {
      const auto& fix = stencil_.corrections[idx];
      fix.block.apply_add(1.0, chunk(x, n_, fix.col), yr);
    }
  }
}

void BlockToeplitzOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != size() || y.size() != size()) {
    throw std::invalid_argument("BlockToeplitzOperator::apply: vector length is not n*ell");
  }
  apply_rows(0, ell_, x, y);
}

void BlockToeplitzOperator::apply(ParallelEngine& engine, std::span<const double> x,
                                  std::span<double> y) const {
  if (x.size() != size() || y.size() != size()) {
    throw std::invalid_argument("BlockToeplitzOperator::apply: vector length is not n*ell");
  }
  engine.run(ell_, [&](std::size_t begin, std::size_t end) { apply_rows(begin, end, x, y); });
}

namespace {

void require_same_size(const TriDiagMatrix& m, const TriDiagMatrix& k) {
  if (m.size() != k.size() || m.size() == 0) {
    throw std::invalid_argument("mass and stiffness matrices differ in size (" +
                                std::to_string(m.size()) + " vs " + std::to_string(k.size()) + ")");
  }
}

void require_steps(std::size_t ell, std::size_t min_ell, const char* who) {
  if (ell < min_ell) {
    throw std::invalid_argument(std::string(who) + ": needs at least " + std::to_string(min_ell) +
                                " time steps");
  }
}

}  // namespace

BlockToeplitzOperator build_heat(const TriDiagMatrix& m, const TriDiagMatrix& k,
                                 const TimeGrid& grid) {
  require_same_size(m, k);
  require_steps(grid.ell, 1, "build_heat");
  BlockStencil st;
  st.bands.push_back({0, combine(1.0, m, grid.tau_base, k)});
  st.bands.push_back({1, combine(-1.0, m, 0.0, m)});
  std::vector<TriDiagMatrix> per_step;
  if (!grid.is_uniform()) {
    per_step.reserve(grid.ell);
    for (double tau : grid.steps) per_step.push_back(combine(1.0, m, tau, k));
  }
  return BlockToeplitzOperator(grid.ell, std::move(st), std::move(per_step));
}

BlockToeplitzOperator build_wave_cd(const TriDiagMatrix& m, const TriDiagMatrix& k, double tau,
                                    std::size_t ell) {
  require_same_size(m, k);
  require_steps(ell, 2, "build_wave_cd");
  BlockStencil st;
  st.bands.push_back({0, combine(-2.0, m, tau * tau, k)});
  st.bands.push_back({1, m});
  st.bands.push_back({-1, m});
  return BlockToeplitzOperator(ell, std::move(st));
}

BlockToeplitzOperator build_wave_bd2(const TriDiagMatrix& m, const TriDiagMatrix& k, double tau,
                                     std::size_t ell) {
  require_same_size(m, k);
  require_steps(ell, 3, "build_wave_bd2");
  BlockStencil st;
  st.bands.push_back({0, combine(1.0, m, tau * tau, k)});
  st.bands.push_back({1, combine(-2.0, m, 0.0, m)});
  st.bands.push_back({2, m});
  return BlockToeplitzOperator(ell, std::move(st));
}

BlockToeplitzOperator build_wave_bd4(const TriDiagMatrix& m, const TriDiagMatrix& k, double tau,
                                     std::size_t ell) {
  require_same_size(m, k);
  require_steps(ell, 4, "build_wave_bd4");
  const TriDiagMatrix b = combine(1.0, m, tau * tau, k);
  const TriDiagMatrix c = combine(-2.0, m, 0.0, m);
  BlockStencil st;
  st.bands.push_back({0, combine(2.0, m, tau * tau, k)});
  st.bands.push_back({1, combine(-5.0, m, 0.0, m)});
  st.bands.push_back({2, combine(4.0, m, 0.0, m)});
  st.bands.push_back({3, combine(-1.0, m, 0.0, m)});
  st.corrections.push_back({0, 0, b});
  st.corrections.push_back({1, 0, c});
  st.corrections.push_back({1, 1, b});
  return BlockToeplitzOperator(ell, std::move(st));
}

BlockToeplitzOperator build_operator(SystemKind kind, const TriDiagMatrix& m,
                                     const TriDiagMatrix& k, const TimeGrid& grid) {
  switch (kind) {
    case SystemKind::heat:
      return build_heat(m, k, grid);
    case SystemKind::wave_cd:
      return build_wave_cd(m, k, grid.tau_base, grid.ell);
    case SystemKind::wave_bd2:
      return build_wave_bd2(m, k, grid.tau_base, grid.ell);
    case SystemKind::wave_bd4:
      return build_wave_bd4(m, k, grid.tau_base, grid.ell);
  }
  throw std::invalid_argument("build_operator: unknown system kind");
}

MonolithicVector build_rhs(SystemKind kind, const TriDiagMatrix& m, const TriDiagMatrix& k,
                           double tau, std::span<const double> u0, std::size_t ell) {
  require_same_size(m, k);
  const std::size_t n = m.size();
  if (u0.size() != n) throw std::invalid_argument("build_rhs: u0 length does not match n");
  const std::size_t needed = kind == SystemKind::wave_bd4 ? 3 : kind == SystemKind::wave_bd2 ? 2 : 1;
  if (ell < needed) throw std::invalid_argument("build_rhs: too few time steps for this system");
  MonolithicVector b(n * ell, 0.0);
  std::span<double> bs(b);
  switch (kind) {
    case SystemKind::heat:
      m.apply(u0, chunk(bs, n, 0));
      break;
    case SystemKind::wave_cd:
      m.apply_add(-1.0, u0, chunk(bs, n, 0));
      break;
    case SystemKind::wave_bd2:
    case SystemKind::wave_bd4:
      combine(1.0, m, tau * tau, k).apply(u0, chunk(bs, n, 0));
      m.apply_add(-1.0, u0, chunk(bs, n, 1));
      if (kind == SystemKind::wave_bd4) m.apply(u0, chunk(bs, n, 2));
      break;
  }
  return b;
}

}  // namespace aao
