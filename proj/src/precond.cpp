#include "allatonce/precond.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace aao {

SingularSymbolError::SingularSymbolError(std::size_t frequency, std::size_t row)
    : std::runtime_error("circulant symbol S_" + std::to_string(frequency) +
                         " is singular to working precision (zero pivot at row " +
                         std::to_string(row) + ")"),
      frequency_(frequency) {}

double ComplexTriDiag::max_abs() const noexcept {
  double m = 0.0;
  for (const auto& v : sub) m = std::max(m, std::abs(v));
  for (const auto& v : diag) m = std::max(m, std::abs(v));
  for (const auto& v : sup) m = std::max(m, std::abs(v));
  return m;
}

void ComplexTriDiag::apply(std::span<const cplx> x, std::span<cplx> y) const {
  const std::size_t n = diag.size();
  for (std::size_t i = 0; i < n; ++i) {
    cplx acc = diag[i] * x[i];
    if (i > 0) acc += sub[i - 1] * x[i - 1];
    if (i + 1 < n) acc += sup[i] * x[i + 1];
    y[i] = acc;
  }
}

namespace {

std::size_t wrap(int offset, std::size_t ell) {
  const long long l = static_cast<long long>(ell);
  return static_cast<std::size_t>(((offset % l) + l) % l);
}

cplx root_power(std::size_t k, std::size_t j, std::size_t ell) {
  const std::size_t m = (k * j) % ell;
  const double a = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(ell);
  return {std::cos(a), std::sin(a)};
}

constexpr double kPivotTol = 1e-14;
constexpr double kImagResidueTol = 1e-10;

}  // namespace

CirculantPreconditioner::CirculantPreconditioner(const BlockStencil& stencil, std::size_t ell)
    : n_(0), ell_(ell), stencil_(stencil) {
  if (ell_ == 0) throw std::invalid_argument("CirculantPreconditioner: ell must be positive");
  stencil_.validate();
  n_ = stencil_.n();
  const std::size_t half = ell_ / 2 + 1;
  symbols_.resize(half);
  factors_.resize(half);

  for (std::size_t k = 0; k < half; ++k) {
    ComplexTriDiag s{std::vector<cplx>(n_ - 1), std::vector<cplx>(n_), std::vector<cplx>(n_ - 1)};
    for (const auto& band : stencil_.bands) {
      const cplx w = root_power(k, wrap(band.offset, ell_), ell_);
      for (std::size_t i = 0; i < n_; ++i) s.diag[i] += w * band.block.diag[i];
      for (std::size_t i = 0; i + 1 < n_; ++i) {
        s.sub[i] += w * band.block.sub[i];
        s.sup[i] += w * band.block.sup[i];
      }
    }

    // The symbols of indefinite stencils (central differences) can have a
    // zero leading entry while being perfectly regular, so pivoting is needed.
    Factor f{s.sub, s.diag, s.sup, std::vector<cplx>(n_ > 2 ? n_ - 2 : 0), std::vector<int>(n_)};
    const auto nn = static_cast<lapack_int>(n_);
    const lapack_int info =
        LAPACKE_zgttrf_work(nn, f.dl.data(), f.d.data(), f.du.data(), f.du2.data(), f.ipiv.data());
    static_assert(sizeof(lapack_int) == sizeof(int));
    if (info < 0) throw std::logic_error("zgttrf: bad argument " + std::to_string(-info));
    const double tol = kPivotTol * s.max_abs();
    for (std::size_t i = 0; i < n_; ++i) {
      if (!(std::abs(f.d[i]) > tol)) throw SingularSymbolError(k, i);
    }
    symbols_[k] = std::move(s);
    factors_[k] = std::move(f);
  }
}

ComplexTriDiag CirculantPreconditioner::symbol(std::size_t k) const {
  if (k >= ell_) throw std::out_of_range("CirculantPreconditioner::symbol: frequency out of range");
  if (k < symbols_.size()) return symbols_[k];
  ComplexTriDiag s = symbols_[ell_ - k];
  for (auto* v : {&s.sub, &s.diag, &s.sup}) {
    for (auto& x : *v) x = std::conj(x);
  }
  return s;
}

void CirculantPreconditioner::solve_frequency(std::size_t k, std::span<cplx> v) const {
  if (k >= ell_) throw std::out_of_range("solve_frequency: frequency out of range");
  if (v.size() != n_) throw std::invalid_argument("solve_frequency: chunk length is not n");
  // S_k = conj(S_{ell-k}): solve the mirrored system on conjugated data.
  const bool mirrored = k >= factors_.size();
  const Factor& f = factors_[mirrored ? ell_ - k : k];
  if (mirrored) {
    for (auto& x : v) x = std::conj(x);
  }
  const auto nn = static_cast<lapack_int>(n_);
  LAPACKE_zgttrs_work(LAPACK_COL_MAJOR, 'N', nn, 1, f.dl.data(), f.d.data(), f.du.data(), f.du2.data(),
                      f.ipiv.data(), v.data(), nn);
  if (mirrored) {
    for (auto& x : v) x = std::conj(x);
  }
}

void CirculantPreconditioner::apply_inverse(ParallelEngine& engine, std::span<const double> z,
                                            std::span<double> out) const {
  if (z.size() != n_ * ell_ || out.size() != n_ * ell_) {
    throw std::invalid_argument("apply_inverse: vector length is not n*ell");
  }
  if (engine.strategy() == Strategy::row_split_dft) {
    apply_inverse_rowsplit(engine, z, out);
  } else {
    apply_inverse_fft(engine, z, out);
  }
}

MonolithicVector CirculantPreconditioner::apply_inverse(ParallelEngine& engine,
                                                        std::span<const double> z) const {
  MonolithicVector out(z.size());
  apply_inverse(engine, z, out);
  return out;
}

void CirculantPreconditioner::apply_inverse_rowsplit(ParallelEngine& engine,
                                                     std::span<const double> z,
                                                     std::span<double> out) const {
  std::vector<cplx> spec;
  dft_forward_real(engine, z, n_, ell_, spec);
  const std::size_t half = ell_ / 2 + 1;
  engine.run(half, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      solve_frequency(k, std::span<cplx>(spec).subspan(k * n_, n_));
    }
  });

  // Frequencies 0 and ell/2 (even ell) must come out real for a real
  // circulant; anything else means the symbols lost conjugate symmetry.
  double scale = 0.0;
  double residue = 0.0;
  for (const auto& v : spec) scale = std::max(scale, std::abs(v));
  auto check = [&](std::size_t k) {
    for (std::size_t i = 0; i < n_; ++i) residue = std::max(residue, std::abs(spec[k * n_ + i].imag()));
  };
  check(0);
  if (ell_ % 2 == 0) check(ell_ / 2);
  if (residue > kImagResidueTol * scale) {
    throw std::runtime_error("apply_inverse: imaginary residue " + std::to_string(residue) +
                             " on a self-conjugate frequency");
  }
  dft_inverse_real(engine, spec, n_, ell_, out);
}

void CirculantPreconditioner::apply_inverse_fft(ParallelEngine& engine, std::span<const double> z,
                                                std::span<double> out) const {
  ChunkedVector v = ChunkedVector::from_real(z, n_, ell_);
  v = vector_transpose(engine, v);
  v = fft_apply(engine, Direction::forward, v);
  v = vector_transpose(engine, v);
  v = frequency_solve(engine, *this, v);
  v = vector_transpose(engine, v);
  v = fft_apply(engine, Direction::inverse, v);
  v = vector_transpose(engine, v);

  double scale = 0.0;
  double residue = 0.0;
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    out[i] = v.data[i].real();
    scale = std::max(scale, std::abs(v.data[i]));
    residue = std::max(residue, std::abs(v.data[i].imag()));
  }
  if (residue > kImagResidueTol * scale) {
    throw std::runtime_error("apply_inverse: imaginary residue " + std::to_string(residue) +
                             " exceeds tolerance");
  }
}

void CirculantPreconditioner::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ * ell_ || y.size() != n_ * ell_) {
    throw std::invalid_argument("CirculantPreconditioner::apply: vector length is not n*ell");
  }
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t r = 0; r < ell_; ++r) {
    for (const auto& band : stencil_.bands) {
      const std::size_t c = (r + ell_ - wrap(band.offset, ell_)) % ell_;
      band.block.apply_add(1.0, chunk(x, n_, c), chunk(y, n_, r));
    }
  }
}

CirculantPreconditioner build_circulant(const BlockStencil& stencil, std::size_t ell) {
  return CirculantPreconditioner(stencil, ell);
}

void sigma_kron_apply(std::span<const double> sigma, const TriDiagMatrix& k,
                      std::span<const double> v, std::span<double> out) {
  const std::size_t n = k.size();
  const std::size_t ell = sigma.size();
  if (v.size() != n * ell || out.size() != n * ell) {
    throw std::invalid_argument("sigma_kron_apply: vector length is not n * sigma.size()");
  }
  for (std::size_t c = 0; c < ell; ++c) {
    auto oc = chunk(out, n, c);
    std::fill(oc.begin(), oc.end(), 0.0);
    if (sigma[c] != 0.0) k.apply_add(sigma[c], chunk(v, n, c), oc);
  }
}

NeumannPreconditioner::NeumannPreconditioner(std::shared_ptr<const CirculantPreconditioner> base,
                                             TriDiagMatrix k, std::vector<double> sigma,
                                             std::size_t order)
    : base_(std::move(base)), k_(std::move(k)), sigma_(std::move(sigma)), order_(order) {
  if (!base_) throw std::invalid_argument("NeumannPreconditioner: missing base preconditioner");
  if (order_ == 0) throw std::invalid_argument("NeumannPreconditioner: order must be at least 1");
  if (sigma_.size() != base_->ell() || k_.size() != base_->n()) {
    throw std::invalid_argument("NeumannPreconditioner: sigma/K do not match the base preconditioner");
  }
}

double NeumannPreconditioner::coupling_norm_bound() const noexcept {
  double row_max = 0.0;
  const std::size_t n = k_.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = std::abs(k_.diag[i]);
    if (i > 0) s += std::abs(k_.sub[i - 1]);
    if (i + 1 < n) s += std::abs(k_.sup[i]);
    row_max = std::max(row_max, s);
  }
  double smax = 0.0;
  for (double s : sigma_) smax = std::max(smax, std::abs(s));
  return smax * row_max;
}

void NeumannPreconditioner::apply(ParallelEngine& engine, std::span<const double> z,
                                  std::span<double> out) const {
  base_->apply_inverse(engine, z, out);
  if (order_ == 1) return;
  MonolithicVector term(out.begin(), out.end());
  MonolithicVector coupled(term.size());
  for (std::size_t m = 1; m < order_; ++m) {
    sigma_kron_apply(sigma_, k_, term, coupled);
    base_->apply_inverse(engine, coupled, term);
    for (std::size_t i = 0; i < term.size(); ++i) {
      term[i] = -term[i];
      out[i] += term[i];
    }
  }
}

void apply_neumann(const NeumannPreconditioner& q, ParallelEngine& engine,
                   std::span<const double> z, std::span<double> out) {
  q.apply(engine, z, out);
}

}  // namespace aao
