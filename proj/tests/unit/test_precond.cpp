#include <gtest/gtest.h>

#include <numbers>

#include "allatonce/operators.hpp"
#include "allatonce/parallel.hpp"
#include "allatonce/precond.hpp"
#include "dense_oracle.hpp"

namespace {

using aao::ParallelEngine;
using aao::SpatialGrid;
using aao::Strategy;
using aao::TimeGrid;

struct CircCase {
  const char* name;
  aao::BlockStencil stencil;
  oracle::Mat dense;
};

// The four block circulants in use, with dense versions built from the
// defining bands (the non-uniform heat system reuses the uniform one).
std::vector<CircCase> circulants(std::size_t n, std::size_t ell) {
  const SpatialGrid g(n);
  const auto m = aao::assemble_mass(g);
  const auto k = aao::assemble_stiffness(g);
  const oracle::Mat dm = oracle::mass(n), dk = oracle::stiffness(n);
  const double tau = 1.0 / static_cast<double>(ell);
  std::vector<CircCase> out;
  out.push_back({"heat", aao::build_heat(m, k, TimeGrid::uniform(ell)).stencil(),
                 oracle::circulant({{0, dm + tau * dk}, {1, -dm}}, ell)});
  if (ell >= 2) {
    out.push_back({"heat_nonuniform", aao::build_heat(m, k, TimeGrid::perturbed(ell, 0.5, 4)).stencil(),
                   oracle::circulant({{0, dm + tau * dk}, {1, -dm}}, ell)});
  }
  if (ell >= 3) {
    out.push_back({"wave_cd", aao::build_wave_cd(m, k, tau, ell).stencil(),
                   oracle::circulant({{0, tau * tau * dk - 2.0 * dm}, {1, dm}, {-1, dm}}, ell)});
    out.push_back({"wave_bd2", aao::build_wave_bd2(m, k, tau, ell).stencil(),
                   oracle::circulant({{0, dm + tau * tau * dk}, {1, -2.0 * dm}, {2, dm}}, ell)});
  }
  if (ell >= 4) {
    out.push_back({"wave_bd4", aao::build_wave_bd4(m, k, tau, ell).stencil(),
                   oracle::circulant({{0, 2.0 * dm + tau * tau * dk}, {1, -5.0 * dm}, {2, 4.0 * dm}, {3, -dm}}, ell)});
  }
  return out;
}

TEST(Precond, DenseCirculantOracleHasPrintedCorners) {
  const std::size_t n = 2, ell = 5;
  const oracle::Mat dm = oracle::mass(n);
  const auto bd4 = circulants(n, ell).back();
  ASSERT_STREQ(bd4.name, "wave_bd4");
  // Top-right corner of the first block row wraps the lower bands around.
  EXPECT_LT((bd4.dense.block(0, 2 * 2, 2, 2) + dm).norm(), 1e-14);
  EXPECT_LT((bd4.dense.block(0, 3 * 2, 2, 2) - 4.0 * dm).norm(), 1e-14);
  EXPECT_LT((bd4.dense.block(0, 4 * 2, 2, 2) + 5.0 * dm).norm(), 1e-14);
}

TEST(Precond, InverseMatchesDenseCirculant) {
  std::mt19937_64 rng(21);
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::size_t ell = 1; ell <= 8; ++ell) {
      for (const auto& c : circulants(n, ell)) {
        SCOPED_TRACE(std::string(c.name) + " n=" + std::to_string(n) + " ell=" + std::to_string(ell));
        const auto pc = aao::build_circulant(c.stencil, ell);
        const auto lu = c.dense.partialPivLu();
        for (auto strategy : {Strategy::row_split_dft, Strategy::transpose_fft}) {
          ParallelEngine engine(2, strategy);
          for (int t = 0; t < 5; ++t) {
            const auto z = oracle::random_vector(n * ell, rng);
            const auto y = pc.apply_inverse(engine, z);
            const oracle::Vec want = lu.solve(oracle::to_eigen(z));
            ASSERT_LT(oracle::rel_err(oracle::to_eigen(y), want), 1e-10)
                << c.name << " n=" << n << " ell=" << ell << " " << aao::to_string(strategy);
          }
        }
      }
    }
  }
}

TEST(Precond, CirculantMatvecMatchesDense) {
  std::mt19937_64 rng(22);
  for (const auto& c : circulants(3, 6)) {
    const auto pc = aao::build_circulant(c.stencil, 6);
    const auto x = oracle::random_vector(18, rng);
    std::vector<double> y(18);
    pc.apply(x, y);
    EXPECT_LT(oracle::rel_err(oracle::to_eigen(y), c.dense * oracle::to_eigen(x)), 1e-13) << c.name;
  }
}

TEST(Precond, SymbolsMatchDefinition) {
  const std::size_t n = 3, ell = 7;
  for (const auto& c : circulants(n, ell)) {
    const auto pc = aao::build_circulant(c.stencil, ell);
    for (std::size_t k = 0; k < ell; ++k) {
      oracle::CMat want = oracle::CMat::Zero(n, n);
      for (const auto& b : c.stencil.bands) {
        const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) * b.offset / static_cast<double>(ell);
        want += std::polar(1.0, ang) * oracle::dense(b.block).cast<std::complex<double>>();
      }
      const auto s = pc.symbol(k);
      oracle::CMat got = oracle::CMat::Zero(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        got(i, i) = s.diag[i];
        if (i + 1 < n) {
          got(i + 1, i) = s.sub[i];
          got(i, i + 1) = s.sup[i];
        }
      }
      EXPECT_LT((got - want).norm(), 1e-12) << c.name << " k=" << k;
      if (k > 0) {
        const auto mirror = pc.symbol(ell - k);
        for (std::size_t i = 0; i < n; ++i) EXPECT_LT(std::abs(mirror.diag[i] - std::conj(s.diag[i])), 1e-13);
      }
    }
  }
  EXPECT_THROW((void)aao::build_circulant(circulants(n, ell)[0].stencil, ell).symbol(ell), std::out_of_range);
}

TEST(Precond, HeatZeroFrequencyIsScaledStiffness) {
  for (std::size_t ell : {1u, 4u, 9u}) {
    const SpatialGrid g(5);
    const auto m = aao::assemble_mass(g);
    const auto k = aao::assemble_stiffness(g);
    const auto pc = aao::build_circulant(aao::build_heat(m, k, TimeGrid::uniform(ell)).stencil(), ell);
    const auto s0 = pc.symbol(0);
    const double tau = 1.0 / static_cast<double>(ell);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(std::abs(s0.diag[i] - tau * k.diag[i]), 0.0, 1e-12);
  }
}

TEST(Precond, CentralDifferenceSymbolIsCosine) {
  const std::size_t n = 4, ell = 10;
  const SpatialGrid g(n);
  const auto m = aao::assemble_mass(g);
  const auto k = aao::assemble_stiffness(g);
  const double tau = 0.1;
  const auto pc = aao::build_circulant(aao::build_wave_cd(m, k, tau, ell).stencil(), ell);
  for (std::size_t f = 0; f < ell; ++f) {
    const double c = 2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(f) / ell);
    const auto s = pc.symbol(f);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(s.diag[i].real(), tau * tau * k.diag[i] - 2.0 * m.diag[i] + c * m.diag[i], 1e-12);
      EXPECT_NEAR(s.diag[i].imag(), 0.0, 1e-12);
    }
  }
}

TEST(Precond, RoundTripAndLinearity) {
  std::mt19937_64 rng(23);
  for (const auto& c : circulants(6, 16)) {
    const auto pc = aao::build_circulant(c.stencil, 16);
    ParallelEngine engine(3);
    const auto x = oracle::random_vector(96, rng);
    const auto y = oracle::random_vector(96, rng);
    std::vector<double> cx(96);
    pc.apply(x, cx);
    const auto back = pc.apply_inverse(engine, cx);
    EXPECT_LT(oracle::rel_err(oracle::to_eigen(back), oracle::to_eigen(x)), 1e-10) << c.name;

    std::vector<double> comb(96);
    for (std::size_t i = 0; i < 96; ++i) comb[i] = 2.5 * x[i] - 0.5 * y[i];
    const auto lhs = pc.apply_inverse(engine, comb);
    const auto px = pc.apply_inverse(engine, x);
    const auto py = pc.apply_inverse(engine, y);
    oracle::Vec rhs = 2.5 * oracle::to_eigen(px) - 0.5 * oracle::to_eigen(py);
    EXPECT_LT(oracle::rel_err(oracle::to_eigen(lhs), rhs), 1e-12) << c.name;
  }
}

TEST(Precond, StrategiesAgreeAndAreWorkerIndependent) {
  std::mt19937_64 rng(24);
  for (const auto& c : circulants(5, 12)) {
    const auto pc = aao::build_circulant(c.stencil, 12);
    const auto z = oracle::random_vector(60, rng);
    ParallelEngine ref_engine(1);
    const auto ref = pc.apply_inverse(ref_engine, z);
    for (std::size_t p : {2u, 4u, 8u}) {
      ParallelEngine rs(p, Strategy::row_split_dft);
      EXPECT_EQ(pc.apply_inverse(rs, z), ref) << c.name << " p=" << p;
      ParallelEngine ff(p, Strategy::transpose_fft);
      EXPECT_LT(oracle::rel_err(oracle::to_eigen(pc.apply_inverse(ff, z)), oracle::to_eigen(ref)), 1e-12);
    }
  }
}

TEST(Precond, ScalarCirculant) {
  // n = 1: the circulant is an ell x ell scalar matrix.
  std::mt19937_64 rng(25);
  for (const auto& c : circulants(1, 8)) {
    EXPECT_EQ(c.dense.rows(), 8);
    const auto pc = aao::build_circulant(c.stencil, 8);
    ParallelEngine engine(1);
    const auto z = oracle::random_vector(8, rng);
    EXPECT_LT(oracle::rel_err(oracle::to_eigen(pc.apply_inverse(engine, z)),
                              c.dense.partialPivLu().solve(oracle::to_eigen(z))), 1e-12);
  }
}

TEST(Precond, SingularSymbolIsReported) {
  const SpatialGrid g(3);
  const auto m = aao::assemble_mass(g);
  aao::BlockStencil st;
  st.bands.push_back({0, m});
  st.bands.push_back({1, aao::combine(-1.0, m, 0.0, m)});
  try {
    (void)aao::build_circulant(st, 6);
    FAIL() << "expected SingularSymbolError";
  } catch (const aao::SingularSymbolError& e) {
    EXPECT_EQ(e.frequency(), 0u);
  }
}

TEST(Precond, RejectsWrongLength) {
  const SpatialGrid g(3);
  const auto pc = aao::build_circulant(
      aao::build_heat(aao::assemble_mass(g), aao::assemble_stiffness(g), TimeGrid::uniform(4)).stencil(), 4);
  ParallelEngine engine(1);
  std::vector<double> z(11), out(11);
  EXPECT_THROW(pc.apply_inverse(engine, z, out), std::invalid_argument);
}

TEST(Precond, SigmaKron) {
  const std::size_t n = 3, ell = 4;
  const SpatialGrid g(n);
  const auto k = aao::assemble_stiffness(g);
  std::mt19937_64 rng(26);
  const auto v = oracle::random_vector(n * ell, rng);
  std::vector<double> out(n * ell);
  aao::sigma_kron_apply(std::vector<double>(ell, 0.0), k, v, out);
  for (double x : out) EXPECT_EQ(x, 0.0);

  const std::vector<double> sigma{0.0, 0.5, 0.0, -0.25};
  aao::sigma_kron_apply(sigma, k, v, out);
  oracle::Mat e = oracle::Mat::Zero(n * ell, n * ell);
  for (std::size_t r = 0; r < ell; ++r) oracle::put(e, r, r, sigma[r] * oracle::stiffness(n));
  EXPECT_LT(oracle::rel_err(oracle::to_eigen(out), e * oracle::to_eigen(v)), 1e-13);

  EXPECT_THROW(aao::sigma_kron_apply(sigma, k, std::vector<double>(5), out), std::invalid_argument);
}

struct NeumannSetup {
  std::size_t n, ell;
  TimeGrid grid;
  aao::TriDiagMatrix k;
  std::shared_ptr<const aao::CirculantPreconditioner> base;
  oracle::Mat q;  // P + sigma (x) K
};

NeumannSetup neumann_setup(std::size_t n, std::size_t ell, double delta, std::uint64_t seed) {
  const SpatialGrid g(n);
  const auto m = aao::assemble_mass(g);
  const auto k = aao::assemble_stiffness(g);
  auto grid = TimeGrid::perturbed(ell, delta, seed);
  auto base = std::make_shared<const aao::CirculantPreconditioner>(
      aao::build_circulant(aao::build_heat(m, k, grid).stencil(), ell));
  const oracle::Mat dm = oracle::mass(n), dk = oracle::stiffness(n);
  oracle::Mat q = oracle::circulant({{0, dm + grid.tau_base * dk}, {1, -dm}}, ell);
  for (std::size_t r = 0; r < ell; ++r) oracle::put(q, r, r, grid.sigma[r] * dk);
  return {n, ell, std::move(grid), k, std::move(base), std::move(q)};
}

TEST(Precond, NeumannOrderOneIsCirculantInverse) {
  std::mt19937_64 rng(27);
  const auto s = neumann_setup(4, 8, 0.5, 1);
  aao::NeumannPreconditioner q(s.base, s.k, s.grid.sigma, 1);
  ParallelEngine engine(2);
  const auto z = oracle::random_vector(32, rng);
  std::vector<double> out(32);
  aao::apply_neumann(q, engine, z, out);
  EXPECT_EQ(out, s.base->apply_inverse(engine, z));
}

TEST(Precond, NeumannWithZeroSigmaIsExact) {
  std::mt19937_64 rng(28);
  const auto s = neumann_setup(3, 6, 0.5, 2);
  const auto z = oracle::random_vector(18, rng);
  ParallelEngine engine(1);
  const auto ref = s.base->apply_inverse(engine, z);
  for (std::size_t order : {1u, 2u, 3u, 6u}) {
    aao::NeumannPreconditioner q(s.base, s.k, std::vector<double>(6, 0.0), order);
    std::vector<double> out(18);
    q.apply(engine, z, out);
    EXPECT_LT(oracle::rel_err(oracle::to_eigen(out), oracle::to_eigen(ref)), 1e-14);
  }
}

TEST(Precond, HigherNeumannOrderApproachesExactInverse) {
  std::mt19937_64 rng(29);
  const auto s = neumann_setup(2, 4, 0.3, 3);
  const auto lu = s.q.partialPivLu();
  ParallelEngine engine(1);
  aao::NeumannPreconditioner q1(s.base, s.k, s.grid.sigma, 1), q3(s.base, s.k, s.grid.sigma, 3);
  ASSERT_LT(q1.coupling_norm_bound(), 1.0);
  for (int t = 0; t < 10; ++t) {
    const auto z = oracle::random_vector(8, rng);
    const oracle::Vec exact = lu.solve(oracle::to_eigen(z));
    std::vector<double> y1(8), y3(8);
    q1.apply(engine, z, y1);
    q3.apply(engine, z, y3);
    EXPECT_LT((oracle::to_eigen(y3) - exact).norm(), (oracle::to_eigen(y1) - exact).norm());
  }
}

TEST(Precond, NeumannResidualDecreasesWithOrder) {
  std::mt19937_64 rng(30);
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::size_t ell = 2; ell <= 8; ++ell) {
      const auto s = neumann_setup(n, ell, 0.3, n * 100 + ell);
      aao::NeumannPreconditioner probe(s.base, s.k, s.grid.sigma, 1);
      if (probe.coupling_norm_bound() >= 1.0) continue;
      ParallelEngine engine(1);
      const auto z = oracle::random_vector(n * ell, rng);
      double prev = INFINITY;
      for (std::size_t order = 1; order <= 5; ++order) {
        aao::NeumannPreconditioner q(s.base, s.k, s.grid.sigma, order);
        std::vector<double> y(n * ell);
        q.apply(engine, z, y);
        const double res = (s.q * oracle::to_eigen(y) - oracle::to_eigen(z)).norm();
        EXPECT_LE(res, prev * (1.0 + 1e-12) + 1e-14) << "n=" << n << " ell=" << ell << " order=" << order;
        prev = res;
      }
    }
  }
}

TEST(Precond, NeumannRejectsBadConfiguration) {
  const auto s = neumann_setup(3, 6, 0.5, 2);
  EXPECT_THROW(aao::NeumannPreconditioner(s.base, s.k, s.grid.sigma, 0), std::invalid_argument);
  EXPECT_THROW(aao::NeumannPreconditioner(s.base, s.k, std::vector<double>(5), 1), std::invalid_argument);
  EXPECT_THROW(aao::NeumannPreconditioner(nullptr, s.k, s.grid.sigma, 1), std::invalid_argument);
}

TEST(Precond, CouplingBound) {
  const auto s = neumann_setup(7, 16, 0.5, 9);
  aao::NeumannPreconditioner q(s.base, s.k, s.grid.sigma, 2);
  const double h = 1.0 / 8.0;
  EXPECT_NEAR(q.coupling_norm_bound(), s.grid.sigma_max_abs() * 4.0 / h, 1e-12);
}

}  // namespace
