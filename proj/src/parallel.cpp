#include "allatonce/parallel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

#include "allatonce/precond.hpp"

namespace aao {

Strategy parse_strategy(std::string_view name) {
  if (name == "rowsplit" || name == "row_split_dft") return Strategy::row_split_dft;
  if (name == "fft" || name == "transpose_fft") return Strategy::transpose_fft;
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(Strategy s) noexcept {
  return s == Strategy::row_split_dft ? "rowsplit" : "fft";
}

ChunkedVector::ChunkedVector(Layout layout_, std::size_t n_, std::size_t ell_)
    : layout(layout_), n(n_), ell(ell_), data(n_ * ell_) {}

ChunkedVector ChunkedVector::from_real(std::span<const double> values, std::size_t n,
                                       std::size_t ell) {
  if (values.size() != n * ell) throw std::invalid_argument("ChunkedVector: length is not n*ell");
  ChunkedVector v(Layout::time_major, n, ell);
  std::copy(values.begin(), values.end(), v.data.begin());
  return v;
}

std::span<cplx> ChunkedVector::chunk(std::size_t c) {
  const std::size_t len = chunk_size();
  return std::span<cplx>(data).subspan(c * len, len);
}

std::span<const cplx> ChunkedVector::chunk(std::size_t c) const {
  const std::size_t len = chunk_size();
  return std::span<const cplx>(data).subspan(c * len, len);
}

// ---------------------------------------------------------------------------
// worker pool

struct ParallelEngine::Pool {
  std::size_t workers;
  std::vector<std::thread> threads;
  std::mutex m;
  std::condition_variable start_cv;
  std::condition_variable done_cv;
  std::size_t generation = 0;
  std::size_t pending = 0;
  bool stop = false;
  const std::function<void(std::size_t, std::size_t)>* job = nullptr;
  std::size_t count = 0;
  std::exception_ptr error;

  explicit Pool(std::size_t p) : workers(p) {
    for (std::size_t r = 1; r < p; ++r) threads.emplace_back([this, r] { loop(r); });
  }

  ~Pool() {
    {
      std::lock_guard lock(m);
      stop = true;
    }
    start_cv.notify_all();
    for (auto& t : threads) t.join();
  }

  void execute(std::size_t rank) {
    const auto r = ParallelEngine::partition(count, workers, rank);
    if (r.begin == r.end) return;
    try {
      (*job)(r.begin, r.end);
    } catch (...) {
      std::lock_guard lock(m);
      if (!error) error = std::current_exception();
    }
  }

  void loop(std::size_t rank) {
    std::size_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(m);
        start_cv.wait(lock, [&] { return stop || generation != seen; });
        if (stop) return;
        seen = generation;
      }
      execute(rank);
      {
        std::lock_guard lock(m);
        if (--pending == 0) done_cv.notify_one();
      }
    }
  }

  void run(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    {
      std::lock_guard lock(m);
      job = &fn;
      count = n;
      error = nullptr;
      pending = workers - 1;
      ++generation;
    }
    start_cv.notify_all();
    execute(0);
    std::unique_lock lock(m);
    done_cv.wait(lock, [&] { return pending == 0; });
    job = nullptr;
    if (error) std::rethrow_exception(std::exchange(error, nullptr));
  }
};

namespace {
// The FFTW planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct ParallelEngine::Plans {
  std::mutex m;
  std::map<std::pair<std::size_t, int>, fftw_plan> cache;

  ~Plans() {
    std::lock_guard guard(planner_mutex());
    for (auto& [key, plan] : cache) fftw_destroy_plan(plan);
  }
};

ParallelEngine::ParallelEngine(std::size_t workers, Strategy strategy)
    : workers_(workers), strategy_(strategy), plans_(std::make_unique<Plans>()) {
  if (workers_ == 0) throw std::invalid_argument("ParallelEngine: need at least one worker");
  if (workers_ > 1) pool_ = std::make_unique<Pool>(workers_);
}

ParallelEngine::~ParallelEngine() = default;

ParallelEngine::Range ParallelEngine::partition(std::size_t count, std::size_t workers,
                                                std::size_t rank) {
  const std::size_t base = count / workers;
  const std::size_t extra = count % workers;
  const std::size_t begin = rank * base + std::min(rank, extra);
  return {begin, begin + base + (rank < extra ? 1 : 0)};
}

void ParallelEngine::run(std::size_t count,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  if (!pool_) {
    fn(0, count);
    return;
  }
  pool_->run(count, fn);
}

void* ParallelEngine::fft_plan(std::size_t ell, Direction dir) {
  const int sign = dir == Direction::forward ? FFTW_BACKWARD : FFTW_FORWARD;
  std::lock_guard lock(plans_->m);
  auto it = plans_->cache.find({ell, sign});
  if (it != plans_->cache.end()) return it->second;
  std::lock_guard guard(planner_mutex());
  auto* buf = fftw_alloc_complex(ell);
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(ell), buf, buf, sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf);
  if (plan == nullptr) throw std::runtime_error("fft_plan: FFTW planning failed");
  plans_->cache.emplace(std::make_pair(ell, sign), plan);
  return plan;
}

// ---------------------------------------------------------------------------
// transforms

namespace {

constexpr std::size_t kRowBlock = 4;

struct Roots {
  std::vector<double> c;  // cos(2 pi m / ell)
  std::vector<double> s;  // sin(2 pi m / ell)
};

Roots make_roots(std::size_t ell) {
  Roots r{std::vector<double>(ell), std::vector<double>(ell)};
  for (std::size_t m = 0; m < ell; ++m) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(ell);
    r.c[m] = std::cos(a);
    r.s[m] = std::sin(a);
  }
  return r;
}

// y += (cr + i ci) * z over n complex entries.
void caxpy(double cr, double ci, const double* z, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double zr = z[2 * i];
    const double zi = z[2 * i + 1];
    y[2 * i] += cr * zr - ci * zi;
    y[2 * i + 1] += cr * zi + ci * zr;
  }
}

void require_time_major(const ChunkedVector& z, const char* who) {
  if (z.layout != Layout::time_major) {
    throw std::invalid_argument(std::string(who) + ": expected a time-major vector");
  }
}

}  // namespace

ChunkedVector dft_apply(ParallelEngine& engine, Direction dir, const ChunkedVector& z) {
  require_time_major(z, "dft_apply");
  const std::size_t n = z.n;
  const std::size_t ell = z.ell;
  ChunkedVector out(Layout::time_major, n, ell);
  if (n * ell == 0) return out;
  const Roots roots = make_roots(ell);
  const double sign = dir == Direction::forward ? 1.0 : -1.0;
  const double scale = 1.0 / std::sqrt(static_cast<double>(ell));
  const auto* in = reinterpret_cast<const double*>(z.data.data());
  auto* res = reinterpret_cast<double*>(out.data.data());

  engine.run(ell, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k0 = begin; k0 < end; k0 += kRowBlock) {
      const std::size_t nb = std::min(kRowBlock, end - k0);
      for (std::size_t j = 0; j < ell; ++j) {
        const double* zj = in + 2 * n * j;
        for (std::size_t b = 0; b < nb; ++b) {
          const std::size_t m = (j * (k0 + b)) % ell;
          caxpy(roots.c[m], sign * roots.s[m], zj, res + 2 * n * (k0 + b), n);
        }
      }
      for (std::size_t i = 2 * n * k0; i < 2 * n * (k0 + nb); ++i) res[i] *= scale;
    }
  });
  return out;
}

ChunkedVector vector_transpose(ParallelEngine& engine, const ChunkedVector& z) {
  const bool to_space = z.layout == Layout::time_major;
  ChunkedVector out(to_space ? Layout::space_major : Layout::time_major, z.n, z.ell);
  const std::size_t rows = z.chunk_count();  // input chunks
  const std::size_t cols = z.chunk_size();
  // Output chunk c gathers entry c of every input chunk.
  engine.run(cols, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      for (std::size_t r = 0; r < rows; ++r) out.data[c * rows + r] = z.data[r * cols + c];
    }
  });
  return out;
}

ChunkedVector fft_apply(ParallelEngine& engine, Direction dir, const ChunkedVector& z) {
  if (z.layout != Layout::space_major) {
    throw std::invalid_argument("fft_apply: expected a space-major vector");
  }
  ChunkedVector out = z;
  if (z.n * z.ell == 0) return out;
  auto plan = static_cast<fftw_plan>(engine.fft_plan(z.ell, dir));
  const double scale = 1.0 / std::sqrt(static_cast<double>(z.ell));
  engine.run(z.n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto col = out.chunk(i);
      auto* p = reinterpret_cast<fftw_complex*>(col.data());
      fftw_execute_dft(plan, p, p);
      for (auto& v : col) v *= scale;
    }
  });
  return out;
}

ChunkedVector frequency_solve(ParallelEngine& engine, const CirculantPreconditioner& p,
                              const ChunkedVector& zhat) {
  require_time_major(zhat, "frequency_solve");
  if (zhat.n != p.n() || zhat.ell != p.ell()) {
    throw std::invalid_argument("frequency_solve: vector does not match preconditioner size");
  }
  ChunkedVector out = zhat;
  engine.run(zhat.ell, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) p.solve_frequency(k, out.chunk(k));
  });
  return out;
}

void dft_forward_real(ParallelEngine& engine, std::span<const double> x, std::size_t n,
                      std::size_t ell, std::vector<cplx>& out) {
  if (x.size() != n * ell) throw std::invalid_argument("dft_forward_real: length is not n*ell");
  const std::size_t half = ell / 2 + 1;
  out.assign(half * n, cplx{});
  if (n == 0) return;
  const Roots roots = make_roots(ell);
  const double scale = 1.0 / std::sqrt(static_cast<double>(ell));

  engine.run(half, [&](std::size_t begin, std::size_t end) {
    std::vector<double> re(kRowBlock * n);
    std::vector<double> im(kRowBlock * n);
    for (std::size_t k0 = begin; k0 < end; k0 += kRowBlock) {
      const std::size_t nb = std::min(kRowBlock, end - k0);
      std::fill(re.begin(), re.end(), 0.0);
      std::fill(im.begin(), im.end(), 0.0);
      for (std::size_t j = 0; j < ell; ++j) {
        const double* xj = x.data() + n * j;
        for (std::size_t b = 0; b < nb; ++b) {
          const std::size_t m = (j * (k0 + b)) % ell;
          const double c = roots.c[m];
          const double s = roots.s[m];
          double* r = re.data() + b * n;
          double* q = im.data() + b * n;
          for (std::size_t i = 0; i < n; ++i) {
            r[i] += c * xj[i];
            q[i] += s * xj[i];
          }
        }
      }
      for (std::size_t b = 0; b < nb; ++b) {
        cplx* o = out.data() + (k0 + b) * n;
        for (std::size_t i = 0; i < n; ++i) o[i] = cplx(re[b * n + i] * scale, im[b * n + i] * scale);
      }
    }
  });
}

void dft_inverse_real(ParallelEngine& engine, std::span<const cplx> half, std::size_t n,
                      std::size_t ell, std::span<double> y) {
  const std::size_t nh = ell / 2 + 1;
  if (half.size() != nh * n || y.size() != n * ell) {
    throw std::invalid_argument("dft_inverse_real: size mismatch");
  }
  if (n == 0) return;
  const Roots roots = make_roots(ell);
  const double scale = 1.0 / std::sqrt(static_cast<double>(ell));
  std::vector<double> re(nh * n);
  std::vector<double> im(nh * n);
  for (std::size_t i = 0; i < nh * n; ++i) {
    re[i] = half[i].real();
    im[i] = half[i].imag();
  }
  auto weight = [&](std::size_t k) {
    return (k == 0 || (ell % 2 == 0 && k == ell / 2)) ? 1.0 : 2.0;
  };

  engine.run(ell, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j0 = begin; j0 < end; j0 += kRowBlock) {
      const std::size_t nb = std::min(kRowBlock, end - j0);
      double* acc = y.data() + n * j0;
      std::fill(acc, acc + nb * n, 0.0);
      for (std::size_t k = 0; k < nh; ++k) {
        const double w = weight(k);
        const double* a = re.data() + n * k;
        const double* b = im.data() + n * k;
        for (std::size_t r = 0; r < nb; ++r) {
          const std::size_t m = ((j0 + r) * k) % ell;
          const double c = w * roots.c[m];
          const double s = w * roots.s[m];
          double* o = acc + r * n;
          for (std::size_t i = 0; i < n; ++i) o[i] += c * a[i] + s * b[i];
        }
      }
      for (std::size_t i = 0; i < nb * n; ++i) acc[i] *= scale;
    }
  });
}

}  // namespace aao
