#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "pbnlc/core/types.hpp"

namespace pbnlc::fft {

namespace detail {

// FFTW planning is not thread-safe, executing an existing plan on new arrays
// is. Plans are created once per length under a lock with FFTW_ESTIMATE so the
// chosen algorithm (and therefore every rounding decision) does not depend on
// timing measurements.
class PlanCache {
 public:
  struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
  };

  PlanCache() = default;
  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  Plans get(std::size_t n) {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(n); it != plans_.end()) return it->second;
    auto* scratch = fftw_alloc_complex(n);
    const int len = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Plans p;
    p.forward = fftw_plan_dft_1d(len, scratch, scratch, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft_1d(len, scratch, scratch, FFTW_BACKWARD, flags);
    fftw_free(scratch);
    if (!p.forward || !p.backward) throw Error("fft: FFTW planning failed");
    plans_.emplace(n, p);
    return p;
  }

 private:
  std::mutex mutex_;
  std::unordered_map<std::size_t, Plans> plans_;
};

inline PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

inline fftw_complex* as_fftw(std::span<cd> x) { return reinterpret_cast<fftw_complex*>(x.data()); }

}  // namespace detail

/// In-place unnormalized forward DFT, X[k] = sum_n x[n] exp(-j 2 pi k n / N).
inline void forward(std::span<cd> x) {
  if (x.empty()) return;
  auto plans = detail::plan_cache().get(x.size());
  fftw_execute_dft(plans.forward, detail::as_fftw(x), detail::as_fftw(x));
}

/// In-place inverse DFT including the 1/N normalization.
inline void inverse(std::span<cd> x) {
  if (x.empty()) return;
  auto plans = detail::plan_cache().get(x.size());
  fftw_execute_dft(plans.backward, detail::as_fftw(x), detail::as_fftw(x));
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : x) v *= scale;
}

inline cvec fft(cvec x) {
  forward(x);
  return x;
}

inline cvec ifft(cvec x) {
  inverse(x);
  return x;
}

/// Baseband frequencies (Hz) of the DFT bins in FFT order.
inline std::vector<double> bin_frequencies(std::size_t n, double sample_rate) {
  std::vector<double> f(n);
  const double df = sample_rate / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<long long>(k);
    const auto nn = static_cast<long long>(n);
    f[k] = static_cast<double>(kk < (nn + 1) / 2 ? kk : kk - nn) * df;
  }
  return f;
}

}  // namespace pbnlc::fft
