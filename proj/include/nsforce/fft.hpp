#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace nsforce::fft {

// FFTW plans are created once per grid size with FFTW_ESTIMATE so that the
// planner's choice (and hence the floating-point result) is deterministic.
// Plan execution through fftw_execute_dft is thread-safe; creation is not.

class PlanCache {
  public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    struct Plans {
        fftw_plan forward = nullptr;
        fftw_plan inverse = nullptr;
    };

    Plans get(int M) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(M);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> buf(static_cast<std::size_t>(M) * M);
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        Plans plans;
        plans.forward = fftw_plan_dft_2d(M, M, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
        plans.inverse = fftw_plan_dft_2d(M, M, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
        plans_[M] = plans;
        return plans;
    }

  private:
    PlanCache() = default;
    std::mutex mutex_;
    std::map<int, Plans> plans_;
};

/// Physical -> spectral, normalized by 1/M^2. In-place on a length M*M buffer.
inline void forward(int M, std::complex<double>* data) {
    auto plans = PlanCache::instance().get(M);
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plans.forward, p, p);
    const double scale = 1.0 / (static_cast<double>(M) * M);
    const std::size_t n = static_cast<std::size_t>(M) * M;
    for (std::size_t i = 0; i < n; ++i) data[i] *= scale;
}

/// Spectral -> physical (unnormalized inverse; forward carries the 1/M^2).
inline void inverse(int M, std::complex<double>* data) {
    auto plans = PlanCache::instance().get(M);
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plans.inverse, p, p);
}

}  // namespace nsforce::fft
