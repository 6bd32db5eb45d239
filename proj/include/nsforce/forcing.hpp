#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nsforce/field.hpp"
#include "nsforce/operators.hpp"

namespace nsforce {

/// External force: zero, a static field, a sampled time series (piecewise
/// constant on the sampling clock, clamped outside its range), or an
/// arbitrary callable. Forces are solenoidal and mean-free by construction;
/// an optional band limit asserts P_N f = f.
class ForcingSpec {
  public:
    enum class Kind { Zero, Static, Sampled, Callable };

    ForcingSpec() = default;

    static ForcingSpec zero() { return ForcingSpec(); }

    static ForcingSpec static_field(SpectralField f) {
        ForcingSpec spec;
        spec.kind_ = Kind::Static;
        spec.field_ = std::move(f);
        return spec;
    }

    static ForcingSpec sampled(std::vector<double> times, std::vector<SpectralField> frames) {
        if (times.size() != frames.size() || times.empty())
            throw std::invalid_argument("ForcingSpec: sampled series needs matching, nonempty times/frames");
        ForcingSpec spec;
        spec.kind_ = Kind::Sampled;
        spec.times_ = std::move(times);
        spec.frames_ = std::move(frames);
        return spec;
    }

    static ForcingSpec callable(std::function<SpectralField(double)> fn) {
        ForcingSpec spec;
        spec.kind_ = Kind::Callable;
        spec.fn_ = std::move(fn);
        return spec;
    }

    Kind kind() const { return kind_; }
    bool is_zero() const { return kind_ == Kind::Zero; }

    void set_band_limit(WavenumberBall ball) { band_limit_ = ball; }
    std::optional<WavenumberBall> band_limit() const { return band_limit_; }

    /// Evaluate at time t on the given grid (Zero needs the grid to size
    /// the result; other kinds carry their own).
    SpectralField evaluate(double t, const SpectralGrid& grid) const {
        switch (kind_) {
            case Kind::Zero:
                return SpectralField(grid);
            case Kind::Static:
                return field_;
            case Kind::Sampled: {
                // nearest frame at or before t, clamped to the series range
                auto it = std::upper_bound(times_.begin(), times_.end(), t);
                std::size_t idx = (it == times_.begin()) ? 0 : static_cast<std::size_t>(it - times_.begin() - 1);
                return frames_[idx];
            }
            case Kind::Callable:
                return fn_(t);
        }
        throw std::logic_error("ForcingSpec: unreachable");
    }

    const std::vector<double>& sample_times() const { return times_; }
    const std::vector<SpectralField>& frames() const { return frames_; }

  private:
    Kind kind_ = Kind::Zero;
    SpectralField field_;
    std::vector<double> times_;
    std::vector<SpectralField> frames_;
    std::function<SpectralField(double)> fn_;
    std::optional<WavenumberBall> band_limit_;
};

}  // namespace nsforce
