#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsforce/integrate.hpp"
#include "nsforce/operators.hpp"
#include "nsforce/snapshot.hpp"

namespace nsforce {

class ObservationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Project a state onto the observed band. The cutoff must sit inside the
/// dealiased band: the recovery pipeline cannot observe modes the solver
/// does not resolve.
inline SpectralField sample_observation(const FlowState& state, WavenumberBall ball) {
    if (ball.N > state.velocity.grid().dealias_cutoff)
        throw ObservationError("sample_observation: cutoff exceeds dealiased band");
    return low_pass(state.velocity, ball);
}

/// Time-ordered low-mode frames P_N u(t_k) on a uniform clock. This is the
/// only channel from the truth to the recovery code: frames physically
/// contain no modes with |n| > N.
class ObservationSeries {
  public:
    ObservationSeries() = default;

    ObservationSeries(WavenumberBall ball, double sample_interval, double t_start)
        : ball_(ball), sample_interval_(sample_interval), t_start_(t_start) {
        if (!(sample_interval > 0.0))
            throw ObservationError("ObservationSeries: sample interval must be positive");
    }

    WavenumberBall ball() const { return ball_; }
    double sample_interval() const { return sample_interval_; }
    double t_start() const { return t_start_; }
    std::size_t size() const { return frames_.size(); }
    double t_end() const {
        return frames_.empty() ? t_start_ : t_start_ + sample_interval_ * (frames_.size() - 1);
    }

    double frame_time(std::size_t k) const { return t_start_ + sample_interval_ * k; }

    void append(const SpectralField& frame) {
        if (l2_norm(high_pass(frame, ball_)) > 0.0)
            throw ObservationError("ObservationSeries: frame has energy outside |n| <= N");
        frames_.push_back(frame);
    }

    const SpectralField& frame(std::size_t k) const {
        if (k >= frames_.size()) throw ObservationError("ObservationSeries: frame index out of range");
        return frames_[k];
    }

    /// Index of the latest frame at or before t (piecewise-constant clock).
    std::size_t index_at(double t) const {
        if (frames_.empty()) throw ObservationError("ObservationSeries: empty series");
        const double raw = (t - t_start_) / sample_interval_;
        if (raw < -1e-9) throw ObservationError("ObservationSeries: time precedes the series");
        std::size_t k = static_cast<std::size_t>(std::max(0.0, std::floor(raw + 1e-9)));
        if (k >= frames_.size())
            throw ObservationError("ObservationSeries: time beyond the recorded window");
        return k;
    }

    const SpectralField& at_time(double t) const { return frames_[index_at(t)]; }

    bool covers(double t_begin, double t_end) const {
        return !frames_.empty() && t_begin >= t_start_ - 1e-9 && t_end <= this->t_end() + 1e-9;
    }

  private:
    WavenumberBall ball_{1};
    double sample_interval_ = 0.0;
    double t_start_ = 0.0;
    std::vector<SpectralField> frames_;
};

/// Centered second-order difference (frame_{k+1} - frame_{k-1}) / (2 dt_obs).
/// Interior samples only; this is where the force ansatz is evaluated.
inline SpectralField observed_time_derivative(const ObservationSeries& series, std::size_t k) {
    if (series.size() < 3)
        throw ObservationError("observed_time_derivative: need at least 3 frames");
    if (k == 0 || k + 1 >= series.size())
        throw ObservationError("observed_time_derivative: boundary sample has no centered stencil");
    SpectralField d = series.frame(k + 1) - series.frame(k - 1);
    d *= 1.0 / (2.0 * series.sample_interval());
    return d;
}

// ---- on-disk series container: directory of snapshots plus a manifest ----

struct SeriesManifest {
    int N = 0;
    double delta_t_obs = 0.0;
    double t_start = 0.0;
    std::size_t frame_count = 0;
    double nu = 0.0;
    int M = 0;
};

inline std::string obs_frame_name(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "obs_%06zu.snap", k);
    return buf;
}

inline void write_manifest(const std::filesystem::path& path, const SeriesManifest& m) {
    std::ofstream out(path);
    if (!out) throw ObservationError("manifest: cannot open for writing: " + path.string());
    out.precision(17);
    out << "N = " << m.N << "\n"
        << "delta_t_obs = " << m.delta_t_obs << "\n"
        << "t_start = " << m.t_start << "\n"
        << "frame_count = " << m.frame_count << "\n"
        << "nu = " << m.nu << "\n"
        << "M = " << m.M << "\n";
}

inline SeriesManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ObservationError("manifest: cannot open: " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t\r");
            return (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    SeriesManifest m;
    try {
        m.N = std::stoi(kv.at("N"));
        m.delta_t_obs = std::stod(kv.at("delta_t_obs"));
        m.t_start = std::stod(kv.at("t_start"));
        m.frame_count = static_cast<std::size_t>(std::stoull(kv.at("frame_count")));
        m.nu = std::stod(kv.at("nu"));
        m.M = std::stoi(kv.at("M"));
    } catch (const std::exception&) {
        throw ObservationError("manifest: missing or malformed key in " + path.string());
    }
    return m;
}

inline void write_series(const std::filesystem::path& dir, const ObservationSeries& series,
                         double nu, int M) {
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < series.size(); ++k)
        write_snapshot_file((dir / obs_frame_name(k)).string(), series.frame(k),
                            series.frame_time(k), nu,
                            static_cast<std::uint32_t>(series.ball().N));
    SeriesManifest m{series.ball().N, series.sample_interval(), series.t_start(),
                     series.size(), nu, M};
    write_manifest(dir / "manifest.txt", m);
}

inline ObservationSeries read_series(const std::filesystem::path& dir) {
    const SeriesManifest m = read_manifest(dir / "manifest.txt");
    ObservationSeries series(WavenumberBall(m.N), m.delta_t_obs, m.t_start);
    for (std::size_t k = 0; k < m.frame_count; ++k) {
        auto [field, meta] = read_snapshot_file((dir / obs_frame_name(k)).string());
        if (static_cast<int>(meta.M) != m.M)
            throw ObservationError("series: frame resolution disagrees with manifest");
        series.append(field);
    }
    return series;
}

/// CSV of per-frame norms: t, l2_norm, h1_norm.
inline void write_norms_csv(const std::filesystem::path& path, const ObservationSeries& series) {
    std::ofstream out(path);
    if (!out) throw ObservationError("csv: cannot open for writing: " + path.string());
    out.precision(17);
    out << "t,l2_norm,h1_norm\n";
    for (std::size_t k = 0; k < series.size(); ++k)
        out << series.frame_time(k) << ',' << l2_norm(series.frame(k)) << ','
            << h1_norm(series.frame(k)) << "\n";
}

}  // namespace nsforce
