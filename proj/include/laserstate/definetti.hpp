// definetti.hpp
// Bayesian bookkeeping for the unknown laser phase. The posterior lives on a
// uniform phase grid (optionally times an amplitude grid) restricted to the
// coherent family, is updated by homodyne and heterodyne records, and yields
// predictive states for packets that have not been measured.

#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "laserstate/common.hpp"
#include "laserstate/fock.hpp"
#include "laserstate/laser.hpp"

namespace laserstate::definetti {

inline constexpr std::size_t default_grid_size = 1024;
inline constexpr std::size_t min_grid_size = 8;
inline constexpr double default_sharpen_threshold = 0.05;

enum class MeasurementKind { homodyne, heterodyne };

struct RecordEntry {
    std::size_t packet = 0;
    MeasurementKind kind = MeasurementKind::heterodyne;
    double angle = 0.0;   // homodyne quadrature angle θ
    double value = 0.0;   // homodyne outcome
    complex beta{0, 0};   // heterodyne outcome, density e^{−|β−α|²}/π

    static RecordEntry homodyne(std::size_t packet, double angle, double value) {
        return {packet, MeasurementKind::homodyne, angle, value, {}};
    }
    static RecordEntry heterodyne(std::size_t packet, complex beta) {
        return {packet, MeasurementKind::heterodyne, 0.0, 0.0, beta};
    }
};

/// A packet split 50/50 with homodynes at θ and θ + π/2 on the halves gives
/// x₁ ~ N(|α| cos(φ−θ), ½) and x₂ ~ N(|α| sin(φ−θ), ½): the same likelihood as
/// a heterodyne outcome β = e^{iθ}(x₁ + i x₂).
inline RecordEntry dual_homodyne(std::size_t packet, double theta, double x_theta, double x_perp) {
    return RecordEntry::heterodyne(packet, std::polar(1.0, theta) * complex(x_theta, x_perp));
}

using MeasurementRecord = std::vector<RecordEntry>;

/// log p(outcome | coherent(a e^{iφ})).
inline double log_likelihood(const RecordEntry& r, double amplitude, double phi) {
    if (r.kind == MeasurementKind::homodyne) {
        const double d = r.value - std::sqrt(2.0) * amplitude * std::cos(phi - r.angle);
        return -d * d - 0.5 * std::log(pi);
    }
    return -std::norm(r.beta - std::polar(amplitude, phi)) - std::log(pi);
}

class Posterior {
public:
    /// Phase grid of `grid_size` points on [0, 2π); amplitudes empty means the
    /// packet amplitude is taken from the laser parameters at update time.
    Posterior(std::size_t grid_size, std::vector<double> amplitudes = {})
        : grid_size_(grid_size), amplitudes_(std::move(amplitudes)) {
        require(grid_size_ >= min_grid_size, "Posterior: grid_size must be >= 8");
        for (double a : amplitudes_) require(std::isfinite(a) && a >= 0, "Posterior: amplitudes must be finite and >= 0");
        log_w_.assign(grid_size_ * n_amplitudes(), 0.0);
        normalize();
    }

    std::size_t grid_size() const { return grid_size_; }
    std::size_t n_amplitudes() const { return amplitudes_.empty() ? 1 : amplitudes_.size(); }
    const std::vector<double>& amplitude_grid() const { return amplitudes_; }
    bool has_amplitude_grid() const { return !amplitudes_.empty(); }
    double phase(std::size_t g) const { return two_pi * double(g) / double(grid_size_); }
    std::vector<double> phases() const {
        std::vector<double> out(grid_size_);
        for (std::size_t g = 0; g < grid_size_; ++g) out[g] = phase(g);
        return out;
    }
    /// Joint log-weights, index a·G + g, normalized.
    const std::vector<double>& log_weights() const { return log_w_; }
    const std::set<std::size_t>& consumed() const { return consumed_; }

    /// Marginal phase probabilities.
    std::vector<double> phase_weights() const {
        std::vector<double> w(grid_size_, 0.0);
        for (std::size_t a = 0; a < n_amplitudes(); ++a)
            for (std::size_t g = 0; g < grid_size_; ++g) w[g] += std::exp(log_w_[a * grid_size_ + g]);
        return w;
    }

    std::vector<double> amplitude_weights() const {
        std::vector<double> w(n_amplitudes(), 0.0);
        for (std::size_t a = 0; a < n_amplitudes(); ++a)
            for (std::size_t g = 0; g < grid_size_; ++g) w[a] += std::exp(log_w_[a * grid_size_ + g]);
        return w;
    }

    void add_log_weight(std::size_t a, std::size_t g, double delta) { log_w_[a * grid_size_ + g] += delta; }
    void set_log_weights(std::vector<double> lw) {
        if (lw.size() != log_w_.size()) throw DimensionError("Posterior: log-weight vector has the wrong length");
        log_w_ = std::move(lw);
        normalize();
    }
    void mark_consumed(std::size_t packet) { consumed_.insert(packet); }

    void normalize() {
        const double mx = *std::max_element(log_w_.begin(), log_w_.end());
        if (!std::isfinite(mx)) throw DomainError("Posterior: every grid point has zero likelihood");
        double s = 0;
        for (double v : log_w_) s += std::exp(v - mx);
        const double lse = mx + std::log(s);
        for (double& v : log_w_) v -= lse;
    }

private:
    std::size_t grid_size_;
    std::vector<double> amplitudes_;
    std::vector<double> log_w_;
    std::set<std::size_t> consumed_;
};

inline Posterior uniform_prior(std::size_t grid_size = default_grid_size) { return Posterior(grid_size); }

inline Posterior uniform_prior(std::size_t grid_size, std::vector<double> amplitude_grid) {
    require(!amplitude_grid.empty(), "uniform_prior: amplitude grid must be non-empty");
    return Posterior(grid_size, std::move(amplitude_grid));
}

/// Adds the log-likelihood of every record entry and renormalizes. Entries
/// commute, so the result does not depend on record order.
inline Posterior update(Posterior post, const MeasurementRecord& record, const laser::LaserParams& params) {
    params.validate();
    const double a0 = laser::ideal_packet_amplitude(params);
    std::set<std::size_t> seen;
    for (const auto& r : record) {
        if (r.packet >= params.n_packets)
            throw DimensionError("update: record references packet " + std::to_string(r.packet) + " beyond N = " +
                                 std::to_string(params.n_packets));
        if (post.consumed().count(r.packet) || !seen.insert(r.packet).second)
            throw DomainError("update: packet " + std::to_string(r.packet) + " was already measured");
        if (!std::isfinite(r.angle) || !std::isfinite(r.value) || !std::isfinite(r.beta.real()) ||
            !std::isfinite(r.beta.imag()))
            throw DomainError("update: non-finite outcome for packet " + std::to_string(r.packet));
    }
    if (record.empty()) return post;
    const auto& amps = post.amplitude_grid();
    for (std::size_t a = 0; a < post.n_amplitudes(); ++a) {
        const double amp = amps.empty() ? a0 : amps[a];
        for (std::size_t g = 0; g < post.grid_size(); ++g) {
            double ll = 0;
            for (const auto& r : record) ll += log_likelihood(r, amp, post.phase(g));
            post.add_log_weight(a, g, ll);
        }
    }
    for (const auto& r : record) post.mark_consumed(r.packet);
    post.normalize();
    return post;
}

struct Concentration {
    double circular_mean = 0.0;
    double circular_std = std::numeric_limits<double>::infinity();
    double angular_variance = 0.0;  // E[wrap(φ − circular_mean)²]
    double entropy = 0.0;           // nats, of the discrete joint posterior
};

inline Concentration concentration_metrics(const Posterior& post) {
    auto w = post.phase_weights();
    auto cs = circular_summary(post.phases(), w);
    Concentration c;
    c.circular_mean = cs.mean;
    c.circular_std = cs.stddev;
    for (std::size_t g = 0; g < post.grid_size(); ++g) {
        const double d = wrap_signed(post.phase(g) - cs.mean);
        c.angular_variance += w[g] * d * d;
    }
    for (double lw : post.log_weights())
        if (std::isfinite(lw)) c.entropy -= std::exp(lw) * lw;
    return c;
}

/// Replace the phase marginal by a wrapped Gaussian with the posterior's
/// circular mean and std once that std falls below `threshold`; otherwise
/// return the posterior unchanged. The amplitude marginal is kept.
inline Posterior sharpen(const Posterior& post, double threshold = default_sharpen_threshold) {
    auto c = concentration_metrics(post);
    if (!(c.circular_std < threshold)) return post;
    const double sd = std::max(c.circular_std, 1e-300);
    auto aw = post.amplitude_weights();
    std::vector<double> lw(post.log_weights().size());
    for (std::size_t a = 0; a < post.n_amplitudes(); ++a)
        for (std::size_t g = 0; g < post.grid_size(); ++g) {
            const double d = wrap_signed(post.phase(g) - c.circular_mean);
            lw[a * post.grid_size() + g] = std::log(aw[a]) - d * d / (2 * sd * sd);
        }
    Posterior out = post;
    out.set_log_weights(std::move(lw));
    return out;
}

struct Interval {
    double lower = 0.0;  // unwrapped: lower ≤ upper, upper − lower ≤ 2π
    double upper = 0.0;
    bool contains(double phi) const {
        const double mid = 0.5 * (lower + upper);
        const double d = wrap_signed(phi - mid);
        return mid + d >= lower && mid + d <= upper;
    }
};

/// Central credible interval of the phase marginal. The circle is cut at
/// the point opposite the circular mean; each grid point carries its mass
/// uniformly over its cell.
inline Interval credible_interval(const Posterior& post, double mass = 0.9) {
    require(mass > 0 && mass < 1, "credible_interval: mass must lie in (0, 1)");
    const auto w = post.phase_weights();
    const auto c = concentration_metrics(post);
    const std::size_t G = post.grid_size();
    const double h = two_pi / double(G);
    const double cut = c.circular_mean - pi;
    // Cells ordered by their unwrapped position after the cut.
    std::vector<std::pair<double, double>> cells;  // (cell start, weight)
    cells.reserve(G);
    for (std::size_t g = 0; g < G; ++g) {
        double start = post.phase(g) - 0.5 * h;
        start = cut + wrap_phase(start - cut);
        cells.emplace_back(start, w[g]);
    }
    std::sort(cells.begin(), cells.end());
    auto locate = [&](double q) {
        double acc = 0;
        for (const auto& [start, weight] : cells) {
            if (acc + weight >= q) return start + h * (weight > 0 ? (q - acc) / weight : 0.0);
            acc += weight;
        }
        return cells.back().first + h;
    };
    const double tail = 0.5 * (1 - mass);
    return {locate(tail), locate(1 - tail)};
}

/// Posterior-weighted mixture of coherent packet states: the single-packet
/// predictive state.
inline fock::FockDensityMatrix predictive_state(const Posterior& post, const laser::LaserParams& params,
                                                std::size_t cutoff) {
    const double a0 = laser::ideal_packet_amplitude(params);
    const std::size_t d = cutoff;
    fock::CMat acc = fock::CMat::Zero(Eigen::Index(d), Eigen::Index(d));
    double tail = 0, total = 0;
    const auto& amps = post.amplitude_grid();
    for (std::size_t a = 0; a < post.n_amplitudes(); ++a) {
        const double amp = amps.empty() ? a0 : amps[a];
        for (std::size_t g = 0; g < post.grid_size(); ++g) {
            const double w = std::exp(post.log_weights()[a * post.grid_size() + g]);
            if (w < 1e-300) continue;
            fock::CVec c = fock::coherent_amplitudes(std::polar(amp, post.phase(g)), d);
            acc.noalias() += w * (c * c.adjoint());
            tail += w * std::max(0.0, 1.0 - c.squaredNorm());
            total += w;
        }
    }
    return {1, d, acc / total, tail / total};
}

/// One draw from the M-packet predictive ρ^{⊗M}: a single (amplitude, phase)
/// from the posterior, shared by all M packets.
inline std::vector<complex> sample_predictive_packets(const Posterior& post, const laser::LaserParams& params,
                                                      std::size_t m_packets, Rng& rng) {
    require(m_packets >= 1, "sample_predictive_packets: m_packets must be >= 1");
    const double a0 = laser::ideal_packet_amplitude(params);
    const auto& lw = post.log_weights();
    const double u = rng.uniform();
    double acc = 0;
    std::size_t idx = lw.size() - 1;
    for (std::size_t i = 0; i < lw.size(); ++i) {
        acc += std::exp(lw[i]);
        if (acc >= u) {
            idx = i;
            break;
        }
    }
    const std::size_t a = idx / post.grid_size(), g = idx % post.grid_size();
    const double amp = post.has_amplitude_grid() ? post.amplitude_grid()[a] : a0;
    // Spread the draw uniformly within its grid cell.
    const double phi = post.phase(g) + (rng.uniform() - 0.5) * two_pi / double(post.grid_size());
    return std::vector<complex>(m_packets, std::polar(amp, phi));
}

// --- Serialization --------------------------------------------------------------

inline constexpr int posterior_format_version = 1;

inline nlohmann::json to_json(const Posterior& p) {
    return nlohmann::json{{"format", "laserstate.posterior"},
                          {"version", posterior_format_version},
                          {"grid_size", p.grid_size()},
                          {"grid", p.phases()},
                          {"amplitude_grid", p.amplitude_grid()},
                          {"log_weights", p.log_weights()},
                          {"consumed_packets", std::vector<std::size_t>(p.consumed().begin(), p.consumed().end())}};
}

inline Posterior posterior_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "laserstate.posterior") throw Error("posterior_from_json: not a posterior document");
    if (j.at("version").get<int>() != posterior_format_version)
        throw Error("posterior_from_json: unsupported version " + j.at("version").dump());
    Posterior p(j.at("grid_size").get<std::size_t>(), j.at("amplitude_grid").get<std::vector<double>>());
    p.set_log_weights(j.at("log_weights").get<std::vector<double>>());
    for (auto k : j.at("consumed_packets").get<std::vector<std::size_t>>()) p.mark_consumed(k);
    return p;
}

}  // namespace laserstate::definetti
