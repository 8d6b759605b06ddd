// Two π/2 pulses on a two-level atom. Each pulse is a phase-parameterized
// unitary with the phase of the laser packet that drives it; the field is
// strong enough not to entangle with the atom.

#pragma once

#include <Eigen/Dense>

#include "laserstate/laser.hpp"
#include "laserstate/scenarios/parallel.hpp"
#include "laserstate/scenarios/result.hpp"

namespace laserstate::scenarios {

using AtomMatrix = Eigen::Matrix2cd;

/// Density matrix over {|g⟩, |e⟩}.
class AtomState {
public:
    explicit AtomState(AtomMatrix rho) : rho_(std::move(rho)) {
        if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("AtomState: not Hermitian");
        if (std::abs(rho_.trace() - complex(1, 0)) > 1e-12) throw DomainError("AtomState: trace must be 1");
        Eigen::SelfAdjointEigenSolver<AtomMatrix> es(rho_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-12) throw DomainError("AtomState: not positive semidefinite");
    }
    static AtomState ground() {
        AtomMatrix m = AtomMatrix::Zero();
        m(0, 0) = 1;
        return AtomState(m);
    }
    const AtomMatrix& matrix() const { return rho_; }
    double excited_probability() const { return rho_(1, 1).real(); }
    AtomState evolve(const AtomMatrix& u) const { return AtomState(u * rho_ * u.adjoint()); }

private:
    AtomMatrix rho_;
};

/// π/2 pulse with field phase φ: |g⟩ → (|g⟩ + e^{iφ}|e⟩)/√2.
inline AtomMatrix half_pi_pulse(double phi) {
    AtomMatrix u;
    u << 1.0, -std::polar(1.0, -phi), std::polar(1.0, phi), 1.0;
    return u / std::sqrt(2.0);
}

/// Π_φ = ½(|g⟩ + e^{iφ}|e⟩)(⟨g| + e^{−iφ}⟨e|).
inline AtomMatrix pi_phi(double phi) {
    Eigen::Vector2cd v(1.0, std::polar(1.0, phi));
    return 0.5 * v * v.adjoint();
}

enum class PulseSource { same_laser, independent_laser };

struct AtomInterferenceConfig {
    laser::LaserParams laser;
    std::vector<PulseSource> sources{PulseSource::same_laser, PulseSource::independent_laser};
    std::size_t n_samples = 64;  // grid points per laser phase
    double tolerance = 1e-12;

    void validate() const {
        laser.validate();
        require(laser.D == 0.0, "atom_interference: pulses are taken from a non-diffusing laser (D = 0)");
        require(laser.n_packets >= 2, "atom_interference: two packets are needed for two pulses");
        require(n_samples >= 2, "atom_interference: n_samples must be >= 2");
        require(!sources.empty(), "atom_interference: at least one second-pulse source is required");
        require(tolerance > 0, "atom_interference: tolerance must be > 0");
    }
};

inline const char* source_name(PulseSource s) { return s == PulseSource::same_laser ? "same_laser" : "independent_laser"; }

inline ScenarioResult atom_interference(const AtomInterferenceConfig& cfg, const Rng& rng, std::size_t threads = 1) {
    cfg.validate();
    ScenarioResult res;
    res.scenario = "atom_interference";
    res.seed = rng.seed();
    res.columns = {"source", "sample", "phi_first", "phi_second", "p_excited_mid", "p_excited"};
    const std::size_t n = cfg.n_samples;
    auto ensemble = laser::build_ensemble(cfg.laser, n, laser::SamplingMode::grid, rng);

    // Field traced out after the first pulse: average of Π_φ over the laser phase.
    AtomMatrix mid = AtomMatrix::Zero();
    for (const auto& s : ensemble.samples) {
        auto after = AtomState::ground().evolve(half_pi_pulse(std::arg(s.packet_amplitudes[0])));
        if ((after.matrix() - pi_phi(std::arg(s.packet_amplitudes[0]))).cwiseAbs().maxCoeff() > cfg.tolerance)
            throw Error("atom_interference: first pulse does not produce Π_φ");
        mid += after.matrix() / double(n);
    }
    const double mixed_dev = (mid - 0.5 * AtomMatrix::Identity()).cwiseAbs().maxCoeff();
    res.summaries["mid_protocol_atom"] = ordered_json{{"rho_gg", mid(0, 0).real()},
                                                      {"rho_ee", mid(1, 1).real()},
                                                      {"abs_rho_ge", std::abs(mid(0, 1))},
                                                      {"max_deviation_from_identity_over_2", mixed_dev}};
    res.claim("mid_protocol_maximally_mixed", mixed_dev <= cfg.tolerance,
              "atom after the first pulse with the field traced out equals I/2",
              ordered_json{{"max_deviation", mixed_dev}, {"tolerance", cfg.tolerance}});

    for (PulseSource src : cfg.sources) {
        // Independent second laser: its own grid of phases, crossed with the first.
        const std::size_t m = src == PulseSource::same_laser ? 1 : n;
        auto rows = parallel_map<std::vector<std::array<double, 4>>>(n, threads, [&](std::size_t k) {
            std::vector<std::array<double, 4>> out;
            const double phi = std::arg(ensemble.samples[k].packet_amplitudes[0]);
            for (std::size_t j = 0; j < m; ++j) {
                const double phi2 = src == PulseSource::same_laser ? std::arg(ensemble.samples[k].packet_amplitudes[1])
                                                                   : phi + two_pi * double(j) / double(m);
                auto first = AtomState::ground().evolve(half_pi_pulse(phi));
                auto second = first.evolve(half_pi_pulse(phi2));
                out.push_back({phi, phi2, first.excited_probability(), second.excited_probability()});
            }
            return out;
        });
        std::vector<double> pe;
        for (std::size_t k = 0; k < n; ++k)
            for (const auto& r : rows[k]) {
                res.add_record({std::string(source_name(src)), std::int64_t(k), r[0], r[1], r[2], r[3]});
                pe.push_back(r[3]);
            }
        const auto [lo, hi] = std::minmax_element(pe.begin(), pe.end());
        double mean = 0;
        for (double v : pe) mean += v / double(pe.size());
        ordered_json summary = summarize(pe);
        summary["spread"] = *hi - *lo;
        res.summaries[std::string("p_excited_") + source_name(src)] = summary;
        if (src == PulseSource::same_laser) {
            res.claim("same_laser_excites", std::abs(mean - 1.0) <= cfg.tolerance && *hi - *lo <= 1e-10,
                      "two pulses from one laser: P(e) = 1 for every laser phase",
                      ordered_json{{"mean", mean}, {"spread", *hi - *lo}, {"tolerance", cfg.tolerance}});
        } else {
            res.claim("independent_lasers_half", std::abs(mean - 0.5) <= cfg.tolerance,
                      "second pulse from an independent laser: P(e) averages to 1/2",
                      ordered_json{{"mean", mean}, {"tolerance", cfg.tolerance}});
        }
    }

    ordered_json srcs = ordered_json::array();
    for (auto s : cfg.sources) srcs.push_back(source_name(s));
    res.config = ordered_json{{"laser", params_echo(cfg.laser)},
                              {"second_pulse_source", srcs},
                              {"n_samples", cfg.n_samples},
                              {"tolerances", ordered_json{{"exact", cfg.tolerance}}}};
    return res;
}

}  // namespace laserstate::scenarios
