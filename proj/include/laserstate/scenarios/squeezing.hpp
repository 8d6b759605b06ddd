// Squeezed light pumped by a laser. M packets are squeezed with the pump
// phase locked to the beam (squeezing angle 2φ), the other N − M stay
// coherent. Averaged over φ a lone squeezed packet is number-diagonal and
// shows no squeezing; a homodyne whose local oscillator is taken from the
// same beam recovers it.

#pragma once

#include "laserstate/fock.hpp"
#include "laserstate/gaussian.hpp"
#include "laserstate/laser.hpp"
#include "laserstate/scenarios/parallel.hpp"
#include "laserstate/scenarios/result.hpp"

namespace laserstate::scenarios {

struct SqueezingConfig {
    laser::LaserParams laser;
    double r = 0.5;
    std::size_t n_squeezed = 1;  // M
    std::size_t cutoff = 20;
    std::size_t grid_size = 128;
    std::size_t n_angles = 64;
    std::size_t n_samples = 100000;
    std::size_t phase_grid = 64;  // grid φ samples for the phase-independence check
    double offdiag_tol = 1e-10;
    double variance_tol = 1e-9;
    double spread_tol = 1e-10;
    double n_se = 3.0;

    SqueezingConfig() {
        laser.alpha_mag = 3.0;
        laser.n_packets = 2;
    }

    void validate() const {
        laser.validate();
        require(laser.D == 0.0, "squeezing: the pump and local oscillator share a non-diffusing laser (D = 0)");
        require(std::isfinite(r) && r >= 0, "squeezing: r must be finite and >= 0");
        require(n_squeezed >= 1 && n_squeezed < laser.n_packets,
                "squeezing: n_squeezed must satisfy 1 <= M < n_packets so a laser packet is left for the LO");
        require(cutoff >= 2, "squeezing: cutoff must be >= 2");
        require(grid_size >= 2 * cutoff, "squeezing: grid_size must be >= 2 * cutoff");
        require(n_angles >= 1 && n_samples >= 2 && phase_grid >= 2, "squeezing: sample counts too small");
        require(offdiag_tol > 0 && variance_tol > 0 && spread_tol > 0 && n_se > 0, "squeezing: tolerances must be > 0");
    }
};

/// Joint state for one laser phase: M squeezed vacua followed by N − M coherent packets.
inline gaussian::GaussianState squeezed_beam(const laser::PhaseSample& s, double r, std::size_t m) {
    const double phi = std::arg(s.packet_amplitudes[0]);
    gaussian::GaussianState st = gaussian::apply_symplectic(gaussian::GaussianState::vacuum(1), gaussian::squeezer(r, 2 * phi));
    for (std::size_t k = 1; k < m; ++k)
        st = st.tensor(gaussian::apply_symplectic(gaussian::GaussianState::vacuum(1), gaussian::squeezer(r, 2 * phi)));
    for (std::size_t k = m; k < s.packet_amplitudes.size(); ++k) st = st.tensor(gaussian::coherent(s.packet_amplitudes[k]));
    return st;
}

inline double quadrature_variance(const gaussian::GaussianState& s, std::size_t mode, double angle) {
    Eigen::Vector2d u(std::cos(angle), std::sin(angle));
    return u.dot(s.cov().block<2, 2>(Eigen::Index(2 * mode), Eigen::Index(2 * mode)) * u);
}

inline ScenarioResult squeezing(const SqueezingConfig& cfg, const Rng& rng, std::size_t threads = 1) {
    cfg.validate();
    ScenarioResult res;
    res.scenario = "squeezing";
    res.seed = rng.seed();
    res.columns = {"part", "index", "phase", "lo_angle", "value", "expected"};
    const double r = cfg.r;
    const std::size_t lo_packet = cfg.n_squeezed;

    // (a) lone squeezed packet averaged over the laser phase.
    auto averaged = fock::phase_average(
        [&](double phi) { return fock::squeezed_vacuum_fock(r, 2 * phi, cfg.cutoff); }, cfg.grid_size);
    const double offdiag = fock::max_offdiagonal(averaged);
    double min_var = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cfg.n_angles; ++k) {
        const double angle = std::numbers::pi * double(k) / double(cfg.n_angles);
        const double v = fock::quadrature_variance(averaged, 0, angle);
        min_var = std::min(min_var, v);
        res.add_record({std::string("phase_averaged"), std::int64_t(k), 0.0, angle, v, std::cosh(2 * r) / 2});
    }
    res.summaries["phase_averaged"] = ordered_json{{"max_number_offdiagonal", offdiag},
                                                   {"min_quadrature_variance", min_var},
                                                   {"tail_mass", averaged.tail_mass()}};
    res.claim("averaged_not_squeezed", offdiag < cfg.offdiag_tol && min_var >= 0.5 - cfg.variance_tol,
              "phase-averaged squeezed packet is number-diagonal with every quadrature variance >= 1/2",
              ordered_json{{"max_offdiagonal", offdiag}, {"min_variance", min_var},
                           {"offdiag_tol", cfg.offdiag_tol}, {"variance_tol", cfg.variance_tol}});

    // Phase independence of the referenced variance across grid phases.
    auto grid = laser::build_ensemble(cfg.laser, cfg.phase_grid, laser::SamplingMode::grid, rng);
    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
    for (std::size_t k = 0; k < grid.samples.size(); ++k) {
        const auto& s = grid.samples[k];
        const double lo = std::arg(s.packet_amplitudes[lo_packet]);
        const double v = quadrature_variance(squeezed_beam(s, r, cfg.n_squeezed), 0, lo);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
        res.add_record({std::string("grid_analytic"), std::int64_t(k), s.phi, lo, v, std::exp(-2 * r) / 2});
    }
    res.summaries["grid_analytic"] = ordered_json{{"min", vmin}, {"max", vmax}, {"spread", vmax - vmin}};
    res.claim("referenced_variance_phase_independent",
              vmax - vmin < cfg.spread_tol && std::abs(vmin - std::exp(-2 * r) / 2) < cfg.spread_tol,
              "conditional quadrature variance with the beam as LO is e^{-2r}/2 for every laser phase",
              ordered_json{{"spread", vmax - vmin}, {"value", vmin}, {"expected", std::exp(-2 * r) / 2},
                           {"tolerance", cfg.spread_tol}});

    // (b) sampled homodyne: LO from a laser packet of the same sample, and a control with a random LO.
    auto ens = laser::build_ensemble(cfg.laser, cfg.n_samples, laser::SamplingMode::monte_carlo, rng.substream(1));
    const Rng meas = rng.substream(2);
    struct Row {
        double phi, lo, x, lo_ctrl, x_ctrl;
    };
    auto rows = parallel_map<Row>(cfg.n_samples, threads, [&](std::size_t k) {
        Rng g = meas.substream(k);
        const auto& s = ens.samples[k];
        const auto beam = squeezed_beam(s, r, cfg.n_squeezed);
        Row row{};
        row.phi = s.phi;
        row.lo = std::arg(s.packet_amplitudes[lo_packet]);
        row.x = gaussian::homodyne(beam, 0, row.lo, g).first.value;
        row.lo_ctrl = g.uniform_phase();
        row.x_ctrl = gaussian::homodyne(beam, 0, row.lo_ctrl, g).first.value;
        return row;
    });
    std::vector<double> xs, xc;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& w = rows[k];
        res.add_record({std::string("referenced_lo"), std::int64_t(k), w.phi, w.lo, w.x, std::exp(-2 * r) / 2});
        res.add_record({std::string("random_lo"), std::int64_t(k), w.phi, w.lo_ctrl, w.x_ctrl, std::cosh(2 * r) / 2});
        xs.push_back(w.x);
        xc.push_back(w.x_ctrl);
    }
    auto m = moments(xs), mc = moments(xc);
    const double expected = std::exp(-2 * r) / 2, expected_ctrl = std::cosh(2 * r) / 2;
    res.summaries["referenced_lo"] = ordered_json{{"variance", m.variance}, {"variance_se", m.se_variance},
                                                  {"mean", m.mean}, {"expected_variance", expected}};
    res.summaries["random_lo"] = ordered_json{{"variance", mc.variance}, {"variance_se", mc.se_variance},
                                              {"mean", mc.mean}, {"expected_variance", expected_ctrl}};
    res.claim("referenced_homodyne_squeezed", std::abs(m.variance - expected) <= cfg.n_se * m.se_variance,
              "homodyne with the LO from the same beam measures variance e^{-2r}/2",
              ordered_json{{"variance", m.variance}, {"se", m.se_variance}, {"expected", expected}, {"n_se", cfg.n_se}});
    res.claim("random_lo_unsqueezed", std::abs(mc.variance - expected_ctrl) <= cfg.n_se * mc.se_variance,
              "control: an unreferenced LO measures the phase-averaged variance cosh(2r)/2",
              ordered_json{{"variance", mc.variance}, {"se", mc.se_variance}, {"expected", expected_ctrl},
                           {"n_se", cfg.n_se}});

    res.config = ordered_json{{"laser", params_echo(cfg.laser)},
                              {"r", r},
                              {"n_squeezed", cfg.n_squeezed},
                              {"cutoff", cfg.cutoff},
                              {"grid_size", cfg.grid_size},
                              {"n_angles", cfg.n_angles},
                              {"n_samples", cfg.n_samples},
                              {"phase_grid", cfg.phase_grid},
                              {"tolerances", ordered_json{{"offdiag", cfg.offdiag_tol},
                                                          {"variance", cfg.variance_tol},
                                                          {"spread", cfg.spread_tol},
                                                          {"n_se", cfg.n_se}}}};
    return res;
}

}  // namespace laserstate::scenarios
