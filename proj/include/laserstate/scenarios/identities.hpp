// Exact identities of the phase ensemble: averaging coherent states over a
// uniform phase gives the Poisson mixture of number states, and splitting one
// beam spatially gives the same ensemble as cutting it into packets.

#pragma once

#include "laserstate/fock.hpp"
#include "laserstate/laser.hpp"
#include "laserstate/scenarios/result.hpp"

namespace laserstate::scenarios {

struct IdentitiesConfig {
    laser::LaserParams laser;
    double alpha = 2.0;
    std::size_t cutoff = 40;
    std::size_t grid_size = 256;
    std::vector<std::size_t> split_ways{2, 4};
    std::size_t split_samples = 16;
    double trace_tol = 1e-10;
    double diagonal_tol = 1e-10;
    double amplitude_tol = 1e-12;

    IdentitiesConfig() { laser.alpha_mag = 2.0; }

    void validate() const {
        laser.validate();
        require(laser.D == 0.0, "identities: the split comparison uses a non-diffusing laser (D = 0)");
        require(std::isfinite(alpha) && alpha >= 0, "identities: alpha must be finite and >= 0");
        require(cutoff >= 1, "identities: cutoff must be >= 1");
        require(grid_size >= 2 * cutoff, "identities: grid_size must be >= 2 * cutoff");
        for (auto n : split_ways) require(n >= 1, "identities: split_ways entries must be >= 1");
        require(split_samples >= 1, "identities: split_samples must be >= 1");
        require(trace_tol > 0 && diagonal_tol > 0 && amplitude_tol > 0, "identities: tolerances must be > 0");
    }
};

inline ScenarioResult identities(const IdentitiesConfig& cfg, const Rng& rng, std::size_t = 1) {
    cfg.validate();
    ScenarioResult res;
    res.scenario = "identities";
    res.seed = rng.seed();
    res.columns = {"check", "index", "n", "value", "reference"};

    auto averaged = fock::phase_average(
        [&](double phi) { return fock::coherent_fock(std::polar(cfg.alpha, phi), cfg.cutoff); }, cfg.grid_size);
    auto poisson = fock::poisson_mixture(cfg.alpha, cfg.cutoff);
    const double td = fock::trace_distance(averaged, poisson);
    const double offdiag = fock::max_offdiagonal(averaged);
    for (std::size_t n = 0; n < cfg.cutoff; ++n)
        res.add_record({std::string("photon_distribution"), std::int64_t(n), std::int64_t(n),
                        averaged(n, n).real(), poisson(n, n).real()});
    res.summaries["phase_average"] = ordered_json{{"trace_distance", td},
                                                  {"max_number_offdiagonal", offdiag},
                                                  {"tail_mass", averaged.tail_mass()}};
    res.claim("phase_average_is_poisson", td < cfg.trace_tol,
              "uniform phase average of coherent states equals the Poisson mixture of number states",
              ordered_json{{"trace_distance", td}, {"tolerance", cfg.trace_tol}});
    res.claim("phase_average_number_diagonal", offdiag < cfg.diagonal_tol,
              "the averaged state has no coherence between different photon numbers",
              ordered_json{{"max_offdiagonal", offdiag}, {"tolerance", cfg.diagonal_tol}});

    ordered_json splits = ordered_json::array();
    for (std::size_t n_ways : cfg.split_ways) {
        auto spatial = laser::spatial_split_equivalence(cfg.laser, n_ways, cfg.split_samples);
        auto temporal = laser::build_ensemble(laser::with_packets(cfg.laser, n_ways), cfg.split_samples,
                                              laser::SamplingMode::grid, rng);
        double dev = 0;
        for (std::size_t k = 0; k < cfg.split_samples; ++k)
            for (std::size_t m = 0; m < n_ways; ++m) {
                const complex a = spatial.samples[k].packet_amplitudes[m], b = temporal.samples[k].packet_amplitudes[m];
                dev = std::max(dev, std::abs(a - b));
                res.add_record({"split_" + std::to_string(n_ways), std::int64_t(k), std::int64_t(m), std::abs(a), std::abs(b)});
            }
        splits.push_back(ordered_json{{"n_ways", n_ways}, {"max_amplitude_deviation", dev}});
        res.claim("spatial_split_equals_packets_" + std::to_string(n_ways), dev < cfg.amplitude_tol,
                  "splitter-tree outputs equal the temporal packet ensemble amplitude by amplitude",
                  ordered_json{{"n_ways", n_ways}, {"max_deviation", dev}, {"tolerance", cfg.amplitude_tol}});
    }
    res.summaries["spatial_split"] = splits;

    res.config = ordered_json{{"laser", params_echo(cfg.laser)},
                              {"alpha", cfg.alpha},
                              {"cutoff", cfg.cutoff},
                              {"grid_size", cfg.grid_size},
                              {"split_ways", cfg.split_ways},
                              {"split_samples", cfg.split_samples},
                              {"tolerances", ordered_json{{"trace_distance", cfg.trace_tol},
                                                          {"number_diagonal", cfg.diagonal_tol},
                                                          {"amplitude", cfg.amplitude_tol}}}};
    return res;
}

}  // namespace laserstate::scenarios
