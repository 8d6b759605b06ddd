// Continuous-variable teleportation with a laser-pumped two-mode squeezed
// resource. Alice mixes Victor's input with her half of the resource,
// measures two quadratures in the frame of the laser phase φ and Bob
// displaces with unit gain. The fidelity does not depend on φ as long as
// Victor's input is referenced to the same laser.

#pragma once

#include <cmath>

#include "laserstate/gaussian.hpp"
#include "laserstate/laser.hpp"
#include "laserstate/scenarios/parallel.hpp"
#include "laserstate/scenarios/result.hpp"

namespace laserstate::scenarios {

enum class ReferenceMode { shared, independent };

inline const char* reference_name(ReferenceMode m) { return m == ReferenceMode::shared ? "shared" : "independent"; }

/// Unit-gain coherent-state teleportation fidelity 1/(1 + e^{−2r}).
inline double teleportation_fidelity_oracle(double r) { return 1.0 / (1.0 + std::exp(-2.0 * r)); }

/// Average of the unit-gain fidelity over a uniform phase offset δ between
/// Victor's input and the teleporter frame: F e^{−x} I₀(x), x = 2|α|²/(1 + e^{−2r}).
inline double scrambled_fidelity_oracle(double r, double abs_alpha) {
    const double x = 2.0 * abs_alpha * abs_alpha / (1.0 + std::exp(-2.0 * r));
    return teleportation_fidelity_oracle(r) * std::exp(-x) * std::cyl_bessel_i(0.0, x);
}

/// Bob's outcome-averaged output. Modes: 0 input, 1 Alice, 2 Bob. The
/// resource and the measurement frame carry the laser phase φ.
inline gaussian::GaussianState teleport(const gaussian::GaussianState& input, double r, double phi) {
    using namespace gaussian;
    if (input.n_modes() != 1) throw DimensionError("teleport: single-mode input required");
    auto resource = apply_symplectic(GaussianState::vacuum(2), two_mode_squeezer(r));
    resource = apply_symplectic(resource, phase_shift(phi), {0});
    resource = apply_symplectic(resource, phase_shift(phi), {1});
    auto joint = apply_symplectic(input.tensor(resource), beamsplitter(0.5), {0, 1});
    Mat gain(2, 2);
    gain << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    gain *= std::sqrt(2.0);
    return homodyne_feedforward(joint, {{0, phi}, {1, phi + std::numbers::pi / 2}}, gain);
}

struct TeleportationConfig {
    laser::LaserParams laser;
    std::vector<double> r{0.0, 0.5, 1.0};
    double input_mag = 2.0;
    double input_phase = 0.0;  // Victor's intended phase relative to his reference
    std::vector<ReferenceMode> references{ReferenceMode::shared, ReferenceMode::independent};
    std::size_t grid_samples = 64;
    std::size_t n_samples = 20000;
    double spread_tol = 1e-10;
    double oracle_tol = 1e-6;
    double n_se = 3.0;

    void validate() const {
        laser.validate();
        require(laser.D == 0.0, "teleportation: the resource laser is taken without diffusion (D = 0)");
        require(!r.empty(), "teleportation: r list must be non-empty");
        for (double v : r) require(std::isfinite(v) && v >= 0 && v <= 5, "teleportation: r must lie in [0, 5]");
        require(std::isfinite(input_mag) && input_mag >= 0, "teleportation: input_mag must be finite and >= 0");
        require_finite(input_phase, "input_phase");
        require(!references.empty(), "teleportation: at least one reference mode is required");
        require(grid_samples >= 2 && n_samples >= 2, "teleportation: sample counts too small");
        require(spread_tol > 0 && oracle_tol > 0 && n_se > 0, "teleportation: tolerances must be > 0");
    }
};

inline ScenarioResult teleportation(const TeleportationConfig& cfg, const Rng& rng, std::size_t threads = 1) {
    cfg.validate();
    ScenarioResult res;
    res.scenario = "teleportation";
    res.seed = rng.seed();
    res.columns = {"reference", "r", "sample", "phi", "offset", "fidelity", "oracle"};
    const complex intended = std::polar(cfg.input_mag, cfg.input_phase);
    ordered_json shared_s = ordered_json::array(), indep_s = ordered_json::array();

    for (ReferenceMode mode : cfg.references) {
        for (std::size_t ir = 0; ir < cfg.r.size(); ++ir) {
            const double r = cfg.r[ir];
            const bool shared = mode == ReferenceMode::shared;
            const std::size_t n = shared ? cfg.grid_samples : cfg.n_samples;
            auto ens = laser::build_ensemble(cfg.laser, n, shared ? laser::SamplingMode::grid : laser::SamplingMode::monte_carlo,
                                             rng.substream(shared ? 1 : 2, ir));
            const Rng offsets = rng.substream(3, ir);
            auto rows = parallel_map<std::array<double, 3>>(n, threads, [&](std::size_t k) {
                const double phi = std::arg(ens.samples[k].packet_amplitudes[0]);
                // Independent reference: Victor's frame is offset from the laser by a uniform phase.
                const double offset = shared ? 0.0 : offsets.substream(k).uniform_phase();
                const complex lab_input = intended * std::polar(1.0, phi + offset);
                const auto out = teleport(gaussian::coherent(lab_input), r, phi);
                return std::array<double, 3>{phi, offset, gaussian::fidelity_to_coherent(out, intended * std::polar(1.0, phi))};
            });
            const double oracle = shared ? teleportation_fidelity_oracle(r) : scrambled_fidelity_oracle(r, cfg.input_mag);
            std::vector<double> f;
            for (std::size_t k = 0; k < n; ++k) {
                res.add_record({std::string(reference_name(mode)), r, std::int64_t(k), rows[k][0], rows[k][1], rows[k][2], oracle});
                f.push_back(rows[k][2]);
            }
            const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
            auto m = moments(f);
            ordered_json s = summarize(f);
            s["r"] = r;
            s["oracle"] = oracle;
            if (shared) {
                s["spread"] = *hi - *lo;
                shared_s.push_back(s);
                res.claim("shared_fidelity_r" + format_double(r),
                          *hi - *lo < cfg.spread_tol && std::abs(m.mean - oracle) < cfg.oracle_tol,
                          "shared reference: fidelity is the same for every laser phase and equals 1/(1+e^{-2r})",
                          ordered_json{{"r", r}, {"mean", m.mean}, {"spread", *hi - *lo}, {"oracle", oracle},
                                       {"spread_tol", cfg.spread_tol}, {"oracle_tol", cfg.oracle_tol}});
            } else {
                indep_s.push_back(s);
                const double f_shared = teleportation_fidelity_oracle(r);
                res.claim("independent_fidelity_r" + format_double(r),
                          std::abs(m.mean - oracle) <= cfg.n_se * m.se_mean && m.mean < f_shared,
                          "independent reference: mean fidelity matches the phase-scrambled average and is below shared",
                          ordered_json{{"r", r}, {"mean", m.mean}, {"se", m.se_mean}, {"oracle", oracle},
                                       {"shared_fidelity", f_shared}, {"n_se", cfg.n_se}});
            }
        }
    }
    if (!shared_s.empty()) res.summaries["shared"] = shared_s;
    if (!indep_s.empty()) res.summaries["independent"] = indep_s;

    ordered_json refs = ordered_json::array();
    for (auto m : cfg.references) refs.push_back(reference_name(m));
    res.config = ordered_json{{"laser", params_echo(cfg.laser)},
                              {"r", cfg.r},
                              {"input_mag", cfg.input_mag},
                              {"input_phase", cfg.input_phase},
                              {"reference", refs},
                              {"grid_samples", cfg.grid_samples},
                              {"n_samples", cfg.n_samples},
                              {"gain", 1.0},
                              {"tolerances", ordered_json{{"spread", cfg.spread_tol},
                                                          {"oracle", cfg.oracle_tol},
                                                          {"n_se", cfg.n_se}}}};
    return res;
}

}  // namespace laserstate::scenarios
