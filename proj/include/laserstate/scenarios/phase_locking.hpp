// Relative phase between two independent lasers. Laser A supplies the local
// oscillator; each packet of laser B is split and homodyned at two
// orthogonal angles and the relative phase is estimated from a fresh
// uniform prior. The first estimate of a run is random from run to run;
// later estimates within a run reproduce it.

#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include "laserstate/definetti.hpp"
#include "laserstate/gaussian.hpp"
#include "laserstate/laser.hpp"
#include "laserstate/scenarios/parallel.hpp"
#include "laserstate/scenarios/result.hpp"

namespace laserstate::scenarios {

struct PhaseLockingConfig {
    laser::LaserParams laser_a;
    laser::LaserParams laser_b;
    std::size_t n_runs = 1000;
    std::size_t n_repeats = 4;        // estimates after the first, on packets 1..n_repeats
    std::size_t grid_size = 1024;
    std::size_t histogram_bins = 16;
    double diffusion_D = 0.02;        // laser B diffusion for the decay check; 0 disables it
    std::size_t decay_lags = 16;
    std::size_t decay_runs = 2000;
    std::size_t batches = 20;
    double chi2_p_min = 1e-3;
    double n_se = 3.0;

    PhaseLockingConfig() {
        laser_a.alpha_mag = 10.0;
        laser_b.alpha_mag = 3.0;
        laser_a.n_packets = laser_b.n_packets = 8;
    }

    void validate() const {
        laser_a.validate();
        laser_b.validate();
        require(laser_a.T == laser_b.T, "phase_locking: lasers A and B must share the packet duration T");
        require(n_runs >= 2 * batches, "phase_locking: n_runs must be >= 2 * batches");
        require(n_repeats >= 1, "phase_locking: n_repeats must be >= 1");
        require(n_repeats < laser_b.n_packets && n_repeats < laser_a.n_packets,
                "phase_locking: n_repeats must be below n_packets");
        require(grid_size >= definetti::min_grid_size, "phase_locking: grid_size must be >= 8");
        require(histogram_bins >= 2, "phase_locking: histogram_bins must be >= 2");
        require(diffusion_D >= 0 && diffusion_D * laser_b.T < laser::max_diffusion_per_packet,
                "phase_locking: diffusion_D * T must lie in [0, 0.1)");
        require(decay_lags >= 2, "phase_locking: decay_lags must be >= 2");
        require(decay_runs >= 2 * batches && batches >= 2, "phase_locking: decay_runs must be >= 2 * batches >= 4");
        require(chi2_p_min > 0 && chi2_p_min < 1, "phase_locking: chi2_p_min must lie in (0, 1)");
        require(n_se > 0, "phase_locking: n_se must be > 0");
    }
};

struct RelativePhaseEstimate {
    double truth = 0.0;  // arg α_B − arg α_A
    double x_theta = 0.0;
    double x_perp = 0.0;
    double estimate = 0.0;
    double posterior_std = 0.0;
    double posterior_variance = 0.0;
};

/// Split packet b on a balanced beamsplitter, homodyne the halves at the LO
/// phase of packet a and a quarter period later, and condition a uniform
/// prior on the two outcomes.
inline RelativePhaseEstimate estimate_relative_phase(complex alpha_a, complex alpha_b, double alpha0_b,
                                                     std::size_t grid_size, Rng& rng) {
    RelativePhaseEstimate out;
    out.truth = wrap_phase(std::arg(alpha_b) - std::arg(alpha_a));
    const complex in_lo_frame = alpha_b * std::polar(1.0, -std::arg(alpha_a));
    auto st = gaussian::coherent(in_lo_frame).tensor(gaussian::GaussianState::vacuum(1));
    st = gaussian::apply_symplectic(st, gaussian::beamsplitter(0.5));
    auto [h1, rest] = gaussian::homodyne(st, 0, 0.0, rng);
    auto [h2, none] = gaussian::homodyne(rest, 0, pi / 2, rng);
    out.x_theta = h1.value;
    out.x_perp = h2.value;
    laser::LaserParams p;
    p.alpha_mag = alpha0_b;
    p.n_packets = 1;
    auto post = definetti::update(definetti::uniform_prior(grid_size), {definetti::dual_homodyne(0, 0.0, h1.value, h2.value)}, p);
    auto c = definetti::concentration_metrics(post);
    out.estimate = c.circular_mean;
    out.posterior_std = c.circular_std;
    out.posterior_variance = c.angular_variance;
    return out;
}

/// Pearson χ² test of uniformity on [0, 2π) with equal-width bins; returns the p-value.
inline double chi2_uniform_pvalue(const std::vector<double>& angles, std::size_t bins, double* statistic = nullptr) {
    std::vector<double> counts(bins, 0.0);
    for (double a : angles) counts[std::min(bins - 1, std::size_t(wrap_phase(a) / two_pi * double(bins)))] += 1;
    const double expected = double(angles.size()) / double(bins);
    double chi2 = 0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    if (statistic) *statistic = chi2;
    boost::math::chi_squared_distribution<double> dist(double(bins - 1));
    return boost::math::cdf(boost::math::complement(dist, chi2));
}

namespace detail {

enum class LockingPart { locked, control, diffusing };

inline const char* part_name(LockingPart p) {
    switch (p) {
        case LockingPart::locked: return "locked";
        case LockingPart::control: return "control";
        default: return "diffusing";
    }
}

/// Estimates on packets 0..n_estimates−1 of one run.
inline std::vector<RelativePhaseEstimate> locking_run(const laser::LaserParams& a, const laser::LaserParams& b,
                                                      std::size_t n_estimates, LockingPart part, std::size_t grid,
                                                      const Rng& run_rng) {
    Rng ra = run_rng.substream(0), rb = run_rng.substream(1), rm = run_rng.substream(2), rc = run_rng.substream(3);
    auto path_a = laser::sample_phase_path(a, laser::default_substeps, ra);
    auto path_b = laser::sample_phase_path(b, laser::default_substeps, rb);
    if (part == LockingPart::control)
        for (auto& amp : path_b.packet_amplitudes) amp = std::polar(std::abs(amp), rc.uniform_phase());
    const double a0 = laser::ideal_packet_amplitude(b);
    std::vector<RelativePhaseEstimate> out;
    for (std::size_t n = 0; n < n_estimates; ++n)
        out.push_back(estimate_relative_phase(path_a.packet_amplitudes[n], path_b.packet_amplitudes[n], a0, grid, rm));
    return out;
}

}  // namespace detail

inline ScenarioResult phase_locking(const PhaseLockingConfig& cfg, const Rng& rng, std::size_t threads = 1) {
    cfg.validate();
    using detail::LockingPart;
    ScenarioResult res;
    res.scenario = "phase_locking";
    res.seed = rng.seed();
    res.columns = {"part",     "run",      "packet",        "true_relative_phase",
                   "x_theta",  "x_perp",   "estimate",      "posterior_std", "posterior_variance"};

    const std::size_t n_est = cfg.n_repeats + 1;
    auto run_part = [&](LockingPart part, const laser::LaserParams& a, const laser::LaserParams& b, std::size_t runs,
                        std::size_t estimates) {
        auto base = rng.substream(static_cast<std::uint64_t>(part) + 1);
        auto out = parallel_map<std::vector<RelativePhaseEstimate>>(runs, threads, [&](std::size_t i) {
            return detail::locking_run(a, b, estimates, part, cfg.grid_size, base.substream(i));
        });
        for (std::size_t i = 0; i < runs; ++i)
            for (std::size_t n = 0; n < estimates; ++n) {
                const auto& e = out[i][n];
                res.add_record({std::string(detail::part_name(part)), std::int64_t(i), std::int64_t(n), e.truth,
                                e.x_theta, e.x_perp, e.estimate, e.posterior_std, e.posterior_variance});
            }
        return out;
    };

    // (i), (ii): independent lasers, packets share each laser's phase.
    auto locked = run_part(LockingPart::locked, cfg.laser_a, cfg.laser_b, cfg.n_runs, n_est);
    std::vector<double> first, dev, oracle_var, cos_locked;
    for (const auto& run : locked) {
        first.push_back(run[0].estimate);
        dev.push_back(wrap_signed(run[1].estimate - run[0].estimate));
        oracle_var.push_back(run[0].posterior_variance + run[1].posterior_variance);
        cos_locked.push_back(std::cos(run[1].estimate - run[0].estimate));
    }
    double chi2 = 0;
    const double p_uniform = chi2_uniform_pvalue(first, cfg.histogram_bins, &chi2);
    res.summaries["first_estimate_uniformity"] = ordered_json{{"bins", cfg.histogram_bins}, {"chi2", chi2}, {"p_value", p_uniform}};
    res.claim("first_estimate_uniform", p_uniform > cfg.chi2_p_min,
              "16-bin chi-square p-value of the first relative-phase estimate across runs",
              ordered_json{{"p_value", p_uniform}, {"threshold", cfg.chi2_p_min}});

    const bool stationary = cfg.laser_a.D == 0.0 && cfg.laser_b.D == 0.0;
    auto md = moments(dev);
    auto mo = moments(oracle_var);
    res.summaries["repeat_deviation"] = summarize(dev);
    res.summaries["repeat_deviation"]["oracle_variance"] = mo.mean;
    res.summaries["repeat_deviation"]["oracle_variance_se"] = mo.se_mean;
    res.summaries["locked_mean_cos"] = summarize(cos_locked);
    if (stationary) {
        const double var_se = std::hypot(md.se_variance, mo.se_mean);
        res.claim("repeat_estimate_agrees", std::abs(md.mean) <= cfg.n_se * md.se_mean &&
                                                std::abs(md.variance - mo.mean) <= cfg.n_se * var_se,
                  "second estimate minus first: mean consistent with 0, variance consistent with the sum of the "
                  "two posterior variances",
                  ordered_json{{"mean", md.mean},
                               {"mean_se", md.se_mean},
                               {"variance", md.variance},
                               {"oracle_variance", mo.mean},
                               {"variance_se", var_se}});
    }

    // Control: every packet of B carries its own phase.
    auto control = run_part(LockingPart::control, cfg.laser_a, cfg.laser_b, cfg.n_runs, n_est);
    std::vector<double> cc, cs;
    for (const auto& run : control) {
        cc.push_back(std::cos(run[1].estimate - run[0].estimate));
        cs.push_back(std::sin(run[1].estimate - run[0].estimate));
    }
    auto mc = moments(cc), ms = moments(cs);
    res.summaries["control_mean_cos"] = summarize(cc);
    res.summaries["control_mean_sin"] = summarize(cs);
    res.claim("control_uncorrelated",
              std::abs(mc.mean) <= cfg.n_se * mc.se_mean && std::abs(ms.mean) <= cfg.n_se * ms.se_mean,
              "product-of-mixtures control: circular correlation between repeat and first estimate consistent with 0",
              ordered_json{{"mean_cos", mc.mean}, {"mean_cos_se", mc.se_mean}, {"mean_sin", ms.mean}, {"mean_sin_se", ms.se_mean}});

    // (iii): correlation of estimates decays with packet separation.
    if (cfg.diffusion_D > 0) {
        auto a = laser::with_packets(cfg.laser_a, cfg.decay_lags + 1);
        auto b = laser::with_packets(cfg.laser_b, cfg.decay_lags + 1);
        b.D = cfg.diffusion_D;
        auto diff = run_part(LockingPart::diffusing, a, b, cfg.decay_runs, cfg.decay_lags + 1);
        auto slope_of = [&](std::size_t lo, std::size_t hi, std::vector<double>* curve) {
            std::vector<double> xs, ys;
            for (std::size_t lag = 1; lag <= cfg.decay_lags; ++lag) {
                double acc = 0;
                for (std::size_t i = lo; i < hi; ++i) acc += std::cos(diff[i][lag].estimate - diff[i][0].estimate);
                acc /= double(hi - lo);
                xs.push_back(double(lag));
                ys.push_back(std::log(std::max(acc, 1e-300)));
                if (curve) curve->push_back(acc);
            }
            return linear_fit(xs, ys).second;
        };
        std::vector<double> curve;
        const double slope = slope_of(0, cfg.decay_runs, &curve);
        std::vector<double> batch;
        const std::size_t per = cfg.decay_runs / cfg.batches;
        for (std::size_t k = 0; k < cfg.batches; ++k) batch.push_back(slope_of(k * per, (k + 1) * per, nullptr));
        const double se = std::sqrt(moments(batch).variance / double(cfg.batches));
        const double expected = -(a.D + b.D) * b.T;
        res.summaries["decay"] = ordered_json{{"mean_cos_by_lag", curve}, {"slope", slope}, {"slope_se", se},
                                              {"expected_slope", expected}};
        res.claim("correlation_decay", std::abs(slope - expected) <= cfg.n_se * se,
                  "log mean cos(estimate_n - estimate_0) falls with slope -(D_A + D_B) T per packet",
                  ordered_json{{"slope", slope}, {"slope_se", se}, {"expected", expected}});
    }

    res.config = ordered_json{{"laser_a", params_echo(cfg.laser_a)},
                              {"laser_b", params_echo(cfg.laser_b)},
                              {"n_runs", cfg.n_runs},
                              {"n_repeats", cfg.n_repeats},
                              {"grid_size", cfg.grid_size},
                              {"histogram_bins", cfg.histogram_bins},
                              {"diffusion_D", cfg.diffusion_D},
                              {"decay_lags", cfg.decay_lags},
                              {"decay_runs", cfg.decay_runs},
                              {"batches", cfg.batches},
                              {"tolerances", ordered_json{{"chi2_p_min", cfg.chi2_p_min}, {"n_se", cfg.n_se}}}};
    return res;
}

}  // namespace laserstate::scenarios
