// laser.hpp
// The propagating beam as a train of duration-T packets whose coherent
// amplitudes share one random global phase, plus the phase-diffusing
// generalization where the packet phases random-walk.

#pragma once

#include <nlohmann/json.hpp>

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "laserstate/common.hpp"
#include "laserstate/fock.hpp"
#include "laserstate/gaussian.hpp"

namespace laserstate::laser {

/// Largest D·T for which a diffusing train is still treated as one coherent
/// packet per mode function.
inline constexpr double max_diffusion_per_packet = 0.1;
inline constexpr std::size_t default_substeps = 32;
inline constexpr std::size_t min_substeps = 8;

struct LaserParams {
    double alpha_mag = 1.0;          // intracavity |α|
    double kappa = 1.0;              // cavity decay rate
    double T = 1.0;                  // packet duration
    double D = 0.0;                  // phase diffusion constant
    std::size_t n_packets = 8;
    double z0_over_c = 0.0;          // packet-frame offset
    double omega0 = 1e6;             // optical frequency (validity bookkeeping)
    double cavity_roundtrip = 1e-3;  // L/c (validity bookkeeping)

    void validate() const {
        auto finite = [](double v, const char* n) { require_finite(v, n); };
        finite(alpha_mag, "alpha_mag");
        finite(kappa, "kappa");
        finite(T, "T");
        finite(D, "D");
        finite(z0_over_c, "z0_over_c");
        finite(omega0, "omega0");
        finite(cavity_roundtrip, "cavity_roundtrip");
        require(alpha_mag >= 0, "alpha_mag must be >= 0");
        require(kappa > 0, "kappa must be > 0");
        require(T > 0, "T must be > 0");
        require(D >= 0, "D must be >= 0");
        require(n_packets >= 1, "n_packets must be >= 1");
        require(omega0 > 0, "omega0 must be > 0");
        require(cavity_roundtrip > 0, "cavity_roundtrip must be > 0");
        require(D * T < max_diffusion_per_packet,
                "D*T = " + std::to_string(D * T) + " outside the single-packet regime (need D*T < 0.1)");
    }

    /// Soft validity conditions: T ≫ L/c and T ≫ 1/ω₀.
    std::vector<std::string> warnings() const {
        std::vector<std::string> w;
        if (!(T > cavity_roundtrip)) w.push_back("packet duration T does not exceed the cavity round trip time");
        if (!(T > 1.0 / omega0)) w.push_back("packet duration T does not exceed an optical period");
        return w;
    }

    /// Start of packet n's window: z0/c + (n − 1/2) T.
    double packet_start(std::size_t n) const { return z0_over_c + (double(n) - 0.5) * T; }
};

inline LaserParams with_packets(LaserParams p, std::size_t n) {
    p.n_packets = n;
    return p;
}

/// α₀ = √(κT)·|α|.
inline double ideal_packet_amplitude(const LaserParams& p) {
    p.validate();
    return std::sqrt(p.kappa * p.T) * p.alpha_mag;
}

struct PhaseSample {
    double phi = 0.0;                          // global phase (phase of packet 0)
    std::vector<double> epsilons;              // ε_k, one per packet, ε_0 = 0
    std::vector<complex> packet_amplitudes;    // α_n

    double packet_phase_unwrapped(std::size_t n) const {
        double s = phi;
        for (std::size_t k = 1; k <= n && k < epsilons.size(); ++k) s += epsilons[k];
        return s;
    }
};

enum class SamplingMode { monte_carlo, grid };

struct PhaseEnsemble {
    std::vector<PhaseSample> samples;
    LaserParams params;
    std::uint64_t rng_seed = 0;
    SamplingMode mode = SamplingMode::monte_carlo;

    std::size_t n_packets() const { return samples.empty() ? 0 : samples.front().packet_amplitudes.size(); }
};

/// One realization of the packet train. η(t) is a Wiener process with
/// increment variance 2D·dt, so E e^{i(η(t)−η(0))} = e^{−Dt}. Each packet
/// integral I_n = ∫_{window n} e^{iη} dt is evaluated by the midpoint rule
/// with `substeps` points; |α_n| = √κ |α| |I_n| / √T and
/// ε_n = Im log(I_n / I_{n−1}) on the principal branch. Phases are referenced
/// to packet 0, which carries the global phase φ.
inline PhaseSample sample_phase_path(const LaserParams& p, std::size_t substeps, Rng& rng) {
    p.validate();
    require(substeps >= min_substeps, "sample_phase_path: substeps must be >= 8");
    PhaseSample s;
    s.phi = rng.uniform_phase();
    const double a0 = std::sqrt(p.kappa * p.T) * p.alpha_mag;
    if (p.D == 0.0) {
        s.epsilons.assign(p.n_packets, 0.0);
        s.packet_amplitudes.assign(p.n_packets, std::polar(a0, s.phi));
        return s;
    }
    const double dt = p.T / double(substeps);
    const double step_sd = std::sqrt(2.0 * p.D * dt);
    double eta = rng.normal(0.0, std::sqrt(p.D * dt));  // start of window 0 to first midpoint
    std::vector<complex> integrals(p.n_packets);
    std::vector<double> mean_eta(p.n_packets);
    for (std::size_t n = 0; n < p.n_packets; ++n) {
        complex acc{0, 0};
        double eta_sum = 0;
        for (std::size_t j = 0; j < substeps; ++j) {
            if (n > 0 || j > 0) eta += rng.normal(0.0, step_sd);
            acc += std::polar(dt, eta);
            eta_sum += eta;
        }
        integrals[n] = acc;
        mean_eta[n] = eta_sum / double(substeps);
    }
    s.epsilons.assign(p.n_packets, 0.0);
    double phase = s.phi;
    const double scale = std::sqrt(p.kappa / p.T) * p.alpha_mag;
    s.packet_amplitudes.resize(p.n_packets);
    s.packet_amplitudes[0] = std::polar(scale * std::abs(integrals[0]), phase);
    for (std::size_t n = 1; n < p.n_packets; ++n) {
        const double eps = std::arg(integrals[n] / integrals[n - 1]);
        if (std::abs(eps - (mean_eta[n] - mean_eta[n - 1])) > pi)
            throw PhaseWindingError("sample_phase_path: packet " + std::to_string(n) +
                                    " phase increment wound past the principal branch");
        s.epsilons[n] = eps;
        phase += eps;
        s.packet_amplitudes[n] = std::polar(scale * std::abs(integrals[n]), phase);
    }
    return s;
}

/// Sample k uses rng.substream(k). Grid mode places φ on {2πk/n} and
/// requires D = 0.
inline PhaseEnsemble build_ensemble(const LaserParams& p, std::size_t n_samples, SamplingMode mode, const Rng& rng,
                                    std::size_t substeps = default_substeps) {
    p.validate();
    require(n_samples >= 1, "build_ensemble: n_samples must be >= 1");
    if (mode == SamplingMode::grid && p.D != 0.0) throw DomainError("build_ensemble: grid mode requires D = 0");
    PhaseEnsemble e;
    e.params = p;
    e.rng_seed = rng.seed();
    e.mode = mode;
    e.samples.reserve(n_samples);
    const double a0 = std::sqrt(p.kappa * p.T) * p.alpha_mag;
    for (std::size_t k = 0; k < n_samples; ++k) {
        if (mode == SamplingMode::grid) {
            PhaseSample s;
            s.phi = two_pi * double(k) / double(n_samples);
            s.epsilons.assign(p.n_packets, 0.0);
            s.packet_amplitudes.assign(p.n_packets, std::polar(a0, s.phi));
            e.samples.push_back(std::move(s));
        } else {
            Rng sub = rng.substream(k);
            e.samples.push_back(sample_phase_path(p, substeps, sub));
        }
    }
    return e;
}

/// Control ensemble: every packet gets its own independent uniform phase,
/// i.e. the product state (ρ_{|α₀|})^{⊗N}.
inline PhaseEnsemble product_of_mixtures(const LaserParams& p, std::size_t n_samples, const Rng& rng) {
    PhaseEnsemble e = build_ensemble(p, n_samples, SamplingMode::monte_carlo, rng);
    for (std::size_t k = 0; k < e.samples.size(); ++k) {
        Rng sub = rng.substream(k, 0x70726f64ULL);
        for (auto& a : e.samples[k].packet_amplitudes) a = std::polar(std::abs(a), sub.uniform_phase());
    }
    return e;
}

/// Single-packet marginal: mean of the coherent projectors at that packet's
/// sampled amplitudes.
inline fock::FockDensityMatrix marginal_packet_state_fock(const PhaseEnsemble& e, std::size_t packet,
                                                          std::size_t cutoff) {
    if (e.samples.empty()) throw DomainError("marginal_packet_state_fock: empty ensemble");
    if (packet >= e.n_packets()) throw DimensionError("marginal_packet_state_fock: packet index out of range");
    fock::CMat acc = fock::CMat::Zero(Eigen::Index(cutoff), Eigen::Index(cutoff));
    double tail = 0;
    for (const auto& s : e.samples) {
        auto c = fock::coherent_fock(s.packet_amplitudes[packet], cutoff);
        acc += c.matrix();
        tail += c.tail_mass();
    }
    const double inv = 1.0 / double(e.samples.size());
    return {1, cutoff, acc * inv, tail * inv};
}

struct InterferenceScan {
    std::vector<double> offsets;
    std::vector<double> mean_output_photons;  // port-a ⟨n⟩ averaged over the ensemble
    double visibility = 0.0;
};

/// Mix packets i and j on a 50/50 beamsplitter after shifting packet j by
/// each offset, and average the output photon number over the ensemble.
inline InterferenceScan packet_interference(const PhaseEnsemble& e, std::size_t i, std::size_t j,
                                            std::size_t n_offsets = 16) {
    if (i >= e.n_packets() || j >= e.n_packets() || i == j)
        throw DimensionError("packet_interference: need two distinct packet indices");
    InterferenceScan scan;
    const auto bs = gaussian::beamsplitter(0.5);
    for (std::size_t o = 0; o < n_offsets; ++o) {
        const double offset = two_pi * double(o) / double(n_offsets);
        double acc = 0;
        for (const auto& s : e.samples) {
            auto st = gaussian::coherent(s.packet_amplitudes[i])
                          .tensor(gaussian::coherent(s.packet_amplitudes[j] * std::polar(1.0, offset)));
            acc += gaussian::apply_symplectic(st, bs).mean_photon_number(0);
        }
        scan.offsets.push_back(offset);
        scan.mean_output_photons.push_back(acc / double(e.samples.size()));
    }
    auto [lo, hi] = std::minmax_element(scan.mean_output_photons.begin(), scan.mean_output_photons.end());
    scan.visibility = (*hi + *lo) > 0 ? (*hi - *lo) / (*hi + *lo) : 0.0;
    return scan;
}

/// Transmittance schedule of the splitter tree: n ways split as ⌈n/2⌉ | ⌊n/2⌋
/// with transmittance ⌈n/2⌉/n, recursively. Powers of two give a balanced
/// tree of 50/50 splitters; other n use unbalanced splitters.
inline gaussian::GaussianState split_tree(gaussian::GaussianState state, std::size_t first, std::size_t n_ways) {
    if (n_ways <= 1) return state;
    const std::size_t left = (n_ways + 1) / 2, right = n_ways / 2;
    const double transmittance = double(left) / double(n_ways);
    state = gaussian::apply_symplectic(state, gaussian::beamsplitter(transmittance), {first, first + left});
    state = split_tree(std::move(state), first, left);
    return split_tree(std::move(state), first + left, right);
}

/// One spatial mode carrying √n·α₀ e^{iφ}, split n ways by beamsplitters, for
/// each φ of an n_samples grid. The result has the shape of a temporal
/// ensemble with n_ways packets.
inline PhaseEnsemble spatial_split_equivalence(const LaserParams& p, std::size_t n_ways, std::size_t n_samples = 8) {
    p.validate();
    require(p.D == 0.0, "spatial_split_equivalence: requires D = 0");
    require(n_ways >= 1, "spatial_split_equivalence: n_ways must be >= 1");
    PhaseEnsemble e;
    e.params = with_packets(p, n_ways);
    e.mode = SamplingMode::grid;
    const double a0 = ideal_packet_amplitude(p);
    for (std::size_t k = 0; k < n_samples; ++k) {
        PhaseSample s;
        s.phi = two_pi * double(k) / double(n_samples);
        s.epsilons.assign(n_ways, 0.0);
        auto st = gaussian::coherent(std::polar(std::sqrt(double(n_ways)) * a0, s.phi));
        if (n_ways > 1) st = st.tensor(gaussian::GaussianState::vacuum(n_ways - 1));
        st = split_tree(std::move(st), 0, n_ways);
        for (std::size_t m = 0; m < n_ways; ++m) s.packet_amplitudes.push_back(st.amplitude(m));
        e.samples.push_back(std::move(s));
    }
    return e;
}

// --- Diffusion statistics ------------------------------------------------------

struct PhaseWalkFit {
    std::vector<double> lag_variance;  // Var(arg α_n − arg α_0), index n (entry 0 is 0)
    double slope = 0.0;                // least-squares slope over lags 1..N−1
    double slope_se = 0.0;             // batch-means standard error
    Moments increment;                 // moments of ε_1 across samples
};

/// Variance of the unwrapped packet phase against packet index, with the
/// slope's uncertainty taken from `n_batches` independent sample batches.
inline PhaseWalkFit phase_walk(const PhaseEnsemble& e, std::size_t n_batches = 20) {
    const std::size_t n = e.n_packets();
    require(n >= 3, "phase_walk: need at least 3 packets");
    require(e.samples.size() >= 2 * n_batches, "phase_walk: too few samples for the batch count");
    auto fit_range = [&](std::size_t lo, std::size_t hi, std::vector<double>* var_out) {
        std::vector<double> xs, vs;
        for (std::size_t k = 1; k < n; ++k) {
            std::vector<double> d;
            d.reserve(hi - lo);
            for (std::size_t i = lo; i < hi; ++i)
                d.push_back(e.samples[i].packet_phase_unwrapped(k) - e.samples[i].packet_phase_unwrapped(0));
            xs.push_back(double(k));
            vs.push_back(moments(d).variance);
        }
        if (var_out) {
            *var_out = {0.0};
            var_out->insert(var_out->end(), vs.begin(), vs.end());
        }
        return linear_fit(xs, vs).second;
    };
    PhaseWalkFit out;
    out.slope = fit_range(0, e.samples.size(), &out.lag_variance);
    std::vector<double> batch;
    const std::size_t per = e.samples.size() / n_batches;
    for (std::size_t b = 0; b < n_batches; ++b) batch.push_back(fit_range(b * per, (b + 1) * per, nullptr));
    out.slope_se = std::sqrt(moments(batch).variance / double(n_batches));
    std::vector<double> eps;
    for (const auto& s : e.samples) eps.push_back(s.epsilons.at(1));
    out.increment = moments(eps);
    return out;
}

// --- JSON-lines serialization ---------------------------------------------------

inline constexpr int ensemble_format_version = 1;

inline nlohmann::json params_to_json(const LaserParams& p) {
    return nlohmann::json{{"alpha_mag", p.alpha_mag}, {"kappa", p.kappa},         {"T", p.T},
                          {"D", p.D},                 {"n_packets", p.n_packets}, {"z0_over_c", p.z0_over_c},
                          {"omega0", p.omega0},       {"cavity_roundtrip", p.cavity_roundtrip}};
}

inline LaserParams params_from_json(const nlohmann::json& j) {
    LaserParams p;
    p.alpha_mag = j.at("alpha_mag").get<double>();
    p.kappa = j.at("kappa").get<double>();
    p.T = j.at("T").get<double>();
    p.D = j.at("D").get<double>();
    p.n_packets = j.at("n_packets").get<std::size_t>();
    p.z0_over_c = j.at("z0_over_c").get<double>();
    p.omega0 = j.at("omega0").get<double>();
    p.cavity_roundtrip = j.at("cavity_roundtrip").get<double>();
    return p;
}

/// Header line followed by one line per sample:
///   {"phi":…, "epsilons":[…], "amplitudes":[[re,im],…]}
inline void write_jsonl(std::ostream& out, const PhaseEnsemble& e) {
    nlohmann::json header{{"format", "laserstate.phase_ensemble"},
                          {"version", ensemble_format_version},
                          {"params", params_to_json(e.params)},
                          {"rng_seed", e.rng_seed},
                          {"mode", e.mode == SamplingMode::grid ? "grid" : "monte_carlo"},
                          {"n_samples", e.samples.size()}};
    out << header.dump() << '\n';
    for (const auto& s : e.samples) {
        nlohmann::json amps = nlohmann::json::array();
        for (auto a : s.packet_amplitudes) amps.push_back({a.real(), a.imag()});
        out << nlohmann::json{{"phi", s.phi}, {"epsilons", s.epsilons}, {"amplitudes", amps}}.dump() << '\n';
    }
}

inline PhaseEnsemble read_jsonl(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error("read_jsonl: missing header line");
    auto header = nlohmann::json::parse(line);
    if (header.value("format", "") != "laserstate.phase_ensemble")
        throw Error("read_jsonl: not a phase ensemble stream");
    if (header.at("version").get<int>() != ensemble_format_version)
        throw Error("read_jsonl: unsupported version " + header.at("version").dump());
    PhaseEnsemble e;
    e.params = params_from_json(header.at("params"));
    e.rng_seed = header.at("rng_seed").get<std::uint64_t>();
    e.mode = header.at("mode").get<std::string>() == "grid" ? SamplingMode::grid : SamplingMode::monte_carlo;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        PhaseSample s;
        s.phi = j.at("phi").get<double>();
        s.epsilons = j.at("epsilons").get<std::vector<double>>();
        for (const auto& a : j.at("amplitudes")) s.packet_amplitudes.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
        e.samples.push_back(std::move(s));
    }
    if (e.samples.size() != header.at("n_samples").get<std::size_t>())
        throw Error("read_jsonl: sample count does not match header");
    return e;
}

}  // namespace laserstate::laser
