#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "laserstate/scenarios.hpp"

using namespace laserstate;
using namespace laserstate::scenarios;

namespace {

const Claim& find_claim(const ScenarioResult& r, const std::string& name) {
    for (const auto& c : r.claims)
        if (c.name == name) return c;
    throw std::runtime_error("claim not found: " + name);
}

std::vector<std::vector<std::string>> rendered(const ScenarioResult& r) {
    std::vector<std::vector<std::string>> out;
    for (const auto& row : r.records) {
        std::vector<std::string> s;
        for (const auto& c : row) s.push_back(format_cell(c));
        out.push_back(std::move(s));
    }
    return out;
}

PhaseLockingConfig small_locking() {
    PhaseLockingConfig c;
    c.n_runs = 60;
    c.n_repeats = 2;
    c.grid_size = 256;
    c.decay_runs = 60;
    c.decay_lags = 4;
    c.batches = 10;
    return c;
}

TmssEntanglementConfig small_tmss() {
    TmssEntanglementConfig c;
    c.cutoff = 8;
    c.grid_size = 32;
    c.alpha_ref = {0.0, 3.0, 10.0};
    c.n_samples = 20;
    c.posterior_grid = 256;
    c.separations = {1, 4};
    return c;
}

SqueezingConfig small_squeezing() {
    SqueezingConfig c;
    c.cutoff = 12;
    c.grid_size = 32;
    c.n_angles = 8;
    c.n_samples = 2000;
    c.phase_grid = 16;
    return c;
}

TeleportationConfig small_teleportation() {
    TeleportationConfig c;
    c.grid_samples = 16;
    c.n_samples = 500;
    return c;
}

}  // namespace

// --- AtomState --------------------------------------------------------------------

TEST(AtomState, ValidatesDensityMatrix) {
    AtomMatrix m = AtomMatrix::Zero();
    m(0, 0) = 0.5;
    EXPECT_THROW(AtomState{m}, DomainError);  // trace 1/2
    m(1, 1) = 0.5;
    m(0, 1) = 0.3;
    EXPECT_THROW(AtomState{m}, DomainError);  // not Hermitian
    m(1, 0) = 0.3;
    EXPECT_NO_THROW(AtomState{m});
    m(0, 0) = 1.2;
    m(1, 1) = -0.2;
    m(0, 1) = m(1, 0) = 0.0;
    EXPECT_THROW(AtomState{m}, DomainError);  // negative eigenvalue
}

TEST(AtomState, PulseIsUnitaryAndMapsGroundToPiPhi) {
    for (double phi : {0.0, 0.4, 2.0, -1.3, 5.9}) {
        AtomMatrix u = half_pi_pulse(phi);
        EXPECT_LT((u * u.adjoint() - AtomMatrix::Identity()).cwiseAbs().maxCoeff(), 1e-14);
        auto s = AtomState::ground().evolve(u);
        EXPECT_LT((s.matrix() - pi_phi(phi)).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_NEAR(s.excited_probability(), 0.5, 1e-14);
    }
}

TEST(AtomState, TwoPulsesGiveCosineFringe) {
    for (double d : {0.0, 0.7, std::numbers::pi / 2, std::numbers::pi, 4.0}) {
        auto s = AtomState::ground().evolve(half_pi_pulse(0.3)).evolve(half_pi_pulse(0.3 + d));
        EXPECT_NEAR(s.excited_probability(), (1 + std::cos(d)) / 2, 1e-14);
    }
}

// --- atom_interference --------------------------------------------------------------

TEST(AtomInterference, ClaimAndControlBothReported) {
    auto r = atom_interference({}, Rng(3));
    EXPECT_TRUE(r.all_pass());
    EXPECT_TRUE(find_claim(r, "same_laser_excites").pass);
    EXPECT_TRUE(find_claim(r, "independent_lasers_half").pass);
    EXPECT_TRUE(find_claim(r, "mid_protocol_maximally_mixed").pass);
    EXPECT_LT(r.summaries["p_excited_same_laser"]["spread"].get<double>(), 1e-10);
}

TEST(AtomInterference, RejectsDiffusingLaser) {
    AtomInterferenceConfig c;
    c.laser.D = 0.01;
    EXPECT_THROW(atom_interference(c, Rng(1)), DomainError);
}

// --- squeezing ---------------------------------------------------------------------

TEST(Squeezing, SmallRunPasses) {
    auto r = squeezing(small_squeezing(), Rng(5));
    for (const auto& c : r.claims) EXPECT_TRUE(c.pass) << c.name << " " << c.values.dump();
}

TEST(Squeezing, ZeroSqueezingGivesVacuumVariances) {
    auto c = small_squeezing();
    c.r = 0.0;
    auto r = squeezing(c, Rng(2));
    EXPECT_NEAR(r.summaries["phase_averaged"]["min_quadrature_variance"].get<double>(), 0.5, 1e-12);
    EXPECT_NEAR(r.summaries["grid_analytic"]["max"].get<double>(), 0.5, 1e-12);
    EXPECT_TRUE(r.all_pass());
}

TEST(Squeezing, BeamStateLocksSqueezingToLaserPhase) {
    for (double phi : {0.0, 1.1, 3.0}) {
        laser::PhaseSample s;
        s.phi = phi;
        s.packet_amplitudes = {std::polar(2.0, phi), std::polar(2.0, phi)};
        auto beam = squeezed_beam(s, 0.5, 1);
        EXPECT_NEAR(quadrature_variance(beam, 0, phi), std::exp(-1.0) / 2, 1e-12);
        EXPECT_NEAR(quadrature_variance(beam, 0, phi + std::numbers::pi / 2), std::exp(1.0) / 2, 1e-12);
        EXPECT_NEAR(std::abs(beam.amplitude(1) - std::polar(2.0, phi)), 0.0, 1e-12);
    }
}

// --- tmss_entanglement -------------------------------------------------------------

TEST(TmssEntanglement, SmallRunPasses) {
    auto r = tmss_entanglement(small_tmss(), Rng(4));
    for (const auto& c : r.claims) EXPECT_TRUE(c.pass) << c.name << " " << c.values.dump();
    EXPECT_NO_THROW(find_claim(r, "no_reference_no_entanglement"));
    EXPECT_NO_THROW(find_claim(r, "stale_reference_degrades"));
}

TEST(TmssEntanglement, CutoffTooSmallForR) {
    auto c = small_tmss();
    c.r = 1.5;
    c.cutoff = 6;
    EXPECT_THROW(c.validate(), DomainError);
}

TEST(TmssEntanglement, LagVarianceMatchesSampledPackets) {
    laser::LaserParams p;
    p.D = 0.02;
    p.n_packets = 9;
    auto e = laser::build_ensemble(p, 4000, laser::SamplingMode::monte_carlo, Rng(8));
    for (std::size_t lag : {1u, 4u, 8u}) {
        std::vector<double> d;
        for (const auto& s : e.samples) d.push_back(wrap_signed(std::arg(s.packet_amplitudes[lag]) - std::arg(s.packet_amplitudes[0])));
        auto m = moments(d);
        EXPECT_NEAR(m.variance, packet_phase_lag_variance(p.D, p.T, lag), 3 * m.se_variance) << "lag " << lag;
    }
}

TEST(TmssEntanglement, LargeReferenceApproachesFixedPhase) {
    const auto base = fock::tmss_fock(0.3, 0.0, 10);
    Rng g(11);
    auto s = detail::conditional_tmss(base, 0.8, std::polar(30.0, 0.8), 30.0, 1024, {0.0}, g);
    EXPECT_NEAR(s.log_negativity[0], fock::ppt_negativity(base).log_negativity, 0.01);
    EXPECT_LT(s.posterior_std, 0.05);
}

// --- teleportation -----------------------------------------------------------------

TEST(Teleportation, FixedPhaseFidelityEqualsClosedForm) {
    for (double r : {0.0, 0.3, 1.0, 2.0})
        for (double phi : {0.0, 1.0, 4.0}) {
            const complex a = std::polar(2.0, 0.4 + phi);
            auto out = teleport(gaussian::coherent(a), r, phi);
            EXPECT_NEAR(gaussian::fidelity_to_coherent(out, a), teleportation_fidelity_oracle(r), 1e-12);
            // Unit gain: output mean equals the input amplitude, excess noise e^{-2r} per quadrature.
            EXPECT_NEAR(std::abs(out.amplitude(0) - a), 0.0, 1e-12);
            EXPECT_NEAR(out.cov()(0, 0), 0.5 + std::exp(-2 * r), 1e-12);
        }
}

TEST(Teleportation, PhaseOffsetFidelityMatchesDisplacedOverlap) {
    const double r = 0.7, amp = 2.0;
    for (double delta : {0.2, 1.0, 3.0}) {
        auto out = teleport(gaussian::coherent(std::polar(amp, 1.3 + delta)), r, 1.3);
        const double f = gaussian::fidelity_to_coherent(out, std::polar(amp, 1.3));
        const double expected = teleportation_fidelity_oracle(r) *
                                std::exp(-2 * amp * amp * (1 - std::cos(delta)) / (1 + std::exp(-2 * r)));
        EXPECT_NEAR(f, expected, 1e-12);
    }
}

TEST(Teleportation, ScrambledOracleMatchesQuadrature) {
    // Independent check of the Bessel closed form: midpoint rule over δ.
    for (double r : {0.0, 0.5, 1.0})
        for (double amp : {0.5, 2.0}) {
            const int n = 20000;
            double acc = 0;
            for (int k = 0; k < n; ++k) {
                const double d = 2 * std::numbers::pi * (k + 0.5) / n;
                acc += std::exp(-2 * amp * amp * (1 - std::cos(d)) / (1 + std::exp(-2 * r)));
            }
            EXPECT_NEAR(scrambled_fidelity_oracle(r, amp), teleportation_fidelity_oracle(r) * acc / n, 1e-12);
        }
}

TEST(Teleportation, SmallRunPasses) {
    auto r = teleportation(small_teleportation(), Rng(6));
    for (const auto& c : r.claims) EXPECT_TRUE(c.pass) << c.name << " " << c.values.dump();
    EXPECT_EQ(r.claims.size(), 6u);
}

// --- identities --------------------------------------------------------------------

TEST(Identities, Passes) {
    auto r = identities({}, Rng(1));
    EXPECT_TRUE(r.all_pass());
    EXPECT_LT(r.summaries["phase_average"]["trace_distance"].get<double>(), 1e-10);
}

TEST(Identities, TooCoarseGridRejected) {
    IdentitiesConfig c;
    c.grid_size = 40;
    EXPECT_THROW(identities(c, Rng(1)), DomainError);
}

// --- phase_locking -----------------------------------------------------------------

TEST(PhaseLocking, EstimateTracksTrueRelativePhase) {
    Rng g(9);
    std::vector<double> dev;
    for (int k = 0; k < 200; ++k) {
        const double pa = g.uniform_phase(), pb = g.uniform_phase();
        auto e = estimate_relative_phase(std::polar(10.0, pa), std::polar(10.0, pb), 10.0, 1024, g);
        dev.push_back(wrap_signed(e.estimate - e.truth));
        EXPECT_NEAR(wrap_signed(e.truth - (pb - pa)), 0.0, 1e-12);
    }
    auto m = moments(dev);
    EXPECT_LT(std::abs(m.mean), 4 * m.se_mean);
    EXPECT_LT(m.variance, 0.05);
}

TEST(PhaseLocking, ChiSquareUniformity) {
    std::vector<double> uniform, clumped;
    Rng g(12);
    for (int k = 0; k < 2000; ++k) {
        uniform.push_back(g.uniform_phase());
        clumped.push_back(wrap_phase(0.3 * g.normal()));
    }
    EXPECT_GT(chi2_uniform_pvalue(uniform, 16), 1e-3);
    EXPECT_LT(chi2_uniform_pvalue(clumped, 16), 1e-6);
}

TEST(PhaseLocking, SmallRunReportsEveryClaim) {
    auto r = phase_locking(small_locking(), Rng(2));
    for (const char* n : {"first_estimate_uniform", "repeat_estimate_agrees", "control_uncorrelated", "correlation_decay"})
        EXPECT_NO_THROW(find_claim(r, n)) << n;
}

TEST(PhaseLocking, MismatchedPacketDurationRejected) {
    auto c = small_locking();
    c.laser_b.T = 2.0;
    EXPECT_THROW(phase_locking(c, Rng(1)), DomainError);
}

// --- determinism -------------------------------------------------------------------

TEST(Determinism, SameSeedSameRecordsAcrossThreadCounts) {
    auto check = [](auto run) {
        auto a = run(1), b = run(4), c = run(1);
        EXPECT_EQ(rendered(a), rendered(b));
        EXPECT_EQ(rendered(a), rendered(c));
        EXPECT_EQ(summary_json(a).dump(), summary_json(c).dump());
    };
    check([](std::size_t t) { return phase_locking(small_locking(), Rng(17), t); });
    check([](std::size_t t) { return squeezing(small_squeezing(), Rng(17), t); });
    check([](std::size_t t) { return tmss_entanglement(small_tmss(), Rng(17), t); });
    check([](std::size_t t) { return teleportation(small_teleportation(), Rng(17), t); });
    check([](std::size_t t) { return atom_interference({}, Rng(17), t); });
    check([](std::size_t t) { return identities({}, Rng(17), t); });
}

TEST(Determinism, DifferentSeedsDiffer) {
    EXPECT_NE(rendered(phase_locking(small_locking(), Rng(1))), rendered(phase_locking(small_locking(), Rng(2))));
    EXPECT_NE(rendered(squeezing(small_squeezing(), Rng(1))), rendered(squeezing(small_squeezing(), Rng(2))));
}

// --- records and CSV ----------------------------------------------------------------

TEST(Records, CsvRoundTripsEveryCell) {
    auto r = teleportation(small_teleportation(), Rng(3));
    std::stringstream ss;
    write_csv(ss, r);
    auto rows = read_csv(ss);
    ASSERT_EQ(rows.size(), r.records.size() + 1);
    EXPECT_EQ(rows[0], r.columns);
    for (std::size_t i = 0; i < r.records.size(); ++i)
        for (std::size_t j = 0; j < r.columns.size(); ++j) {
            const auto& cell = r.records[i][j];
            const auto& text = rows[i + 1][j];
            if (auto* d = std::get_if<double>(&cell)) EXPECT_EQ(parse_double(text), *d);
            else if (auto* n = std::get_if<std::int64_t>(&cell)) EXPECT_EQ(std::stoll(text), *n);
            else EXPECT_EQ(text, std::get<std::string>(cell));
        }
}

TEST(Records, CsvQuotingAndCrLf) {
    ScenarioResult r;
    r.columns = {"a", "b"};
    r.add_record({std::string("x,\"y\"\nz"), 0.1});
    std::stringstream ss;
    write_csv(ss, r);
    EXPECT_EQ(ss.str(), "a,b\r\n\"x,\"\"y\"\"\nz\",0.1\r\n");
    auto rows = read_csv(ss);
    EXPECT_EQ(rows[1][0], "x,\"y\"\nz");
    EXPECT_THROW(r.add_record({0.0}), DimensionError);
}

TEST(Records, FormatDoubleIsShortestRoundTrip) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int k = 0; k < 2000; ++k) {
        const double v = u(gen) * std::pow(10.0, double(k % 40) - 20);
        EXPECT_EQ(parse_double(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_THROW(parse_double("1.5x"), Error);
}

TEST(Records, SummaryKeyOrderIsStable) {
    auto j = summary_json(identities({}, Rng(1)));
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"scenario", "seed", "engine_versions", "config", "n_records", "summaries",
                                              "claims", "all_pass"}));
    EXPECT_TRUE(j["config"].contains("tolerances"));
}

// --- parallel ----------------------------------------------------------------------

TEST(Parallel, MapPreservesOrderAndRethrows) {
    auto v = parallel_map<std::size_t>(100, 4, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], i * i);
    EXPECT_THROW(parallel_map<int>(50, 4,
                                   [](std::size_t i) {
                                       if (i == 17) throw DomainError("boom");
                                       return 0;
                                   }),
                 DomainError);
}
