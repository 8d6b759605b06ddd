// Shared helpers for the unit suites: random generators for property tests
// and Fock-space constructions of Gaussian states.

#pragma once

#include <gtest/gtest.h>

#include "laserstate/fock.hpp"
#include "laserstate/gaussian.hpp"

namespace laserstate::testing {

namespace g = laserstate::gaussian;
namespace f = laserstate::fock;

/// Random single-mode or two-mode symplectic built from the primitive ops.
inline g::SymplecticOp random_local_op(Rng& rng) {
    switch (static_cast<int>(rng.uniform(0, 3))) {
        case 0: return g::squeezer(rng.uniform(-1, 1), rng.uniform_phase());
        case 1: return g::phase_shift(rng.uniform_phase());
        default: return g::displacement(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)));
    }
}

inline g::GaussianState random_chain(g::GaussianState s, Rng& rng, int steps) {
    const auto n = s.n_modes();
    for (int i = 0; i < steps; ++i) {
        if (n >= 2 && rng.uniform() < 0.5) {
            std::size_t a = std::size_t(rng.uniform(0, double(n)));
            std::size_t b = (a + 1 + std::size_t(rng.uniform(0, double(n - 1)))) % n;
            auto op = rng.uniform() < 0.5 ? g::beamsplitter(rng.uniform()) : g::two_mode_squeezer(rng.uniform(-0.7, 0.7));
            s = g::apply_symplectic(s, op, {a, b});
        } else {
            s = g::apply_symplectic(s, random_local_op(rng), {std::size_t(rng.uniform(0, double(n)))});
        }
    }
    return s;
}

/// D(α) S(r, θ)|0⟩ as a Fock density matrix.
inline f::FockDensityMatrix displaced_squeezed_fock(complex alpha, double r, double theta, std::size_t cutoff) {
    auto sq = f::squeezed_vacuum_fock(r, theta, cutoff);
    return f::apply_local(sq, f::displacement_operator(alpha, cutoff));
}

inline g::GaussianState displaced_squeezed_gaussian(complex alpha, double r, double theta) {
    auto s = g::apply_symplectic(g::GaussianState::vacuum(1), g::squeezer(r, theta));
    return g::apply_symplectic(s, g::displacement(alpha));
}

}  // namespace laserstate::testing
