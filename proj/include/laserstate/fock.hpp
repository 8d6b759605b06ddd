// fock.hpp
// Truncated number-basis engine for one or two modes. This is the oracle for
// the claims a Gaussian description cannot express: number-diagonality of
// phase-averaged states and PPT negativity of phase mixtures.
//
// Two-mode basis index is n_A * cutoff + n_B. Nothing here renormalizes after
// truncation; the lost probability is carried in tail_mass and every
// constructor refuses states whose tail exceeds max_tail (1%).

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <vector>

#include "laserstate/common.hpp"

namespace laserstate::fock {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr double max_tail = 0.01;
inline constexpr double hermitian_tol = 1e-12;
inline constexpr double psd_tol = 1e-10;

/// Cutoff that keeps the Poisson tail of |α|² negligible: ⌈|α|² + 6|α| + 10⌉.
inline std::size_t cutoff_for(double abs_alpha) {
    return static_cast<std::size_t>(std::ceil(abs_alpha * abs_alpha + 6.0 * abs_alpha + 10.0));
}

class FockDensityMatrix {
public:
    FockDensityMatrix(std::size_t n_modes, std::size_t cutoff, CMat matrix, double tail_mass, bool check_psd = true)
        : n_modes_(n_modes), cutoff_(cutoff), matrix_(std::move(matrix)), tail_mass_(tail_mass) {
        if (n_modes_ < 1 || n_modes_ > 2) throw DimensionError("FockDensityMatrix: 1 or 2 modes supported");
        if (cutoff_ < 1) throw DimensionError("FockDensityMatrix: cutoff must be >= 1");
        const auto d = Eigen::Index(dim());
        if (matrix_.rows() != d || matrix_.cols() != d)
            throw DimensionError("FockDensityMatrix: matrix must be cutoff^n_modes square");
        if (tail_mass_ > max_tail)
            throw TruncationError("FockDensityMatrix: cutoff " + std::to_string(cutoff_) +
                                      " truncates probability " + std::to_string(tail_mass_),
                                  tail_mass_);
        if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > hermitian_tol)
            throw DomainError("FockDensityMatrix: matrix is not Hermitian");
        matrix_ = 0.5 * (matrix_ + matrix_.adjoint()).eval();
        const double tr = trace();
        if (tr > 1.0 + 1e-12 || tr < 1.0 - max_tail)
            throw DomainError("FockDensityMatrix: trace " + std::to_string(tr) + " outside [1 - tail, 1]");
        if (check_psd) {
            Eigen::SelfAdjointEigenSolver<CMat> es(matrix_, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -psd_tol)
                throw DomainError("FockDensityMatrix: matrix is not positive semidefinite");
        }
    }

    static FockDensityMatrix pure(std::size_t n_modes, std::size_t cutoff, const CVec& amplitudes) {
        const double norm = amplitudes.squaredNorm();
        return {n_modes, cutoff, amplitudes * amplitudes.adjoint(), std::max(0.0, 1.0 - norm), false};
    }

    std::size_t n_modes() const { return n_modes_; }
    std::size_t cutoff() const { return cutoff_; }
    std::size_t dim() const { return n_modes_ == 1 ? cutoff_ : cutoff_ * cutoff_; }
    const CMat& matrix() const { return matrix_; }
    double tail_mass() const { return tail_mass_; }
    double trace() const { return matrix_.trace().real(); }
    double purity() const { return (matrix_ * matrix_).trace().real(); }

    /// Photon numbers (n_A, n_B) of basis index i; n_B = 0 for one mode.
    std::pair<std::size_t, std::size_t> numbers(std::size_t i) const {
        if (n_modes_ == 1) return {i, 0};
        return {i / cutoff_, i % cutoff_};
    }

    complex operator()(std::size_t i, std::size_t j) const { return matrix_(Eigen::Index(i), Eigen::Index(j)); }

private:
    std::size_t n_modes_;
    std::size_t cutoff_;
    CMat matrix_;
    double tail_mass_;
};

// --- States -----------------------------------------------------------------

inline CVec coherent_amplitudes(complex alpha, std::size_t cutoff) {
    CVec c = CVec::Zero(Eigen::Index(cutoff));
    c(0) = std::exp(-0.5 * std::norm(alpha));
    for (std::size_t n = 1; n < cutoff; ++n) c(Eigen::Index(n)) = c(Eigen::Index(n - 1)) * alpha / std::sqrt(double(n));
    return c;
}

inline FockDensityMatrix coherent_fock(complex alpha, std::size_t cutoff) {
    require_finite(alpha.real(), "alpha");
    require_finite(alpha.imag(), "alpha");
    if (cutoff < 1) throw DimensionError("coherent_fock: cutoff must be >= 1");
    return FockDensityMatrix::pure(1, cutoff, coherent_amplitudes(alpha, cutoff));
}

/// e^{−|α|²} Σ |α|^{2n}/n! |n⟩⟨n|.
inline FockDensityMatrix poisson_mixture(double abs_alpha, std::size_t cutoff) {
    require(abs_alpha >= 0 && std::isfinite(abs_alpha), "poisson_mixture: |alpha| must be finite and >= 0");
    if (cutoff < 1) throw DimensionError("poisson_mixture: cutoff must be >= 1");
    CVec c = coherent_amplitudes(complex(abs_alpha, 0.0), cutoff);
    CMat m = CMat::Zero(Eigen::Index(cutoff), Eigen::Index(cutoff));
    double total = 0;
    for (Eigen::Index n = 0; n < Eigen::Index(cutoff); ++n) {
        m(n, n) = std::norm(c(n));
        total += std::norm(c(n));
    }
    return {1, cutoff, m, std::max(0.0, 1.0 - total), false};
}

/// Squeezed vacuum exp[(ξ* a² − ξ a†²)/2]|0⟩, ξ = r e^{iθ}:
/// c_{2m} = (−e^{iθ} tanh r)^m √((2m)!) / (2^m m! √cosh r).
inline FockDensityMatrix squeezed_vacuum_fock(double r, double theta, std::size_t cutoff) {
    require_finite(r, "r");
    require_finite(theta, "theta");
    if (cutoff < 1) throw DimensionError("squeezed_vacuum_fock: cutoff must be >= 1");
    CVec c = CVec::Zero(Eigen::Index(cutoff));
    const complex ratio = -std::polar(std::tanh(r), theta);
    complex term = 1.0 / std::sqrt(std::cosh(r));
    for (std::size_t m = 0; 2 * m < cutoff; ++m) {
        c(Eigen::Index(2 * m)) = term;
        // c_{2m+2}/c_{2m} = ratio · √((2m+1)(2m+2)) / (2(m+1))
        term *= ratio * std::sqrt(double(2 * m + 1) * double(2 * m + 2)) / (2.0 * double(m + 1));
    }
    return FockDensityMatrix::pure(1, cutoff, c);
}

/// Two-mode squeezed vacuum (1/cosh r) Σ (e^{2iφ} tanh r)ⁿ |n,n⟩. The pump phase
/// φ enters doubled: this is the one place that fixes the relative-phase
/// bookkeeping between laser packets and down-converted light.
inline FockDensityMatrix tmss_fock(double r, double phi, std::size_t cutoff) {
    require_finite(r, "r");
    require_finite(phi, "phi");
    if (cutoff < 1) throw DimensionError("tmss_fock: cutoff must be >= 1");
    CVec c = CVec::Zero(Eigen::Index(cutoff * cutoff));
    const complex lambda = std::polar(std::tanh(r), 2.0 * phi);
    complex term = 1.0 / std::cosh(r);
    for (std::size_t n = 0; n < cutoff; ++n) {
        c(Eigen::Index(n * cutoff + n)) = term;
        term *= lambda;
    }
    return FockDensityMatrix::pure(2, cutoff, c);
}

inline FockDensityMatrix tensor(const FockDensityMatrix& a, const FockDensityMatrix& b) {
    if (a.n_modes() != 1 || b.n_modes() != 1 || a.cutoff() != b.cutoff())
        throw DimensionError("tensor: two single-mode states with equal cutoff required");
    const auto d = Eigen::Index(a.cutoff());
    CMat m(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m.block(i * d, j * d, d, d) = a.matrix()(i, j) * b.matrix();
    const double tail = 1.0 - (1.0 - a.tail_mass()) * (1.0 - b.tail_mass());
    return {2, a.cutoff(), m, tail, false};
}

/// Reduced state of one mode of a two-mode matrix.
inline FockDensityMatrix partial_trace(const FockDensityMatrix& s, std::size_t keep) {
    if (s.n_modes() != 2 || keep > 1) throw DimensionError("partial_trace: two-mode state and keep in {0,1} required");
    const auto d = Eigen::Index(s.cutoff());
    CMat m = CMat::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index k = 0; k < d; ++k)
                m(i, j) += keep == 0 ? s.matrix()(i * d + k, j * d + k) : s.matrix()(k * d + i, k * d + j);
    return {1, s.cutoff(), m, s.tail_mass(), false};
}

// --- Unitaries ------------------------------------------------------------------

/// exp(−iH) restricted to the first `cutoff` levels, with H Hermitian built in a
/// space padded by `pad` levels so the retained block is unaffected by the
/// truncation edge.
inline CMat exp_minus_i(const CMat& hermitian, std::size_t cutoff) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian);
    CVec phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, -es.eigenvalues()(i));
    CMat u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return u.topLeftCorner(Eigen::Index(cutoff), Eigen::Index(cutoff));
}

inline CMat ladder(std::size_t d) {
    CMat a = CMat::Zero(Eigen::Index(d), Eigen::Index(d));
    for (Eigen::Index n = 1; n < Eigen::Index(d); ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

/// Displacement exp(α a† − α* a), truncated.
inline CMat displacement_operator(complex alpha, std::size_t cutoff, std::size_t pad = 60) {
    CMat a = ladder(cutoff + pad);
    // exp(αa† − α*a) = exp(−iH), H = i(αa† − α*a)
    CMat h = complex(0, 1) * (alpha * a.adjoint() - std::conj(alpha) * a);
    return exp_minus_i(h, cutoff);
}

/// Squeezer exp[(ξ* a² − ξ a†²)/2], ξ = r e^{iθ}, truncated.
inline CMat squeeze_operator(double r, double theta, std::size_t cutoff, std::size_t pad = 60) {
    CMat a = ladder(cutoff + pad);
    const complex xi = std::polar(r, theta);
    CMat g = 0.5 * (std::conj(xi) * a * a - xi * a.adjoint() * a.adjoint());
    return exp_minus_i(complex(0, 1) * g, cutoff);
}

/// U ρ U† with a single-mode U acting on `mode`. Probability pushed beyond the
/// cutoff is added to tail_mass.
inline FockDensityMatrix apply_local(const FockDensityMatrix& s, const CMat& u, std::size_t mode = 0) {
    if (mode >= s.n_modes()) throw DimensionError("apply_local: mode out of range");
    const auto d = Eigen::Index(s.cutoff());
    if (u.rows() != d || u.cols() != d) throw DimensionError("apply_local: operator dimension must equal cutoff");
    CMat full;
    if (s.n_modes() == 1) {
        full = u;
    } else {
        full = CMat::Zero(d * d, d * d);
        const CMat id = CMat::Identity(d, d);
        const CMat& left = mode == 0 ? u : id;
        const CMat& right = mode == 0 ? id : u;
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) full.block(i * d, j * d, d, d) = left(i, j) * right;
    }
    CMat m = full * s.matrix() * full.adjoint();
    const double lost = s.trace() - m.trace().real();
    return {s.n_modes(), s.cutoff(), m, s.tail_mass() + std::max(0.0, lost), false};
}

// --- Phase averaging ----------------------------------------------------------

using StateBuilder = std::function<FockDensityMatrix(double)>;

/// Uniform-grid average over φ ∈ [0, 2π). For states whose φ-dependence on
/// matrix element (i,j) is e^{ikφ} with |k| < grid_size the result is exact.
/// Requires grid_size >= 2·cutoff; grid_size = 1 returns builder(0).
inline FockDensityMatrix phase_average(const StateBuilder& builder, std::size_t grid_size) {
    if (grid_size == 0) throw DomainError("phase_average: grid_size must be >= 1");
    FockDensityMatrix first = builder(0.0);
    if (grid_size == 1) return first;
    if (grid_size < 2 * first.cutoff())
        throw DomainError("phase_average: grid_size " + std::to_string(grid_size) + " too small for cutoff " +
                          std::to_string(first.cutoff()) + " (need >= 2*cutoff)");
    CMat acc = first.matrix();
    double tail = first.tail_mass();
    for (std::size_t g = 1; g < grid_size; ++g) {
        FockDensityMatrix s = builder(two_pi * double(g) / double(grid_size));
        if (s.dim() != first.dim()) throw DimensionError("phase_average: builder changed shape");
        acc += s.matrix();
        tail += s.tail_mass();
    }
    const double inv = 1.0 / double(grid_size);
    return {first.n_modes(), first.cutoff(), acc * inv, tail * inv};
}

/// Σ_g w_g builder(φ_g) with weights summing to one.
inline FockDensityMatrix weighted_average(const StateBuilder& builder, const std::vector<double>& phases,
                                          const std::vector<double>& weights) {
    if (phases.empty() || phases.size() != weights.size()) throw DimensionError("weighted_average: size mismatch");
    std::optional<CMat> acc;
    double tail = 0, total = 0;
    std::size_t n_modes = 0, cutoff = 0;
    for (std::size_t g = 0; g < phases.size(); ++g) {
        if (weights[g] == 0.0) continue;
        FockDensityMatrix s = builder(phases[g]);
        if (!acc) {
            acc = CMat::Zero(s.matrix().rows(), s.matrix().cols());
            n_modes = s.n_modes();
            cutoff = s.cutoff();
        }
        *acc += weights[g] * s.matrix();
        tail += weights[g] * s.tail_mass();
        total += weights[g];
    }
    if (!acc) throw DomainError("weighted_average: all weights are zero");
    return {n_modes, cutoff, *acc / total, tail / total};
}

/// U(φ) ρ U(φ)† with U(φ) = exp(iφ (k_A n_A + k_B n_B)).
inline FockDensityMatrix rotate(const FockDensityMatrix& s, double phi, int charge_a = 1, int charge_b = 1) {
    CMat m = s.matrix();
    for (std::size_t i = 0; i < s.dim(); ++i) {
        auto [ia, ib] = s.numbers(i);
        for (std::size_t j = 0; j < s.dim(); ++j) {
            auto [ja, jb] = s.numbers(j);
            const double k = double(charge_a) * (double(ia) - double(ja)) + double(charge_b) * (double(ib) - double(jb));
            m(Eigen::Index(i), Eigen::Index(j)) *= std::polar(1.0, k * phi);
        }
    }
    return {s.n_modes(), s.cutoff(), m, s.tail_mass(), false};
}

/// Mixture Σ_g w_g U(φ_g) ρ₀ U(φ_g)† evaluated through the characteristic
/// function χ(k) = Σ_g w_g e^{ikφ_g}: element (i,j) is ρ₀(i,j) χ(k_ij). This is
/// the Fourier route to the same average phase_average computes directly.
/// A nonzero dephasing_variance v convolves each phase with a zero-mean
/// Gaussian of variance v, multiplying χ(k) by e^{−k²v/2}.
inline FockDensityMatrix rotation_mixture(const FockDensityMatrix& base, const std::vector<double>& phases,
                                          const std::vector<double>& weights, int charge_a = 1, int charge_b = 1,
                                          double dephasing_variance = 0.0) {
    if (phases.size() != weights.size() || phases.empty()) throw DimensionError("rotation_mixture: size mismatch");
    require(dephasing_variance >= 0 && std::isfinite(dephasing_variance),
            "rotation_mixture: dephasing variance must be finite and >= 0");
    double total = 0;
    for (double w : weights) total += w;
    const int kmax = (std::abs(charge_a) + std::abs(charge_b)) * int(base.cutoff());
    std::vector<complex> chi(std::size_t(2 * kmax + 1));
    for (int k = -kmax; k <= kmax; ++k) {
        complex acc{0, 0};
        for (std::size_t g = 0; g < phases.size(); ++g) acc += weights[g] * std::polar(1.0, double(k) * phases[g]);
        chi[std::size_t(k + kmax)] = acc / total * std::exp(-0.5 * double(k) * double(k) * dephasing_variance);
    }
    CMat m = base.matrix();
    for (std::size_t i = 0; i < base.dim(); ++i) {
        auto [ia, ib] = base.numbers(i);
        for (std::size_t j = 0; j < base.dim(); ++j) {
            auto [ja, jb] = base.numbers(j);
            const int k = charge_a * (int(ia) - int(ja)) + charge_b * (int(ib) - int(jb));
            m(Eigen::Index(i), Eigen::Index(j)) *= chi[std::size_t(k + kmax)];
        }
    }
    return {base.n_modes(), base.cutoff(), m, base.tail_mass(), false};
}

// --- Observables ----------------------------------------------------------------

/// Annihilation operator on `mode` in the full (1- or 2-mode) truncated space.
inline CMat annihilation(const FockDensityMatrix& s, std::size_t mode) {
    if (mode >= s.n_modes()) throw DimensionError("annihilation: mode out of range");
    const auto d = Eigen::Index(s.cutoff());
    CMat a = CMat::Zero(d, d);
    for (Eigen::Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
    if (s.n_modes() == 1) return a;
    CMat id = CMat::Identity(d, d);
    CMat out(d * d, d * d);
    const CMat& left = mode == 0 ? a : id;
    const CMat& right = mode == 0 ? id : a;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) out.block(i * d, j * d, d, d) = left(i, j) * right;
    return out;
}

inline complex expect(const FockDensityMatrix& s, const CMat& op) { return (s.matrix() * op).trace(); }

inline complex mean_amplitude(const FockDensityMatrix& s, std::size_t mode = 0) {
    return expect(s, annihilation(s, mode));
}

inline double mean_photon_number(const FockDensityMatrix& s, std::size_t mode = 0) {
    CMat a = annihilation(s, mode);
    return expect(s, a.adjoint() * a).real();
}

/// Variance of x cosθ + p sinθ (vacuum value 1/2).
inline double quadrature_variance(const FockDensityMatrix& s, std::size_t mode, double angle) {
    CMat a = annihilation(s, mode);
    CMat q = (std::polar(1.0, -angle) * a + std::polar(1.0, angle) * a.adjoint()) / std::sqrt(2.0);
    const double m1 = expect(s, q).real();
    // q² built from a, a† directly so the top truncated level does not bias it.
    const CMat a2 = a * a, ad = a.adjoint();
    const CMat q2 = (std::polar(1.0, -2 * angle) * a2 + std::polar(1.0, 2 * angle) * a2.adjoint() +
                     2.0 * ad * a + CMat::Identity(a.rows(), a.cols())) /
                    2.0;
    return expect(s, q2).real() - m1 * m1;
}

/// ⟨α|ρ|α⟩ for a single-mode state.
inline double fidelity_to_coherent(const FockDensityMatrix& s, complex alpha) {
    if (s.n_modes() != 1) throw DimensionError("fidelity_to_coherent: single-mode state required");
    CVec c = coherent_amplitudes(alpha, s.cutoff());
    return (c.adjoint() * s.matrix() * c)(0, 0).real();
}

/// Largest |ρ_ij| over pairs of basis states with different photon numbers.
inline double max_offdiagonal(const FockDensityMatrix& s) {
    double out = 0;
    for (Eigen::Index i = 0; i < s.matrix().rows(); ++i)
        for (Eigen::Index j = 0; j < s.matrix().cols(); ++j)
            if (i != j) out = std::max(out, std::abs(s.matrix()(i, j)));
    return out;
}

/// Largest |ρ_ij| between sectors of different total photon number.
inline double max_total_number_coherence(const FockDensityMatrix& s) {
    double out = 0;
    for (std::size_t i = 0; i < s.dim(); ++i) {
        auto [ia, ib] = s.numbers(i);
        for (std::size_t j = 0; j < s.dim(); ++j) {
            auto [ja, jb] = s.numbers(j);
            if (ia + ib != ja + jb) out = std::max(out, std::abs(s(i, j)));
        }
    }
    return out;
}

inline FockDensityMatrix partial_transpose(const FockDensityMatrix& s) {
    if (s.n_modes() != 2) throw DimensionError("partial_transpose: two-mode state required");
    const auto d = Eigen::Index(s.cutoff());
    CMat m(d * d, d * d);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index b = 0; b < d; ++b)
            for (Eigen::Index a2 = 0; a2 < d; ++a2)
                for (Eigen::Index b2 = 0; b2 < d; ++b2) m(a * d + b, a2 * d + b2) = s.matrix()(a * d + b2, a2 * d + b);
    return {2, s.cutoff(), m, s.tail_mass(), false};
}

struct Negativity {
    double negativity = 0.0;      // Σ |negative eigenvalues of ρ^{T_B}|
    double log_negativity = 0.0;  // log₂(2N + 1)
};

inline Negativity ppt_negativity(const FockDensityMatrix& s) {
    if (s.n_modes() != 2) throw DimensionError("ppt_negativity: two-mode state required");
    Eigen::SelfAdjointEigenSolver<CMat> es(partial_transpose(s).matrix(), Eigen::EigenvaluesOnly);
    Negativity out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) < 0) out.negativity -= es.eigenvalues()(i);
    out.log_negativity = std::log2(2.0 * out.negativity + 1.0);
    return out;
}

inline double trace_distance(const FockDensityMatrix& a, const FockDensityMatrix& b) {
    if (a.n_modes() != b.n_modes() || a.cutoff() != b.cutoff())
        throw DimensionError("trace_distance: states must have the same shape");
    Eigen::SelfAdjointEigenSolver<CMat> es(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// --- Quadrature projection --------------------------------------------------------

/// ψ_n(x) = ⟨x|n⟩ for n < count, vacuum variance 1/2.
inline std::vector<double> hermite_functions(double x, std::size_t count) {
    std::vector<double> psi(count);
    if (count == 0) return psi;
    psi[0] = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
    if (count > 1) psi[1] = std::sqrt(2.0) * x * psi[0];
    for (std::size_t n = 1; n + 1 < count; ++n)
        psi[n + 1] = std::sqrt(2.0 / double(n + 1)) * x * psi[n] - std::sqrt(double(n) / double(n + 1)) * psi[n - 1];
    return psi;
}

struct ConditionalState {
    FockDensityMatrix state;  // normalized conditional state of the other mode
    double density;           // outcome probability density p(x)
};

/// Project `mode` of a two-mode state onto the quadrature eigenstate
/// x cosθ + p sinθ = x and return the other mode.
inline ConditionalState homodyne_conditional(const FockDensityMatrix& s, std::size_t mode, double angle, double x) {
    if (s.n_modes() != 2 || mode > 1) throw DimensionError("homodyne_conditional: two-mode state required");
    const auto d = Eigen::Index(s.cutoff());
    auto psi = hermite_functions(x, s.cutoff());
    CVec bra(d);  // ⟨x_θ|n⟩ = e^{−inθ} ψ_n(x)
    for (Eigen::Index n = 0; n < d; ++n) bra(n) = std::polar(psi[std::size_t(n)], -double(n) * angle);
    CMat out = CMat::Zero(d, d);
    for (Eigen::Index a = 0; a < d; ++a)
        for (Eigen::Index a2 = 0; a2 < d; ++a2) {
            const complex w = bra(a) * std::conj(bra(a2));
            for (Eigen::Index b = 0; b < d; ++b)
                for (Eigen::Index b2 = 0; b2 < d; ++b2) {
                    const complex e = mode == 0 ? s.matrix()(a * d + b, a2 * d + b2) : s.matrix()(b * d + a, b2 * d + a2);
                    out(b, b2) += w * e;
                }
        }
    const double p = out.trace().real();
    return {FockDensityMatrix(1, s.cutoff(), out / p, 0.0), p};
}

}  // namespace laserstate::fock
