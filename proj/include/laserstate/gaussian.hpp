// gaussian.hpp
// Gaussian-state engine: states as (mean, covariance) over n bosonic modes,
// symplectic transformations, conditional Gaussian measurements and the
// Gaussian entanglement / fidelity measures.
//
// Conventions
//   x = (a + a†)/√2, p = (a − a†)/(i√2); vacuum covariance I/2.
//   Quadrature vector ordering is interleaved: (x₁, p₁, …, x_n, p_n).
//   coherent(α) has mean (√2 Re α, √2 Im α).
//   phase_shift(φ) implements e^{iφ a†a}: coherent(α) ↦ coherent(α e^{iφ}).
//   beamsplitter(T): a' = √T a − √(1−T) b, b' = √(1−T) a + √T b, so a
//   coherent input on mode a with vacuum on b leaves |√T α⟩|√(1−T) α⟩.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "laserstate/common.hpp"

namespace laserstate::gaussian {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double symmetry_tol = 1e-12;
inline constexpr double uncertainty_tol = 1e-10;
inline constexpr double symplectic_tol = 1e-10;

inline Mat symplectic_form(std::size_t n_modes) {
    Mat omega = Mat::Zero(2 * n_modes, 2 * n_modes);
    for (std::size_t k = 0; k < n_modes; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

inline Eigen::Matrix2d rotation(double phi) {
    Eigen::Matrix2d r;
    r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    return r;
}

/// Smallest eigenvalue of cov + (i/2)Ω.
inline double uncertainty_margin(const Mat& cov) {
    const auto n = static_cast<std::size_t>(cov.rows() / 2);
    if (n == 0) return 0.0;
    Eigen::MatrixXcd h = cov.cast<complex>() + complex(0.0, 0.5) * symplectic_form(n).cast<complex>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

class GaussianState {
public:
    /// Zero-mode state; what remains after measuring the last mode.
    GaussianState() = default;

    GaussianState(Vec mean, Mat cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
        if (cov_.rows() != cov_.cols() || cov_.rows() != mean_.size() || mean_.size() % 2 != 0)
            throw DimensionError("GaussianState: mean must have length 2n and cov must be 2n x 2n");
        if (!mean_.allFinite() || !cov_.allFinite())
            throw DomainError("GaussianState: non-finite moments");
        if (cov_.size() > 0 && (cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, cov_.cwiseAbs().maxCoeff()))
            throw DomainError("GaussianState: covariance is not symmetric");
        cov_ = 0.5 * (cov_ + cov_.transpose());
        if (n_modes() > 0 && uncertainty_margin(cov_) < -uncertainty_tol)
            throw DomainError("GaussianState: covariance violates the uncertainty relation");
    }

    static GaussianState vacuum(std::size_t n_modes) {
        return {Vec::Zero(2 * n_modes), 0.5 * Mat::Identity(2 * n_modes, 2 * n_modes)};
    }

    std::size_t n_modes() const { return static_cast<std::size_t>(mean_.size() / 2); }
    const Vec& mean() const { return mean_; }
    const Mat& cov() const { return cov_; }

    double purity() const {
        if (n_modes() == 0) return 1.0;
        return 1.0 / (std::pow(2.0, double(n_modes())) * std::sqrt(cov_.determinant()));
    }

    /// ⟨a_k⟩ = (x̄ + i p̄)/√2.
    complex amplitude(std::size_t mode) const {
        check_mode(mode);
        return complex(mean_(2 * mode), mean_(2 * mode + 1)) / std::sqrt(2.0);
    }

    /// ⟨a_k†a_k⟩ = (tr V_k + |m_k|²)/2 − 1/2.
    double mean_photon_number(std::size_t mode) const {
        check_mode(mode);
        const auto i = 2 * mode;
        double tr = cov_(i, i) + cov_(i + 1, i + 1);
        double m2 = mean_(i) * mean_(i) + mean_(i + 1) * mean_(i + 1);
        return 0.5 * (tr + m2) - 0.5;
    }

    /// Variance of x cosθ + p sinθ on one mode.
    double quadrature_variance(std::size_t mode, double angle) const {
        check_mode(mode);
        Eigen::Vector2d u(std::cos(angle), std::sin(angle));
        return u.dot(cov_.block<2, 2>(2 * mode, 2 * mode) * u);
    }

    /// Marginal on the listed modes, in the listed order.
    GaussianState reduced(const std::vector<std::size_t>& modes) const {
        const auto idx = quadrature_indices(modes);
        Vec m(idx.size());
        Mat c(idx.size(), idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            m(i) = mean_(idx[i]);
            for (std::size_t j = 0; j < idx.size(); ++j) c(i, j) = cov_(idx[i], idx[j]);
        }
        return {m, c};
    }

    /// this ⊗ other, other's modes appended.
    GaussianState tensor(const GaussianState& other) const {
        const auto a = mean_.size(), b = other.mean_.size();
        Vec m(a + b);
        m << mean_, other.mean_;
        Mat c = Mat::Zero(a + b, a + b);
        c.topLeftCorner(a, a) = cov_;
        c.bottomRightCorner(b, b) = other.cov_;
        return {m, c};
    }

    std::vector<Eigen::Index> quadrature_indices(const std::vector<std::size_t>& modes) const {
        std::vector<Eigen::Index> idx;
        for (auto k : modes) {
            check_mode(k);
            idx.push_back(Eigen::Index(2 * k));
            idx.push_back(Eigen::Index(2 * k + 1));
        }
        return idx;
    }

    void check_mode(std::size_t mode) const {
        if (mode >= n_modes()) throw DimensionError("mode index out of range");
    }

private:
    Vec mean_;
    Mat cov_;
};

/// Affine symplectic map q ↦ S q + d.
class SymplecticOp {
public:
    SymplecticOp(Mat matrix, Vec displacement) : matrix_(std::move(matrix)), displacement_(std::move(displacement)) {
        if (matrix_.rows() != matrix_.cols() || matrix_.rows() % 2 != 0 || displacement_.size() != matrix_.rows())
            throw DimensionError("SymplecticOp: matrix must be 2n x 2n with a length-2n displacement");
        if (!matrix_.allFinite() || !displacement_.allFinite())
            throw DomainError("SymplecticOp: non-finite entries");
        if (symplectic_defect(matrix_) > symplectic_tol)
            throw DomainError("SymplecticOp: matrix is not symplectic");
    }
    explicit SymplecticOp(Mat matrix) : SymplecticOp(matrix, Vec::Zero(matrix.rows())) {}

    static SymplecticOp identity(std::size_t n_modes) { return SymplecticOp(Mat::Identity(2 * n_modes, 2 * n_modes)); }

    std::size_t n_modes() const { return static_cast<std::size_t>(matrix_.rows() / 2); }
    const Mat& matrix() const { return matrix_; }
    const Vec& displacement() const { return displacement_; }

    /// max |S Ω Sᵀ − Ω|.
    static double symplectic_defect(const Mat& s) {
        const Mat omega = symplectic_form(static_cast<std::size_t>(s.rows() / 2));
        return (s * omega * s.transpose() - omega).cwiseAbs().maxCoeff();
    }

    /// (this ∘ inner): apply inner first.
    SymplecticOp after(const SymplecticOp& inner) const {
        if (inner.n_modes() != n_modes()) throw DimensionError("SymplecticOp: composition dimension mismatch");
        return {matrix_ * inner.matrix_, matrix_ * inner.displacement_ + displacement_};
    }

    /// Block-diagonal this ⊕ other.
    SymplecticOp direct_sum(const SymplecticOp& other) const {
        const auto a = matrix_.rows(), b = other.matrix_.rows();
        Mat s = Mat::Zero(a + b, a + b);
        s.topLeftCorner(a, a) = matrix_;
        s.bottomRightCorner(b, b) = other.matrix_;
        Vec d(a + b);
        d << displacement_, other.displacement_;
        return {s, d};
    }

private:
    Mat matrix_;
    Vec displacement_;
};

// --- State and operator constructors ----------------------------------------

inline GaussianState coherent(complex alpha) {
    Vec m(2);
    m << std::sqrt(2.0) * alpha.real(), std::sqrt(2.0) * alpha.imag();
    return {m, 0.5 * Mat::Identity(2, 2)};
}

/// Coherent mean with isotropic excess noise: cov = (1/2 + excess) I.
inline GaussianState noisy_coherent(complex alpha, double excess) {
    require(excess >= 0, "noisy_coherent: excess noise must be non-negative");
    auto c = coherent(alpha);
    return {c.mean(), (0.5 + excess) * Mat::Identity(2, 2)};
}

inline SymplecticOp phase_shift(double phi) {
    require_finite(phi, "phase_shift angle");
    return SymplecticOp(Mat(rotation(phi)));
}

/// Single-mode squeezer exp[(ξ* a² − ξ a†²)/2], ξ = r e^{iθ}. Squeezes the
/// quadrature at angle θ/2: on vacuum, squeezer(r, 0) gives cov diag(e^{−2r}, e^{2r})/2.
inline SymplecticOp squeezer(double r, double theta) {
    require_finite(r, "squeezer r");
    require_finite(theta, "squeezer theta");
    Eigen::Matrix2d rot = rotation(theta / 2);
    Eigen::Matrix2d d = Eigen::Vector2d(std::exp(-r), std::exp(r)).asDiagonal();
    return SymplecticOp(Mat(rot * d * rot.transpose()));
}

/// exp[r (a†b† − ab)]: x_a' = cosh r x_a + sinh r x_b, p_a' = cosh r p_a − sinh r p_b.
/// On vacuum this is Σ tanhⁿr |n,n⟩ / cosh r.
inline SymplecticOp two_mode_squeezer(double r) {
    require_finite(r, "two_mode_squeezer r");
    const double c = std::cosh(r), s = std::sinh(r);
    Mat m = Mat::Zero(4, 4);
    m(0, 0) = c; m(1, 1) = c; m(2, 2) = c; m(3, 3) = c;
    m(0, 2) = s; m(2, 0) = s;
    m(1, 3) = -s; m(3, 1) = -s;
    return SymplecticOp(m);
}

inline SymplecticOp beamsplitter(double transmittance) {
    require_finite(transmittance, "beamsplitter transmittance");
    require(transmittance >= 0.0 && transmittance <= 1.0, "beamsplitter: transmittance must lie in [0,1]");
    const double t = std::sqrt(transmittance), r = std::sqrt(1.0 - transmittance);
    Mat m = Mat::Zero(4, 4);
    for (int q = 0; q < 2; ++q) {
        m(q, q) = t;
        m(q, 2 + q) = -r;
        m(2 + q, q) = r;
        m(2 + q, 2 + q) = t;
    }
    return SymplecticOp(m);
}

/// Weyl displacement by α on one mode.
inline SymplecticOp displacement(complex alpha) {
    Vec d(2);
    d << std::sqrt(2.0) * alpha.real(), std::sqrt(2.0) * alpha.imag();
    return {Mat::Identity(2, 2), d};
}

// --- Evolution ----------------------------------------------------------------

inline GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& op,
                                      const std::vector<std::size_t>& modes) {
    if (op.n_modes() != modes.size()) throw DimensionError("apply_symplectic: operator size does not match mode list");
    std::vector<std::size_t> sorted = modes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw DimensionError("apply_symplectic: mode indices must be distinct");
    const auto idx = state.quadrature_indices(modes);
    const auto dim = static_cast<Eigen::Index>(state.mean().size());

    // Embed S into the full space; untouched modes see the identity.
    Mat full = Mat::Identity(dim, dim);
    Vec disp = Vec::Zero(dim);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        disp(idx[i]) = op.displacement()(Eigen::Index(i));
        for (std::size_t j = 0; j < idx.size(); ++j) full(idx[i], idx[j]) = op.matrix()(Eigen::Index(i), Eigen::Index(j));
    }
    Vec m = full * state.mean() + disp;
    Mat c = full * state.cov() * full.transpose();
    return {m, 0.5 * (c + c.transpose())};
}

inline GaussianState apply_symplectic(const GaussianState& state, const SymplecticOp& op) {
    std::vector<std::size_t> all(state.n_modes());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return apply_symplectic(state, op, all);
}

// --- Measurements -------------------------------------------------------------

struct HomodyneOutcome {
    double value = 0.0;
    double angle = 0.0;
    std::size_t mode_index = 0;
    double log_density = 0.0;
};

struct HeterodyneOutcome {
    complex value;  // coherent-state label β; quadrature outcome is √2 (Re β, Im β)
    std::size_t mode_index = 0;
    double log_density = 0.0;  // density of β w.r.t. d²β (Husimi Q)
};

namespace detail {

inline std::vector<Eigen::Index> complement(std::size_t dim, const std::vector<Eigen::Index>& drop) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < Eigen::Index(dim); ++i)
        if (std::find(drop.begin(), drop.end(), i) == drop.end()) keep.push_back(i);
    return keep;
}

inline Mat take(const Mat& m, const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) {
    Mat out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(Eigen::Index(i), Eigen::Index(j)) = m(rows[i], cols[j]);
    return out;
}

inline Vec take(const Vec& v, const std::vector<Eigen::Index>& rows) {
    Vec out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out(Eigen::Index(i)) = v(rows[i]);
    return out;
}

/// Gaussian observation y = q[observed] + noise, noise ~ N(0, noise_cov).
struct Observation {
    Vec mean;          // E y
    Mat cov;           // Cov y
    Mat gain;          // Cov(q_rest, y) Cov(y)^{-1}
    Vec rest_mean;
    Mat rest_cov_conditional;
};

inline Observation observe(const GaussianState& s, const std::vector<Eigen::Index>& observed,
                           const std::vector<Eigen::Index>& dropped, const Mat& noise_cov) {
    const auto rest = complement(std::size_t(s.mean().size()), dropped);
    Observation o;
    o.mean = take(s.mean(), observed);
    o.cov = take(s.cov(), observed, observed) + noise_cov;
    Mat cross = take(s.cov(), rest, observed);
    Eigen::LDLT<Mat> ldlt(o.cov);
    o.gain = ldlt.solve(cross.transpose()).transpose();
    o.rest_mean = take(s.mean(), rest);
    Mat c = take(s.cov(), rest, rest) - o.gain * cross.transpose();
    o.rest_cov_conditional = 0.5 * (c + c.transpose());
    return o;
}

inline double gaussian_log_density(const Vec& y, const Vec& mean, const Mat& cov) {
    Eigen::LDLT<Mat> ldlt(cov);
    Vec d = y - mean;
    double quad = d.dot(ldlt.solve(d));
    double logdet = ldlt.vectorD().array().log().sum();
    return -0.5 * (quad + logdet + double(y.size()) * std::log(two_pi));
}

inline GaussianState rotate_mode(const GaussianState& s, std::size_t mode, double angle) {
    return apply_symplectic(s, phase_shift(angle), {mode});
}

}  // namespace detail

/// Remaining modes after conditioning on homodyne value x at the given angle.
/// The conditional covariance does not depend on x.
inline GaussianState homodyne_conditional(const GaussianState& state, std::size_t mode, double angle, double value,
                                          double* log_density = nullptr) {
    state.check_mode(mode);
    auto rotated = detail::rotate_mode(state, mode, -angle);
    const auto i = Eigen::Index(2 * mode);
    auto obs = detail::observe(rotated, {i}, {i, i + 1}, Mat::Zero(1, 1));
    Vec y(1);
    y << value;
    if (log_density) *log_density = detail::gaussian_log_density(y, obs.mean, obs.cov);
    return {obs.rest_mean + obs.gain * (y - obs.mean), obs.rest_cov_conditional};
}

/// Samples x cosθ + p sinθ on `mode`, removes the mode and conditions the rest.
inline std::pair<HomodyneOutcome, GaussianState> homodyne(const GaussianState& state, std::size_t mode, double angle,
                                                          Rng& rng) {
    state.check_mode(mode);
    require_finite(angle, "homodyne angle");
    const double mu = std::cos(angle) * state.mean()(Eigen::Index(2 * mode)) +
                      std::sin(angle) * state.mean()(Eigen::Index(2 * mode + 1));
    const double var = state.quadrature_variance(mode, angle);
    HomodyneOutcome out;
    out.value = rng.normal(mu, std::sqrt(var));
    out.angle = angle;
    out.mode_index = mode;
    auto post = homodyne_conditional(state, mode, angle, out.value, &out.log_density);
    return {out, post};
}

/// Remaining modes after a coherent-state projection with label β on `mode`.
inline GaussianState heterodyne_conditional(const GaussianState& state, std::size_t mode, complex beta,
                                            double* log_density = nullptr) {
    state.check_mode(mode);
    const auto i = Eigen::Index(2 * mode);
    auto obs = detail::observe(state, {i, i + 1}, {i, i + 1}, 0.5 * Mat::Identity(2, 2));
    Vec y(2);
    y << std::sqrt(2.0) * beta.real(), std::sqrt(2.0) * beta.imag();
    // Density in β is 2× the density in y = √2 β.
    if (log_density) *log_density = detail::gaussian_log_density(y, obs.mean, obs.cov) + std::log(2.0);
    return {obs.rest_mean + obs.gain * (y - obs.mean), obs.rest_cov_conditional};
}

inline std::pair<HeterodyneOutcome, GaussianState> heterodyne(const GaussianState& state, std::size_t mode, Rng& rng) {
    state.check_mode(mode);
    const auto i = Eigen::Index(2 * mode);
    Eigen::Matrix2d c = state.cov().block<2, 2>(i, i) + 0.5 * Eigen::Matrix2d::Identity();
    Eigen::Matrix2d l = c.llt().matrixL();
    Eigen::Vector2d z(rng.normal(), rng.normal());
    Eigen::Vector2d y = state.mean().segment<2>(i) + l * z;
    HeterodyneOutcome out;
    out.value = complex(y(0), y(1)) / std::sqrt(2.0);
    out.mode_index = mode;
    auto post = heterodyne_conditional(state, mode, out.value, &out.log_density);
    return {out, post};
}

struct QuadratureMeasurement {
    std::size_t mode;
    double angle;
};

/// Homodyne the listed quadratures, then displace the remaining modes by
/// gain · outcomes (gain is 2R × M in the lab frame of the remaining modes).
/// Returns the outcome-averaged state on the remaining modes. Because the
/// overlap with a fixed pure state is linear in ρ, fidelities of this state
/// equal outcome-averaged fidelities of the conditional states.
inline GaussianState homodyne_feedforward(const GaussianState& state, const std::vector<QuadratureMeasurement>& meas,
                                          const Mat& gain) {
    GaussianState rotated = state;
    std::vector<Eigen::Index> observed, dropped;
    for (const auto& m : meas) {
        rotated = detail::rotate_mode(rotated, m.mode, -m.angle);
        observed.push_back(Eigen::Index(2 * m.mode));
        dropped.push_back(Eigen::Index(2 * m.mode));
        dropped.push_back(Eigen::Index(2 * m.mode + 1));
    }
    std::sort(dropped.begin(), dropped.end());
    if (std::adjacent_find(dropped.begin(), dropped.end()) != dropped.end())
        throw DimensionError("homodyne_feedforward: each mode can be measured once");
    auto obs = detail::observe(rotated, observed, dropped, Mat::Zero(Eigen::Index(meas.size()), Eigen::Index(meas.size())));
    if (gain.rows() != obs.rest_mean.size() || gain.cols() != Eigen::Index(meas.size()))
        throw DimensionError("homodyne_feedforward: gain must be (2 * remaining modes) x (measurements)");
    Mat k = obs.gain + gain;
    Vec m = obs.rest_mean + gain * obs.mean;
    Mat c = obs.rest_cov_conditional + k * obs.cov * k.transpose();
    return {m, 0.5 * (c + c.transpose())};
}

// --- Measures -----------------------------------------------------------------

/// Symplectic eigenvalues (moduli of the eigenvalues of iΩV), ascending, each listed once.
inline std::vector<double> symplectic_eigenvalues(const Mat& cov) {
    const auto n = static_cast<std::size_t>(cov.rows() / 2);
    Eigen::MatrixXcd m = complex(0, 1) * (symplectic_form(n) * cov).cast<complex>();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
    std::vector<double> v;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) v.push_back(std::abs(es.eigenvalues()(i)));
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); i += 2) out.push_back(0.5 * (v[i] + v[i + 1]));
    return out;
}

struct Bipartition {
    std::vector<std::size_t> side_a;
    std::vector<std::size_t> side_b;
};

/// E_N = max(0, −log₂(2 ν̃₋)) for a two-mode state split 1|1.
inline double log_negativity(const GaussianState& state, const Bipartition& partition = {{0}, {1}}) {
    if (state.n_modes() != 2 || partition.side_a.size() != 1 || partition.side_b.size() != 1 ||
        partition.side_a[0] == partition.side_b[0] || partition.side_a[0] > 1 || partition.side_b[0] > 1)
        throw DimensionError("log_negativity: only the 1|1 partition of a two-mode state is supported");
    Mat pt = state.cov();
    const auto pb = Eigen::Index(2 * partition.side_b[0] + 1);
    pt.row(pb) *= -1.0;
    pt.col(pb) *= -1.0;
    const double nu_min = symplectic_eigenvalues(pt).front();
    return std::max(0.0, -std::log2(2.0 * nu_min));
}

/// ⟨α|ρ|α⟩ = exp(−½ dᵀ(V + I/2)⁻¹ d) / √det(V + I/2), d = mean − mean(α).
inline double fidelity_to_coherent(const GaussianState& state, complex alpha) {
    if (state.n_modes() != 1) throw DimensionError("fidelity_to_coherent: single-mode state required");
    Eigen::Matrix2d s = state.cov() + 0.5 * Eigen::Matrix2d::Identity();
    Eigen::Vector2d d = state.mean() - coherent(alpha).mean();
    double f = std::exp(-0.5 * d.dot(s.inverse() * d)) / std::sqrt(s.determinant());
    return std::clamp(f, 0.0, 1.0);
}

}  // namespace laserstate::gaussian
