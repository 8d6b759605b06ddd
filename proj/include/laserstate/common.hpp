// common.hpp
// Shared error types, seeded random streams and small numeric helpers.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace laserstate {

using complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr const char* engine_version = "1.0.0";

// --- Errors -----------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shapes, mode indices or operator dimensions do not line up.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A parameter is outside the domain an operation is defined on.
class DomainError : public Error {
public:
    using Error::Error;
};

// Number-basis cutoff too small for the requested state.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, double tail)
        : Error(what), tail_mass(tail) {}
    double tail_mass;
};

// Phase increment left the principal branch of the logarithm.
class PhaseWindingError : public Error {
public:
    using Error::Error;
};

inline void require(bool ok, const std::string& message) {
    if (!ok) throw DomainError(message);
}

inline void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw DomainError(std::string(name) + " must be finite");
}

// --- Random streams ---------------------------------------------------------

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded random stream. Substreams are derived by hashing the parent seed
/// with a key, so sample k of a run draws the same numbers no matter which
/// thread evaluates it or in which order.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    Rng substream(std::uint64_t key) const {
        return Rng(splitmix64(seed_ ^ splitmix64(key + 0x632be59bd9b4e019ULL)));
    }
    Rng substream(std::uint64_t a, std::uint64_t b) const { return substream(a).substream(b); }

    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }
    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double uniform_phase() { return uniform(0.0, two_pi); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

// --- Angles -----------------------------------------------------------------

/// Wrap to [0, 2π).
inline double wrap_phase(double phi) {
    double w = std::fmod(phi, two_pi);
    if (w < 0) w += two_pi;
    if (w >= two_pi) w = 0.0;
    return w;
}

/// Wrap to (-π, π].
inline double wrap_signed(double phi) {
    double w = wrap_phase(phi + pi) - pi;
    if (w <= -pi) w += two_pi;
    return w;
}

struct CircularSummary {
    double mean = 0.0;       // direction of the resultant
    double resultant = 0.0;  // |E e^{iθ}|
    double stddev = std::numeric_limits<double>::infinity();
};

/// Circular moments of (optionally weighted) angles. stddev = sqrt(-2 ln R),
/// infinite when the resultant vanishes.
inline CircularSummary circular_summary(std::span<const double> angles,
                                        std::span<const double> weights = {}) {
    complex acc{0.0, 0.0};
    double total = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        double w = weights.empty() ? 1.0 : weights[i];
        acc += w * std::polar(1.0, angles[i]);
        total += w;
    }
    CircularSummary out;
    if (total <= 0) return out;
    acc /= total;
    out.resultant = std::abs(acc);
    out.mean = wrap_phase(std::arg(acc));
    if (out.resultant > 1e-14) out.stddev = std::sqrt(std::max(0.0, -2.0 * std::log(std::min(out.resultant, 1.0))));
    return out;
}

// --- Plain statistics -------------------------------------------------------

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double se_mean = 0.0;
    double se_variance = 0.0;
    std::size_t n = 0;
};

inline Moments moments(std::span<const double> xs) {
    Moments m;
    m.n = xs.size();
    if (m.n == 0) return m;
    double s = 0;
    for (double x : xs) s += x;
    m.mean = s / double(m.n);
    if (m.n < 2) return m;
    double s2 = 0, s4 = 0;
    for (double x : xs) {
        double d = x - m.mean;
        s2 += d * d;
        s4 += d * d * d * d;
    }
    double nn = double(m.n);
    m.variance = s2 / (nn - 1);
    m.se_mean = std::sqrt(m.variance / nn);
    double m2 = s2 / nn, m4 = s4 / nn;
    m.se_variance = std::sqrt(std::max(0.0, (m4 - m2 * m2) / nn));
    return m;
}

inline double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    double pos = q * double(xs.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, xs.size() - 1);
    double f = pos - double(lo);
    return xs[lo] * (1 - f) + xs[hi] * f;
}

/// Least-squares line y = a + b x; returns {a, b}.
inline std::pair<double, double> linear_fit(std::span<const double> x, std::span<const double> y) {
    double n = double(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {(sy - b * sx) / n, b};
}

}  // namespace laserstate
