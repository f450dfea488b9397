#pragma once

// Shared primitives: errors, deterministic randomness, sampled signals and
// collected reservoir states.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// ---------------------------------------------------------------------------
// Errors. Every failure raised by the library derives from prc::Error so the
// CLI can map families of errors onto exit codes.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument value (bounds, counts, washout lengths).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Incompatible matrix or vector dimensions.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Base for failures caused by the numbers themselves rather than the inputs'
/// structure.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what, long iterations = -1)
        : Error(what), iterations_(iterations) {}

    /// Iterations performed before giving up, or -1 when not applicable.
    long iterations() const noexcept { return iterations_; }

private:
    long iterations_;
};

class ConditioningError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class StabilityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A metric is undefined for the given data (e.g. zero target variance).
class MetricError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A randomly drawn object cannot satisfy its construction contract.
class ConstructionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// ---------------------------------------------------------------------------
// RandomSource
//
// The generator is std::mt19937_64 (64-bit Mersenne Twister, MT19937-64), whose
// output sequence for a given seed is fixed by the C++ standard. Conversions to
// real numbers are done here rather than through <random> distributions, whose
// algorithms are implementation-defined:
//   uniform [0,1):  (next() >> 11) * 2^-53
//   normal:         Box-Muller on two such uniforms, both outputs consumed.
// Substreams are seeded from splitmix64(seed ^ splitmix64(fnv1a64(label))) and
// never depend on how many values were drawn from the parent.

class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed = 0);

    std::uint64_t seed() const noexcept { return seed_; }

    /// Independent generator derived from this source's seed and a label.
    RandomSource substream(std::string_view label) const;
    RandomSource substream(std::uint64_t index) const;

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double next_unit();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    double normal();
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view s) noexcept;

/// `count` values uniform in [lo, hi); throws ParameterError unless lo < hi and
/// count >= 1.
Vector draw_uniform(RandomSource& rng, double lo, double hi, long count);

/// rows x cols matrix with entries uniform in [lo, hi), filled row-major.
Matrix draw_uniform_matrix(RandomSource& rng, double lo, double hi, long rows, long cols);

// ---------------------------------------------------------------------------
// Sampled signals

/// Uniformly sampled sequence of real vectors, one row per sample.
class TimeSeries {
public:
    TimeSeries(Matrix values, double dt = 1.0);

    /// Width-1 series from scalar samples.
    static TimeSeries scalar(const Vector& samples, double dt = 1.0);

    long length() const noexcept { return values_.rows(); }
    long width() const noexcept { return values_.cols(); }
    double dt() const noexcept { return dt_; }
    const Matrix& values() const noexcept { return values_; }

    double operator()(long k, long c = 0) const { return values_(k, c); }

    /// Rows [begin, begin + count).
    TimeSeries slice(long begin, long count) const;

private:
    Matrix values_;
    double dt_;
};

/// Reservoir states, one row per time step and one column per node.
class StateMatrix {
public:
    /// Throws NumericalError if any entry is NaN or infinite.
    explicit StateMatrix(Matrix values);

    long rows() const noexcept { return values_.rows(); }
    long nodes() const noexcept { return values_.cols(); }
    const Matrix& values() const noexcept { return values_; }
    double operator()(long k, long i) const { return values_(k, i); }

    StateMatrix slice(long begin, long count) const;

private:
    Matrix values_;
};

/// Column-wise concatenation; all parts must share the row count.
StateMatrix concat_columns(const std::vector<StateMatrix>& parts);

// ---------------------------------------------------------------------------
// Spectral radius

struct SpectralRadiusOptions {
    double tolerance = 1e-10;
    long max_iterations = 10000;
    /// Matrices up to this order go straight to a dense eigen-decomposition.
    long dense_limit = 64;
    /// Use the dense eigen-decomposition instead of throwing when the power
    /// iteration does not converge.
    bool dense_fallback = false;
};

/// Largest eigenvalue modulus of a square matrix.
///
/// Orders above `dense_limit` use a two-term power iteration: the iterates
/// x, Ax, A^2x are fitted by A^2x = a Ax + b x, and the dominant eigenvalue is
/// the larger root of z^2 - a z - b. This handles both a real dominant
/// eigenvalue and a dominant complex-conjugate pair, which plain power iteration
/// cannot. Convergence is declared when the relative fit residual drops below
/// `tolerance`; otherwise NumericalError is thrown with the iteration count.
double spectral_radius(const Matrix& m, const SpectralRadiusOptions& opts = {});

}  // namespace prc
