#include "photorc/core.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace prc {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RandomSource::RandomSource(std::uint64_t seed) : seed_(seed), engine_(seed) {}

RandomSource RandomSource::substream(std::string_view label) const {
    return RandomSource(splitmix64(seed_ ^ splitmix64(fnv1a64(label))));
}

RandomSource RandomSource::substream(std::uint64_t index) const {
    return substream("#" + std::to_string(index));
}

std::uint64_t RandomSource::next_u64() { return engine_(); }

double RandomSource::next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomSource::uniform(double lo, double hi) {
    const double v = lo + (hi - lo) * next_unit();
    // Rounding in the affine map can land exactly on hi.
    return v < hi ? v : std::nextafter(hi, lo);
}

double RandomSource::normal() {
    if (has_spare_normal_) {
        has_spare_normal_ = false;
        return spare_normal_;
    }
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(phi);
    has_spare_normal_ = true;
    return r * std::cos(phi);
}

std::uint64_t RandomSource::below(std::uint64_t n) {
    if (n == 0) throw ParameterError("RandomSource::below: n must be positive");
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % n;
}

Vector draw_uniform(RandomSource& rng, double lo, double hi, long count) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        std::ostringstream os;
        os << "draw_uniform: need finite lo < hi, got [" << lo << ", " << hi << ")";
        throw ParameterError(os.str());
    }
    if (count < 1) throw ParameterError("draw_uniform: count must be >= 1");
    Vector out(count);
    for (long i = 0; i < count; ++i) out[i] = rng.uniform(lo, hi);
    return out;
}

Matrix draw_uniform_matrix(RandomSource& rng, double lo, double hi, long rows, long cols) {
    if (rows < 1 || cols < 1) throw ParameterError("draw_uniform_matrix: empty shape");
    const Vector flat = draw_uniform(rng, lo, hi, rows * cols);
    Matrix m(rows, cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c];
    return m;
}

// ---------------------------------------------------------------------------

TimeSeries::TimeSeries(Matrix values, double dt) : values_(std::move(values)), dt_(dt) {
    if (values_.rows() < 1 || values_.cols() < 1)
        throw ParameterError("TimeSeries: needs at least one sample of width >= 1");
    if (!(dt_ > 0.0) || !std::isfinite(dt_))
        throw ParameterError("TimeSeries: dt must be positive and finite");
}

TimeSeries TimeSeries::scalar(const Vector& samples, double dt) {
    return TimeSeries(Matrix(samples), dt);
}

TimeSeries TimeSeries::slice(long begin, long count) const {
    if (begin < 0 || count < 1 || begin + count > length())
        throw ParameterError("TimeSeries::slice: range out of bounds");
    return TimeSeries(values_.middleRows(begin, count), dt_);
}

StateMatrix::StateMatrix(Matrix values) : values_(std::move(values)) {
    if (!values_.allFinite()) {
        for (long k = 0; k < values_.rows(); ++k)
            for (long i = 0; i < values_.cols(); ++i)
                if (!std::isfinite(values_(k, i))) {
                    std::ostringstream os;
                    os << "StateMatrix: non-finite entry at row " << k << ", node " << i;
                    throw NumericalError(os.str());
                }
    }
}

StateMatrix StateMatrix::slice(long begin, long count) const {
    if (begin < 0 || count < 0 || begin + count > rows())
        throw ParameterError("StateMatrix::slice: range out of bounds");
    return StateMatrix(values_.middleRows(begin, count));
}

StateMatrix concat_columns(const std::vector<StateMatrix>& parts) {
    if (parts.empty()) throw ParameterError("concat_columns: no parts");
    long cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != parts.front().rows())
            throw ShapeError("concat_columns: row counts differ");
        cols += p.nodes();
    }
    Matrix out(parts.front().rows(), cols);
    long at = 0;
    for (const auto& p : parts) {
        out.middleCols(at, p.nodes()) = p.values();
        at += p.nodes();
    }
    return StateMatrix(std::move(out));
}

// ---------------------------------------------------------------------------

namespace {

double dense_spectral_radius(const Matrix& m) {
    Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw NumericalError("spectral_radius: dense eigen-decomposition failed");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

double spectral_radius(const Matrix& m, const SpectralRadiusOptions& opts) {
    if (m.rows() != m.cols()) {
        std::ostringstream os;
        os << "spectral_radius: matrix is " << m.rows() << "x" << m.cols() << ", not square";
        throw ShapeError(os.str());
    }
    if (m.rows() == 0) throw ShapeError("spectral_radius: empty matrix");
    if (!m.allFinite()) throw NumericalError("spectral_radius: non-finite entries");

    const long n = m.rows();
    if (n <= opts.dense_limit) return dense_spectral_radius(m);

    RandomSource start(0x5eed5eedULL);
    Vector x = draw_uniform(start, -1.0, 1.0, n);
    x.normalize();
    Vector y = m * x;
    double estimate = 0.0;

    for (long it = 1; it <= opts.max_iterations; ++it) {
        const double ny = y.norm();
        if (ny == 0.0) return 0.0;
        const Vector z = m * y;
        const double nz = z.norm();
        if (nz == 0.0) return 0.0;

        // Least-squares fit z ~ a*y + b*x through the 2x2 normal equations.
        const double yy = y.squaredNorm(), xx = x.squaredNorm(), xy = x.dot(y);
        const double zy = z.dot(y), zx = z.dot(x);
        const double det = yy * xx - xy * xy;
        double a = 0.0, b = 0.0;
        bool rank_one = det <= 1e-14 * yy * xx;
        if (!rank_one) {
            a = (zy * xx - zx * xy) / det;
            b = (zx * yy - zy * xy) / det;
            const double disc = a * a + 4.0 * b;
            estimate = disc >= 0.0 ? 0.5 * (std::abs(a) + std::sqrt(disc)) : std::sqrt(-b);
        } else {
            a = zy / yy;
            estimate = std::abs(a);
        }
        const double residual = (z - a * y - b * x).norm() / nz;
        if (residual < opts.tolerance) return estimate;

        x = y / ny;
        y = z / ny;
    }
    if (opts.dense_fallback) return dense_spectral_radius(m);
    std::ostringstream os;
    os << "spectral_radius: power iteration did not converge in " << opts.max_iterations
       << " iterations (last estimate " << estimate << ")";
    throw NumericalError(os.str(), opts.max_iterations);
}

}  // namespace prc
