#include "fogopt/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fogopt::core {

Vec Mat::mul(const Vec& x) const {
    if (x.size() != cols) throw std::invalid_argument("Mat::mul: dimension mismatch");
    Vec y(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        const double* row = &data[i * cols];
        for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
        y[i] = acc;
    }
    return y;
}

Vec Mat::tmul(const Vec& x) const {
    if (x.size() != rows) throw std::invalid_argument("Mat::tmul: dimension mismatch");
    Vec y(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* row = &data[i * cols];
        const double xi = x[i];
        for (std::size_t j = 0; j < cols; ++j) y[j] += row[j] * xi;
    }
    return y;
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

Vec add(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("add: dimension mismatch");
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

Vec sub(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sub: dimension mismatch");
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
    return c;
}

Vec scale(const Vec& a, double s) {
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * s;
    return c;
}

void axpy(Vec& a, double s, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("axpy: dimension mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

Vec positive_part(const Vec& a) {
    Vec c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = std::max(a[i], 0.0);
    return c;
}

BoxSet::BoxSet(Vec lo, Vec hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) throw std::invalid_argument("BoxSet: dimension mismatch");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
            throw std::invalid_argument("BoxSet: bounds must be finite");
        if (lower[i] > upper[i]) throw std::invalid_argument("BoxSet: lower > upper");
    }
}

bool BoxSet::contains(const Vec& x, double tol) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
    return true;
}

Vec BoxSet::center() const {
    Vec c(dim());
    for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lower[i] + upper[i]);
    return c;
}

double BoxSet::inradius() const {
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dim(); ++i) r = std::min(r, 0.5 * (upper[i] - lower[i]));
    return r;
}

BoxSet ShrunkSet::box() const {
    BoxSet out;
    out.lower.resize(base.dim());
    out.upper.resize(base.dim());
    const double keep = 1.0 - gamma;
    for (std::size_t i = 0; i < base.dim(); ++i) {
        const double c = 0.5 * (base.lower[i] + base.upper[i]);
        const double w = 0.5 * (base.upper[i] - base.lower[i]) * keep;
        out.lower[i] = c - w;
        out.upper[i] = c + w;
    }
    return out;
}

namespace {
// splitmix64, used to decorrelate (seed, stream_id) pairs and to step the state
std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    std::uint64_t s = seed;
    std::uint64_t mixed = splitmix64(s);
    s = stream_id ^ 0xD2B74407B1CE6E93ULL;
    mixed ^= splitmix64(s) + 0x9E3779B97F4A7C15ULL;
    state_ = mixed == 0 ? 0x4D595DF4D0F33173ULL : mixed;
}

std::uint64_t RngStream::next_u64() {
    ++calls_;
    return splitmix64(state_);
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double RngStream::gaussian() {
    if (has_cached_gauss_) {
        has_cached_gauss_ = false;
        return cached_gauss_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_gauss_ = r * std::sin(theta);
    has_cached_gauss_ = true;
    return r * std::cos(theta);
}

std::size_t RngStream::uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    // rejection sampling avoids modulo bias
    const std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= bound);
    return static_cast<std::size_t>(v % n);
}

bool RngStream::bernoulli(double p) { return uniform01() < p; }

Vec project_box(const Vec& x, const BoxSet& set) {
    if (x.size() != set.dim()) throw std::invalid_argument("project_box: dimension mismatch");
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = std::min(std::max(x[i], set.lower[i]), set.upper[i]);
    return y;
}

ShrunkSet shrink_box(const BoxSet& set, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("shrink_box: gamma outside [0,1)");
    return ShrunkSet{set, gamma};
}

Vec sample_unit_sphere(std::size_t d, RngStream& rng) {
    if (d < 1) throw std::invalid_argument("sample_unit_sphere: d must be >= 1");
    Vec u(d);
    double n = 0.0;
    do {
        for (std::size_t i = 0; i < d; ++i) u[i] = rng.gaussian();
        n = norm2(u);
    } while (n < 1e-12);
    for (std::size_t i = 0; i < d; ++i) u[i] /= n;
    return u;
}

}  // namespace fogopt::core
