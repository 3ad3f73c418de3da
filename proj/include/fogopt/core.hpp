#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fogopt::core {

using Vec = std::vector<double>;

// Small dense row-major matrix, sized for constraint Jacobians (N x d).
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    // y = M x
    Vec mul(const Vec& x) const;
    // y = M^T x
    Vec tmul(const Vec& x) const;
};

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(const Vec& a, double s);
// a += s * b
void axpy(Vec& a, double s, const Vec& b);
// elementwise max(a, 0)
Vec positive_part(const Vec& a);

// Axis-aligned box { lower <= x <= upper }.
struct BoxSet {
    Vec lower;
    Vec upper;

    BoxSet() = default;
    BoxSet(Vec lo, Vec hi);

    std::size_t dim() const { return lower.size(); }
    bool contains(const Vec& x, double tol = 0.0) const;
    Vec center() const;
    // Half of the minimum side length; radius of the largest inscribed ball.
    double inradius() const;
};

// Box scaled by (1 - gamma) about its center.
struct ShrunkSet {
    BoxSet base;
    double gamma = 0.0;

    BoxSet box() const;
};

// Deterministic seeded stream; identical (seed, stream_id) gives an identical
// draw sequence. Distributions are implemented here rather than with
// std::*_distribution so sequences do not depend on the standard library.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

    std::uint64_t next_u64();
    double uniform01();                    // [0, 1)
    double uniform(double lo, double hi);  // [lo, hi)
    double gaussian();                     // standard normal, Box-Muller
    std::size_t uniform_index(std::size_t n);  // {0, ..., n-1}
    bool bernoulli(double p);

    std::uint64_t calls() const { return calls_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

  private:
    std::uint64_t state_;
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t calls_ = 0;
    double cached_gauss_ = 0.0;
    bool has_cached_gauss_ = false;
};

// Per-coordinate clamp of x into the box. Euclidean projection.
Vec project_box(const Vec& x, const BoxSet& set);

// Scales the box by (1 - gamma) about its center; gamma in [0, 1).
ShrunkSet shrink_box(const BoxSet& set, double gamma);

// Uniform draw from the surface of the unit sphere in R^d.
Vec sample_unit_sphere(std::size_t d, RngStream& rng);

}  // namespace fogopt::core
