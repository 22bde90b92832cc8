#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adaptopt {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape &shape);

/// Flat f64 array with shape metadata. All math treats it as a flat vector;
/// the shape only has to agree between operands.
class ParamVector {
public:
    ParamVector() = default;

    /// Zero-filled vector of the given shape. Every extent must be >= 1.
    explicit ParamVector(Shape shape);

    /// Takes ownership of `data`; `data.size()` must equal the shape product.
    ParamVector(std::vector<double> data, Shape shape);

    /// One-dimensional vector holding `values`.
    static ParamVector from(std::vector<double> values);
    static ParamVector filled(Shape shape, double value);

    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    const Shape &shape() const noexcept { return shape_; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    const std::vector<double> &vector() const noexcept { return data_; }

    double &operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    bool all_finite() const noexcept;

    friend bool operator==(const ParamVector &, const ParamVector &) = default;

private:
    std::vector<double> data_;
    Shape shape_;
};

/// Throws std::invalid_argument naming both shapes when they differ.
void require_same_shape(const ParamVector &a, const ParamVector &b, std::string_view what);

double l2_norm(const ParamVector &v);
double l2_norm(std::span<const double> v);

/// a*x + y, elementwise.
ParamVector axpy(double a, const ParamVector &x, const ParamVector &y);

ParamVector operator+(const ParamVector &x, const ParamVector &y);
ParamVector operator-(const ParamVector &x, const ParamVector &y);
ParamVector operator*(double a, const ParamVector &x);

/// Counter-based SplitMix64 stream. The output for (seed, counter) is a pure
/// function of both, so streams replay bitwise on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes two draws per call.
    double normal() noexcept;

    /// Uniform index in [0, n).
    std::size_t below(std::size_t n) noexcept;

    /// Independent child stream keyed by a label; does not advance this stream.
    Rng derive(std::string_view label) const noexcept;
    Rng derive(std::uint64_t index) const noexcept;

    friend bool operator==(const Rng &, const Rng &) = default;

private:
    std::uint64_t seed_ = 0;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// n draws in [lo, hi) as a 1-D vector.
ParamVector rng_uniform(Rng &rng, double lo, double hi, std::size_t n);

template <typename T>
void shuffle(std::span<T> items, Rng &rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = rng.below(i);
        std::swap(items[i - 1], items[j]);
    }
}

}    // namespace adaptopt
