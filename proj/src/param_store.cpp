#include "adaptopt/param_store.hpp"

#include "adaptopt/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace adaptopt {

namespace {

std::size_t shape_product(const Shape &shape) {
    std::size_t n = 1;
    for (std::size_t extent : shape) {
        if (extent == 0) {
            throw std::invalid_argument("shape extents must be >= 1, got " + shape_to_string(shape));
        }
        n *= extent;
    }
    return n;
}

}    // namespace

std::string shape_to_string(const Shape &shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

ParamVector::ParamVector(Shape shape) : data_(shape_product(shape), 0.0), shape_(std::move(shape)) {
}

ParamVector::ParamVector(std::vector<double> data, Shape shape) : data_(std::move(data)), shape_(std::move(shape)) {
    if (data_.size() != shape_product(shape_)) {
        throw std::invalid_argument("data length " + std::to_string(data_.size()) + " does not match shape " +
                                    shape_to_string(shape_));
    }
}

ParamVector ParamVector::from(std::vector<double> values) {
    if (values.empty()) {
        throw std::invalid_argument("empty parameter vector");
    }
    Shape shape{values.size()};
    return ParamVector(std::move(values), std::move(shape));
}

ParamVector ParamVector::filled(Shape shape, double value) {
    ParamVector v(std::move(shape));
    for (double &x : v.values()) {
        x = value;
    }
    return v;
}

bool ParamVector::all_finite() const noexcept {
    for (double x : data_) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

void require_same_shape(const ParamVector &a, const ParamVector &b, std::string_view what) {
    if (a.shape() != b.shape()) {
        throw std::invalid_argument(std::string(what) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                                    shape_to_string(b.shape()));
    }
}

double l2_norm(std::span<const double> v) {
    if (v.empty()) {
        throw std::invalid_argument("empty parameter vector");
    }
    return std::sqrt(kernels::sum_squares(v));
}

double l2_norm(const ParamVector &v) {
    return l2_norm(v.values());
}

ParamVector axpy(double a, const ParamVector &x, const ParamVector &y) {
    require_same_shape(x, y, "axpy");
    ParamVector out(y.shape());
    kernels::scale_add(a, x.values(), y.values(), out.values());
    return out;
}

ParamVector operator+(const ParamVector &x, const ParamVector &y) {
    return axpy(1.0, x, y);
}

ParamVector operator-(const ParamVector &x, const ParamVector &y) {
    return axpy(-1.0, y, x);
}

ParamVector operator*(double a, const ParamVector &x) {
    ParamVector out = x;
    kernels::scale(out.values(), a);
    return out;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t Rng::next_u64() noexcept {
    ++counter_;
    return mix64(seed_ + counter_ * 0x9e3779b97f4a7c15ULL);
}

double Rng::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() noexcept {
    // 1 - u keeps the log argument in (0, 1].
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t n) noexcept {
    // Lemire's multiply-shift; bias is < n / 2^64, irrelevant at these sizes.
    return static_cast<std::size_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

Rng Rng::derive(std::string_view label) const noexcept {
    return Rng(mix64(seed_ ^ mix64(fnv1a64(label))));
}

Rng Rng::derive(std::uint64_t index) const noexcept {
    return Rng(mix64(seed_ ^ mix64(index + 0x632be59bd9b4e019ULL)));
}

ParamVector rng_uniform(Rng &rng, double lo, double hi, std::size_t n) {
    if (!(lo < hi)) {
        throw std::invalid_argument("rng_uniform requires lo < hi");
    }
    if (n == 0) {
        throw std::invalid_argument("rng_uniform requires n >= 1");
    }
    std::vector<double> out(n);
    for (double &x : out) {
        x = rng.uniform(lo, hi);
        // lo + (hi-lo)*u can round up to hi when the span is tiny.
        if (x >= hi) {
            x = std::nextafter(hi, lo);
        }
    }
    return ParamVector::from(std::move(out));
}

}    // namespace adaptopt
