#include "adaptopt/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <omp.h>

namespace adaptopt::kernels {

namespace {

// Per-element bodies shared by both paths so the arithmetic is identical.

inline void adagrad_elem(double &theta, double &accum, double g, double lr, double eps) {
    accum += g * g;
    theta -= lr * g / (std::sqrt(accum) + eps);
}

inline void rmsprop_elem(double &theta, double &avg, double g, double rho, double lr, double eps) {
    avg = rho * avg + (1.0 - rho) * (g * g);
    theta -= lr * g / (std::sqrt(avg) + eps);
}

inline void adam_elem(double &theta, double &m, double &v, double g, const AdamCoefficients &c) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * (g * g);
    double m_hat = m / c.bias1;
    double v_hat = v / c.bias2;
    theta -= c.lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
}

template <typename BlockSum>
double blocked_reduce(std::size_t n, BlockSum block_sum) {
    const std::size_t blocks = (n + reduction_block - 1) / reduction_block;
    if (blocks <= 1) {
        return block_sum(0, n);
    }
    std::vector<double> partial(blocks);
    const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static) if (n >= parallel_threshold)
    for (std::ptrdiff_t b = 0; b < nb; ++b) {
        std::size_t lo = static_cast<std::size_t>(b) * reduction_block;
        std::size_t hi = std::min(n, lo + reduction_block);
        partial[static_cast<std::size_t>(b)] = block_sum(lo, hi);
    }
    double total = 0.0;
    for (double p : partial) {
        total += p;
    }
    return total;
}

}    // namespace

void set_thread_count(int threads) {
    omp_set_num_threads(threads > 0 ? threads : omp_get_num_procs());
}

int thread_count() {
    return omp_get_max_threads();
}

void scale_add(double a, std::span<const double> x, std::span<const double> y, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) if (out.size() >= parallel_threshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[i] = a * x[i] + y[i];
    }
}

double sum_squares(std::span<const double> x) {
    return blocked_reduce(x.size(), [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            s += x[i] * x[i];
        }
        return s;
    });
}

double diff_sum_squares(std::span<const double> a, std::span<const double> b) {
    return blocked_reduce(a.size(), [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            double d = a[i] - b[i];
            s += d * d;
        }
        return s;
    });
}

void scale(std::span<double> x, double a) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (x.size() >= parallel_threshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        x[i] *= a;
    }
}

void sgd_update(std::span<double> theta, std::span<const double> g, double lr) {
    const auto n = static_cast<std::ptrdiff_t>(theta.size());
#pragma omp parallel for schedule(static) if (theta.size() >= parallel_threshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        theta[i] -= lr * g[i];
    }
}

void momentum_update(std::span<double> theta, std::span<double> velocity, std::span<const double> g, double mu,
                     double lr) {
    const auto n = static_cast<std::ptrdiff_t>(theta.size());
#pragma omp parallel for schedule(static) if (theta.size() >= parallel_threshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        velocity[i] = mu * velocity[i] + g[i];
        theta[i] -= lr * velocity[i];
    }
}

void adagrad_update(std::span<double> theta, std::span<double> accum, std::span<const double> g, double lr,
                    double epsilon) {
    const auto n = static_cast<std::ptrdiff_t>(theta.size());
#pragma omp parallel for schedule(static) if (theta.size() >= parallel_threshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        adagrad_elem(theta[i], accum[i], g[i], lr, epsilon);
    }
}

void rmsprop_update(std::span<double> theta, std::span<double> avg, std::span<const double> g, double rho,
                    double lr, double epsilon) {
    const auto n = static_cast<std::ptrdiff_t>(theta.size());
#pragma omp parallel for schedule(static) if (theta.size() >= parallel_threshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        rmsprop_elem(theta[i], avg[i], g[i], rho, lr, epsilon);
    }
}

void adam_update(std::span<double> theta, std::span<double> m, std::span<double> v, std::span<const double> g,
                 const AdamCoefficients &c) {
    const auto n = static_cast<std::ptrdiff_t>(theta.size());
#pragma omp parallel for schedule(static) if (theta.size() >= parallel_threshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        adam_elem(theta[i], m[i], v[i], g[i], c);
    }
}

namespace serial {

void scale_add(double a, std::span<const double> x, std::span<const double> y, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = a * x[i] + y[i];
    }
}

double sum_squares(std::span<const double> x) {
    double s = 0.0;
    for (double xi : x) {
        s += xi * xi;
    }
    return s;
}

double diff_sum_squares(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void scale(std::span<double> x, double a) {
    for (double &xi : x) {
        xi *= a;
    }
}

void sgd_update(std::span<double> theta, std::span<const double> g, double lr) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        theta[i] -= lr * g[i];
    }
}

void momentum_update(std::span<double> theta, std::span<double> velocity, std::span<const double> g, double mu,
                     double lr) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        velocity[i] = mu * velocity[i] + g[i];
        theta[i] -= lr * velocity[i];
    }
}

void adagrad_update(std::span<double> theta, std::span<double> accum, std::span<const double> g, double lr,
                    double epsilon) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        adagrad_elem(theta[i], accum[i], g[i], lr, epsilon);
    }
}

void rmsprop_update(std::span<double> theta, std::span<double> avg, std::span<const double> g, double rho,
                    double lr, double epsilon) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        rmsprop_elem(theta[i], avg[i], g[i], rho, lr, epsilon);
    }
}

void adam_update(std::span<double> theta, std::span<double> m, std::span<double> v, std::span<const double> g,
                 const AdamCoefficients &c) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        adam_elem(theta[i], m[i], v[i], g[i], c);
    }
}

}    // namespace serial

}    // namespace adaptopt::kernels
