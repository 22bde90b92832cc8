#pragma once

// Elementwise update kernels. The functions in `kernels` are OpenMP-parallel
// above `parallel_threshold` elements; `kernels::serial` holds the plain-loop
// reference implementations the tests and the benchmark compare against.
//
// Elementwise kernels produce bitwise-identical results on both paths and for
// every thread count. Reductions use fixed-size blocks combined in block
// order, so they are thread-count independent too (but may differ from the
// serial single-accumulator loop in the last few ulps once n > block size).

#include <cstddef>
#include <span>

namespace adaptopt::kernels {

inline constexpr std::size_t parallel_threshold = std::size_t{1} << 15;
inline constexpr std::size_t reduction_block = 2048;

struct AdamCoefficients {
    double beta1;
    double beta2;
    double lr;
    double epsilon;
    double bias1;    // 1 - beta1^t
    double bias2;    // 1 - beta2^t
};

void scale_add(double a, std::span<const double> x, std::span<const double> y, std::span<double> out);
double sum_squares(std::span<const double> x);
double diff_sum_squares(std::span<const double> a, std::span<const double> b);
void scale(std::span<double> x, double a);

void sgd_update(std::span<double> theta, std::span<const double> g, double lr);
void momentum_update(std::span<double> theta, std::span<double> velocity, std::span<const double> g, double mu,
                     double lr);
void adagrad_update(std::span<double> theta, std::span<double> accum, std::span<const double> g, double lr,
                    double epsilon);
void rmsprop_update(std::span<double> theta, std::span<double> avg, std::span<const double> g, double rho,
                    double lr, double epsilon);
void adam_update(std::span<double> theta, std::span<double> m, std::span<double> v, std::span<const double> g,
                 const AdamCoefficients &c);

/// Threads the parallel kernels may use; 0 restores the OpenMP default.
void set_thread_count(int threads);
int thread_count();

namespace serial {

void scale_add(double a, std::span<const double> x, std::span<const double> y, std::span<double> out);
double sum_squares(std::span<const double> x);
double diff_sum_squares(std::span<const double> a, std::span<const double> b);
void scale(std::span<double> x, double a);

void sgd_update(std::span<double> theta, std::span<const double> g, double lr);
void momentum_update(std::span<double> theta, std::span<double> velocity, std::span<const double> g, double mu,
                     double lr);
void adagrad_update(std::span<double> theta, std::span<double> accum, std::span<const double> g, double lr,
                    double epsilon);
void rmsprop_update(std::span<double> theta, std::span<double> avg, std::span<const double> g, double rho,
                    double lr, double epsilon);
void adam_update(std::span<double> theta, std::span<double> m, std::span<double> v, std::span<const double> g,
                 const AdamCoefficients &c);

}    // namespace serial

}    // namespace adaptopt::kernels
