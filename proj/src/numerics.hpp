#pragma once

// Dense tensors, hand-derived forward/backward kernels, Adam, a seeded RNG
// and a central-difference gradient checker.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace selprop {

using Vector = std::vector<double>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

/// Row-major 2-D array of doubles. Vectors are stored as (n, 1).
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    std::string shape_string() const;

    bool operator==(const Tensor&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// True when every value is finite.
bool all_finite(std::span<const double> v);
void require_finite(std::span<const double> v, const std::string& what);

// ---------------------------------------------------------------------------
// Kernels. Backward forms accumulate (+=) into gradient outputs; an empty
// span or null pointer skips that output.

double dot(std::span<const double> a, std::span<const double> b);

/// y = W x
Vector matvec(const Tensor& w, std::span<const double> x);
void matvec_backward(const Tensor& w, std::span<const double> x, std::span<const double> g_y,
                     Tensor* g_w, std::span<double> g_x);

/// y = x^T W  (row vector times matrix)
Vector vecmat(std::span<const double> x, const Tensor& w);
void vecmat_backward(const Tensor& w, std::span<const double> x, std::span<const double> g_y,
                     Tensor* g_w, std::span<double> g_x);

/// C = A B
Tensor matmul(const Tensor& a, const Tensor& b);
void matmul_backward(const Tensor& a, const Tensor& b, const Tensor& g_c, Tensor* g_a, Tensor* g_b);

Vector concat(std::span<const double> a, std::span<const double> b);
/// Splits an upstream gradient of concat(a, b) back into its two halves.
void concat_backward(std::span<const double> g_y, std::span<double> g_a, std::span<double> g_b);

double relu(double x);
Vector relu(std::span<const double> x);
/// g_x += g_y * [pre > 0]
void relu_backward(std::span<const double> pre, std::span<const double> g_y, std::span<double> g_x);

double sigmoid(double x);
Vector sigmoid(std::span<const double> x);
void sigmoid_backward(std::span<const double> y, std::span<const double> g_y, std::span<double> g_x);

/// Max-subtracted softmax. Empty input is an error.
Vector softmax(std::span<const double> x);
void softmax_backward(std::span<const double> y, std::span<const double> g_y, std::span<double> g_x);

Vector scale(std::span<const double> x, double s);
/// Gradient of y = s x with respect to x (into g_x) and s (returned).
double scale_backward(std::span<const double> x, double s, std::span<const double> g_y,
                      std::span<double> g_x);

/// cos(a, b); defined as 0 when either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
void cosine_backward(std::span<const double> a, std::span<const double> b, double g,
                     std::span<double> g_a, std::span<double> g_b);

// ---------------------------------------------------------------------------

class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64() { return engine_(); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double normal(double mean, double stddev) { return std::normal_distribution<double>(mean, stddev)(engine_); }
    bool bernoulli(double p) { return uniform() < p; }
    std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }

    /// Independent stream keyed by (seed, tag).
    static SeededRng derive(std::uint64_t seed, std::uint64_t tag);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor adam_m;
    Tensor adam_v;
    std::int64_t step_count = 0;

    Parameter() = default;
    Parameter(std::string n, std::size_t rows, std::size_t cols)
        : name(std::move(n)), value(rows, cols), grad(rows, cols), adam_m(rows, cols), adam_v(rows, cols) {}

    void zero_grad() { grad.fill(0.0); }
};

/// Glorot-uniform fill in +-sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, SeededRng& rng);

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected Adam step; zeroes the gradient afterwards. Throws
/// NumericError on a non-finite gradient.
void adam_step(Parameter& p, const AdamConfig& cfg);

/// Scales the gradient so its L2 norm is at most max_norm (no-op when max_norm <= 0).
void clip_grad_norm(Parameter& p, double max_norm);

/// Compares p.grad (already populated) against central differences of f.
/// Returns max |a - n| / max(1e-8, |a| + |n|) over coordinates.
double finite_difference_check(const std::function<double()>& f, Parameter& p, double h = 1e-5);
/// Same, over an arbitrary input span with a separately supplied analytic gradient.
double finite_difference_check(const std::function<double()>& f, std::span<double> x,
                               std::span<const double> analytic, double h = 1e-5);

}  // namespace selprop
