#include "numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace selprop {

// Denominator floor for the relative error: central differences carry
// ~1e-12 of round-off, which would dominate gradients that are exactly zero.
constexpr double kFdFloor = 1e-6;

namespace {

std::string span_shape(std::size_t n) { return "(" + std::to_string(n) + ")"; }

[[noreturn]] void shape_mismatch(const std::string& op, const std::string& lhs, const std::string& rhs) {
    throw ShapeError(op + ": shape mismatch " + lhs + " vs " + rhs);
}

void check_len(const std::string& op, std::size_t a, std::size_t b) {
    if (a != b) shape_mismatch(op, span_shape(a), span_shape(b));
}

}  // namespace

std::string Tensor::shape_string() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void require_finite(std::span<const double> v, const std::string& what) {
    if (!all_finite(v)) throw NumericError(what + ": non-finite value");
}

double dot(std::span<const double> a, std::span<const double> b) {
    check_len("dot", a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vector matvec(const Tensor& w, std::span<const double> x) {
    if (w.cols() != x.size()) shape_mismatch("matvec", w.shape_string(), span_shape(x.size()));
    Vector y(w.rows(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
        auto row = w.row(r);
        double s = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * x[c];
        y[r] = s;
    }
    return y;
}

void matvec_backward(const Tensor& w, std::span<const double> x, std::span<const double> g_y,
                     Tensor* g_w, std::span<double> g_x) {
    if (w.cols() != x.size()) shape_mismatch("matvec_backward", w.shape_string(), span_shape(x.size()));
    check_len("matvec_backward", w.rows(), g_y.size());
    if (g_w) {
        if (!g_w->same_shape(w)) shape_mismatch("matvec_backward", w.shape_string(), g_w->shape_string());
        for (std::size_t r = 0; r < w.rows(); ++r) {
            if (g_y[r] == 0.0) continue;
            auto gr = g_w->row(r);
            for (std::size_t c = 0; c < x.size(); ++c) gr[c] += g_y[r] * x[c];
        }
    }
    if (!g_x.empty()) {
        check_len("matvec_backward", g_x.size(), x.size());
        for (std::size_t r = 0; r < w.rows(); ++r) {
            if (g_y[r] == 0.0) continue;
            auto row = w.row(r);
            for (std::size_t c = 0; c < x.size(); ++c) g_x[c] += g_y[r] * row[c];
        }
    }
}

Vector vecmat(std::span<const double> x, const Tensor& w) {
    if (w.rows() != x.size()) shape_mismatch("vecmat", span_shape(x.size()), w.shape_string());
    Vector y(w.cols(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
        if (x[r] == 0.0) continue;
        auto row = w.row(r);
        for (std::size_t c = 0; c < y.size(); ++c) y[c] += x[r] * row[c];
    }
    return y;
}

void vecmat_backward(const Tensor& w, std::span<const double> x, std::span<const double> g_y,
                     Tensor* g_w, std::span<double> g_x) {
    if (w.rows() != x.size()) shape_mismatch("vecmat_backward", span_shape(x.size()), w.shape_string());
    check_len("vecmat_backward", w.cols(), g_y.size());
    if (g_w) {
        if (!g_w->same_shape(w)) shape_mismatch("vecmat_backward", w.shape_string(), g_w->shape_string());
        for (std::size_t r = 0; r < w.rows(); ++r) {
            if (x[r] == 0.0) continue;
            auto gr = g_w->row(r);
            for (std::size_t c = 0; c < g_y.size(); ++c) gr[c] += x[r] * g_y[c];
        }
    }
    if (!g_x.empty()) {
        check_len("vecmat_backward", g_x.size(), x.size());
        for (std::size_t r = 0; r < w.rows(); ++r) g_x[r] += dot(w.row(r), g_y);
    }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) shape_mismatch("matmul", a.shape_string(), b.shape_string());
    Tensor c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

void matmul_backward(const Tensor& a, const Tensor& b, const Tensor& g_c, Tensor* g_a, Tensor* g_b) {
    if (a.cols() != b.rows()) shape_mismatch("matmul_backward", a.shape_string(), b.shape_string());
    if (g_c.rows() != a.rows() || g_c.cols() != b.cols())
        shape_mismatch("matmul_backward", "(" + std::to_string(a.rows()) + "x" + std::to_string(b.cols()) + ")",
                       g_c.shape_string());
    if (g_a) {
        if (!g_a->same_shape(a)) shape_mismatch("matmul_backward", a.shape_string(), g_a->shape_string());
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t k = 0; k < a.cols(); ++k) {
                double s = 0.0;
                for (std::size_t j = 0; j < b.cols(); ++j) s += g_c(i, j) * b(k, j);
                (*g_a)(i, k) += s;
            }
    }
    if (g_b) {
        if (!g_b->same_shape(b)) shape_mismatch("matmul_backward", b.shape_string(), g_b->shape_string());
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t k = 0; k < a.cols(); ++k) {
                double aik = a(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols(); ++j) (*g_b)(k, j) += aik * g_c(i, j);
            }
    }
}

Vector concat(std::span<const double> a, std::span<const double> b) {
    Vector y;
    y.reserve(a.size() + b.size());
    y.insert(y.end(), a.begin(), a.end());
    y.insert(y.end(), b.begin(), b.end());
    return y;
}

void concat_backward(std::span<const double> g_y, std::span<double> g_a, std::span<double> g_b) {
    check_len("concat_backward", g_y.size(), g_a.size() + g_b.size());
    for (std::size_t i = 0; i < g_a.size(); ++i) g_a[i] += g_y[i];
    for (std::size_t i = 0; i < g_b.size(); ++i) g_b[i] += g_y[g_a.size() + i];
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

Vector relu(std::span<const double> x) {
    Vector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = relu(x[i]);
    return y;
}

void relu_backward(std::span<const double> pre, std::span<const double> g_y, std::span<double> g_x) {
    check_len("relu_backward", pre.size(), g_y.size());
    check_len("relu_backward", pre.size(), g_x.size());
    for (std::size_t i = 0; i < pre.size(); ++i)
        if (pre[i] > 0.0) g_x[i] += g_y[i];
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

Vector sigmoid(std::span<const double> x) {
    Vector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
    return y;
}

void sigmoid_backward(std::span<const double> y, std::span<const double> g_y, std::span<double> g_x) {
    check_len("sigmoid_backward", y.size(), g_y.size());
    check_len("sigmoid_backward", y.size(), g_x.size());
    for (std::size_t i = 0; i < y.size(); ++i) g_x[i] += g_y[i] * y[i] * (1.0 - y[i]);
}

Vector softmax(std::span<const double> x) {
    if (x.empty()) throw ShapeError("softmax: empty input");
    double mx = *std::max_element(x.begin(), x.end());
    Vector y(x.size());
    double z = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = std::exp(x[i] - mx);
        z += y[i];
    }
    for (auto& v : y) v /= z;
    return y;
}

void softmax_backward(std::span<const double> y, std::span<const double> g_y, std::span<double> g_x) {
    check_len("softmax_backward", y.size(), g_y.size());
    check_len("softmax_backward", y.size(), g_x.size());
    double inner = dot(y, g_y);
    for (std::size_t i = 0; i < y.size(); ++i) g_x[i] += y[i] * (g_y[i] - inner);
}

Vector scale(std::span<const double> x, double s) {
    Vector y(x.begin(), x.end());
    for (auto& v : y) v *= s;
    return y;
}

double scale_backward(std::span<const double> x, double s, std::span<const double> g_y, std::span<double> g_x) {
    check_len("scale_backward", x.size(), g_y.size());
    if (!g_x.empty()) {
        check_len("scale_backward", x.size(), g_x.size());
        for (std::size_t i = 0; i < x.size(); ++i) g_x[i] += s * g_y[i];
    }
    return dot(x, g_y);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    check_len("cosine_similarity", a.size(), b.size());
    const double aa = dot(a, a);
    const double bb = dot(b, b);
    if (aa == 0.0 || bb == 0.0) return 0.0;
    // sqrt(aa * bb) keeps cos(v, v) == 1 exactly; fall back when the product leaves the normal range
    const double prod = aa * bb;
    if (std::isnormal(prod)) return dot(a, b) / std::sqrt(prod);
    return dot(a, b) / (std::sqrt(aa) * std::sqrt(bb));
}

void cosine_backward(std::span<const double> a, std::span<const double> b, double g,
                     std::span<double> g_a, std::span<double> g_b) {
    check_len("cosine_backward", a.size(), b.size());
    double na = std::sqrt(dot(a, a));
    double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return;
    double c = dot(a, b) / (na * nb);
    // d cos / d a = b / (|a||b|) - cos * a / |a|^2
    if (!g_a.empty())
        for (std::size_t i = 0; i < a.size(); ++i) g_a[i] += g * (b[i] / (na * nb) - c * a[i] / (na * na));
    if (!g_b.empty())
        for (std::size_t i = 0; i < b.size(); ++i) g_b[i] += g * (a[i] / (na * nb) - c * b[i] / (nb * nb));
}

SeededRng SeededRng::derive(std::uint64_t seed, std::uint64_t tag) {
    // splitmix64 finalizer over the pair
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return SeededRng(z ^ (z >> 31));
}

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, SeededRng& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : t.values()) v = rng.uniform(-bound, bound);
}

void adam_step(Parameter& p, const AdamConfig& cfg) {
    require_finite(p.grad.values(), "adam_step(" + p.name + ") gradient");
    ++p.step_count;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.step_count));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.step_count));
    auto value = p.value.values();
    auto grad = p.grad.values();
    auto m = p.adam_m.values();
    auto v = p.adam_v.values();
    for (std::size_t i = 0; i < value.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        if (cfg.lr == 0.0) continue;
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        value[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
    p.zero_grad();
}

void clip_grad_norm(Parameter& p, double max_norm) {
    if (max_norm <= 0.0) return;
    double n = std::sqrt(dot(p.grad.values(), p.grad.values()));
    if (n <= max_norm) return;
    for (auto& g : p.grad.values()) g *= max_norm / n;
}

double finite_difference_check(const std::function<double()>& f, std::span<double> x,
                               std::span<const double> analytic, double h) {
    check_len("finite_difference_check", x.size(), analytic.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double fp = f();
        x[i] = saved - h;
        const double fm = f();
        x[i] = saved;
        const double numeric = (fp - fm) / (2.0 * h);
        const double a = analytic[i];
        const double err = std::abs(a - numeric) / std::max(kFdFloor, std::abs(a) + std::abs(numeric));
        worst = std::max(worst, err);
    }
    return worst;
}

double finite_difference_check(const std::function<double()>& f, Parameter& p, double h) {
    Tensor analytic = p.grad;
    return finite_difference_check(f, p.value.values(), analytic.values(), h);
}

}  // namespace selprop
