#include "follmer/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "follmer/error.hpp"

namespace follmer {

namespace {

GaussLegendre compute_rule(std::size_t n) {
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute the derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = pk;
        }
        dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(std::size_t n) {
    require(n >= 2, "gauss_legendre: at least two points required");
    static std::mutex mutex;
    static std::map<std::size_t, GaussLegendre> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

std::vector<double> integrate_fixed(const VectorIntegrand& f, std::size_t dim, double a, double b,
                                    std::size_t points) {
    const auto& rule = gauss_legendre(points);
    std::vector<double> out(dim, 0.0), buf(dim);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        f(mid + half * rule.nodes[i], buf);
        for (std::size_t k = 0; k < dim; ++k) out[k] += rule.weights[i] * buf[k];
    }
    for (double& v : out) v *= half;
    return out;
}

namespace {

void adaptive_step(const VectorIntegrand& f, std::size_t dim, double a, double b, const std::vector<double>& whole,
                   double abs_tol, double rel_tol, int depth, std::vector<double>& acc) {
    const double m = 0.5 * (a + b);
    auto left = integrate_fixed(f, dim, a, m, 10);
    auto right = integrate_fixed(f, dim, m, b, 10);
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double both = left[k] + right[k];
        err = std::max(err, std::abs(both - whole[k]));
        scale = std::max(scale, std::abs(both));
    }
    if (err <= abs_tol + rel_tol * scale || depth <= 0 || !(m > a && m < b)) {
        for (std::size_t k = 0; k < dim; ++k) acc[k] += left[k] + right[k];
        return;
    }
    adaptive_step(f, dim, a, m, left, 0.5 * abs_tol, rel_tol, depth - 1, acc);
    adaptive_step(f, dim, m, b, right, 0.5 * abs_tol, rel_tol, depth - 1, acc);
}

}  // namespace

std::vector<double> integrate_adaptive(const VectorIntegrand& f, std::size_t dim, double a, double b,
                                       double abs_tol, double rel_tol, int max_depth) {
    std::vector<double> acc(dim, 0.0);
    if (!(b > a)) return acc;
    const auto whole = integrate_fixed(f, dim, a, b, 10);
    adaptive_step(f, dim, a, b, whole, abs_tol, rel_tol, max_depth, acc);
    for (double v : acc) require(std::isfinite(v), "integrate_adaptive: non-finite integrand");
    return acc;
}

double integrate_adaptive_scalar(const std::function<double(double)>& f, double a, double b, double abs_tol,
                                 double rel_tol, int max_depth) {
    VectorIntegrand g = [&f](double s, std::vector<double>& out) { out[0] = f(s); };
    return integrate_adaptive(g, 1, a, b, abs_tol, rel_tol, max_depth)[0];
}

}  // namespace follmer
