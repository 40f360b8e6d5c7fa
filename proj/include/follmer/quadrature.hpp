#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace follmer {

struct GaussLegendre {
    std::vector<double> nodes;    // on [-1, 1], ascending
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule computed by Newton iteration on P_n.
const GaussLegendre& gauss_legendre(std::size_t n);

using VectorIntegrand = std::function<void(double, std::vector<double>&)>;

/// Fixed-rule integral of a vector-valued function over [a, b].
std::vector<double> integrate_fixed(const VectorIntegrand& f, std::size_t dim, double a, double b,
                                    std::size_t points);

/// Adaptive bisection with a 10-point Gauss-Legendre rule; panels are accepted
/// when the two-half estimate agrees with the whole-panel estimate to
/// `abs_tol + rel_tol |estimate|` (sup norm over coordinates).
std::vector<double> integrate_adaptive(const VectorIntegrand& f, std::size_t dim, double a, double b,
                                       double abs_tol = 1e-13, double rel_tol = 1e-13, int max_depth = 30);

double integrate_adaptive_scalar(const std::function<double(double)>& f, double a, double b,
                                 double abs_tol = 1e-13, double rel_tol = 1e-13, int max_depth = 30);

}  // namespace follmer
