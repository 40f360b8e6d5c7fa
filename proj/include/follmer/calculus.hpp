#pragma once

#include <functional>
#include <string>
#include <vector>

#include "follmer/spaces.hpp"

namespace follmer {

/// f: F x E -> G with analytic partial derivatives. The second x-derivative
/// is a linear map E (x) E -> G acting on the row-major flattening of u v^T.
struct SmoothFunction {
    std::string id;
    NormedSpace domain_a;
    NormedSpace domain_x;
    NormedSpace codomain;
    std::function<Vector(const Vector&, const Vector&)> eval;
    std::function<LinearMap(const Vector&, const Vector&)> d_a;
    std::function<LinearMap(const Vector&, const Vector&)> d_x;
    std::function<LinearMap(const Vector&, const Vector&)> d2_x;

    /// D_x^2 f(a, x)(u, v).
    Vector second(const Vector& a, const Vector& x, const Vector& u, const Vector& v) const;
};

/// Registered fixtures: "quadratic" <x,x>, "exp-coord" exp(x_1),
/// "bilinear-pairing" <a,x>, "softnorm" sqrt(1 + |x|^2), "sin-square"
/// sin(x_1) + x_2^2, "coord-square" x_1^2, "exp-mixed" exp(x_1) cos(a_1),
/// "outer-product" a x^T. All factor spaces are L2.
SmoothFunction make_fixture(const std::string& id, std::size_t dim_a, std::size_t dim_x);
std::vector<std::string> fixture_ids();

struct FdReport {
    std::vector<double> h;
    std::vector<double> errors;
    double slope;       // log-log least squares over points above the rounding floor; NaN if fewer than 3
    double max_error;
    double finest_error;
    bool exact;         // every error at the rounding floor
    bool passes;
};

/// Central differences of the joint directional derivative
/// D_a f h_a + D_x f h_x against the analytic value.
FdReport fd_check_gradient(const SmoothFunction& f, const Vector& a, const Vector& x, const Vector& ha,
                           const Vector& hx, std::vector<double> h_grid = {}, double fd_tol = 1e-6);

struct TaylorRemainder {
    Vector remainder;      // f(x+u) - sum_{k<n} D^k f(x) u^k / k!
    Vector integral_form;  // ∫_0^1 (1-θ)^{n-1}/(n-1)! D^n f(x+θu) u^n dθ, 32-point Gauss-Legendre
    double agreement;
    bool quadrature_converged;  // 32- and 48-point rules agree to quad_tol
    bool agrees;
};

TaylorRemainder taylor_remainder(const SmoothFunction& f, const Vector& a, const Vector& x, const Vector& u,
                                 int order, double quad_tol = 1e-10);

/// Log-log slope of |remainder(s u)| against s (order 1 or 2). Only scales in
/// the asymptotic window count: above the rounding floor and within 5% of the
/// leading term s^n D^n f(u, .., u) / n!. NaN if fewer than two remain, which
/// happens when the leading term vanishes or does not match the remainder.
double taylor_order_slope(const SmoothFunction& f, const Vector& a, const Vector& x, const Vector& u, int order,
                          const std::vector<double>& scales);

/// (h_a, h_x) -> D_a f h_a + D_x f h_x on F ⊕ E with the direct-sum norm.
LinearMap assemble_joint_derivative(const SmoothFunction& f, const Vector& a, const Vector& x);

/// Factors second derivatives through B: finds T with T B(u, v) = D(u, v).
/// The pseudo-inverse of B's tensor matrix is computed once.
class SecondDerivativeCompressor {
public:
    explicit SecondDerivativeCompressor(const BilinearMap& b, double tol = 1e-10);

    const BilinearMap& map() const { return b_; }
    /// Throws FactorizationError when no such T exists.
    LinearMap compress(const LinearMap& d2) const;

private:
    BilinearMap b_;
    std::vector<double> m_;     // E1 x (dim * dim)
    std::vector<double> pinv_;  // (dim * dim) x E1
    double tol_;
};

LinearMap compress_second_derivative(const SmoothFunction& f, const Vector& a, const Vector& x, const BilinearMap& b);

}  // namespace follmer
