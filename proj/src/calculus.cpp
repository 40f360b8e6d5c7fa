#include "follmer/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "follmer/error.hpp"
#include "follmer/quadrature.hpp"

namespace follmer {

Vector SmoothFunction::second(const Vector& a, const Vector& x, const Vector& u, const Vector& v) const {
    const std::size_t d = domain_x.dim();
    std::vector<double> uv(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) uv[i * d + j] = u[i] * v[j];
    return d2_x(a, x).apply(Vector(NormedSpace::l2(d * d), std::move(uv)));
}

namespace {

NormedSpace scalar() { return NormedSpace::l2(1); }

LinearMap zeros(const NormedSpace& dom, const NormedSpace& cod) { return LinearMap(dom, cod); }

NormedSpace square_space(std::size_t d) { return NormedSpace::l2(d * d); }

}  // namespace

SmoothFunction make_fixture(const std::string& id, std::size_t dim_a, std::size_t dim_x) {
    require(dim_a >= 1 && dim_x >= 1, "make_fixture: dimensions must be positive");
    const auto F = NormedSpace::l2(dim_a);
    const auto E = NormedSpace::l2(dim_x);
    const auto R = scalar();
    const std::size_t d = dim_x;
    SmoothFunction f{id, F, E, R, {}, {}, {}, {}};
    f.d_a = [F, R](const Vector&, const Vector&) { return zeros(F, R); };

    if (id == "quadratic") {
        f.eval = [R](const Vector&, const Vector& x) {
            double s = 0.0;
            for (double c : x.coords()) s += c * c;
            return Vector(R, {s});
        };
        f.d_x = [E, R](const Vector&, const Vector& x) {
            LinearMap m(E, R);
            for (std::size_t i = 0; i < x.dim(); ++i) m.at(0, i) = 2.0 * x[i];
            return m;
        };
        f.d2_x = [d, R](const Vector&, const Vector&) {
            LinearMap m(square_space(d), R);
            for (std::size_t i = 0; i < d; ++i) m.at(0, i * d + i) = 2.0;
            return m;
        };
    } else if (id == "exp-coord") {
        f.eval = [R](const Vector&, const Vector& x) { return Vector(R, {std::exp(x[0])}); };
        f.d_x = [E, R](const Vector&, const Vector& x) {
            LinearMap m(E, R);
            m.at(0, 0) = std::exp(x[0]);
            return m;
        };
        f.d2_x = [d, R](const Vector&, const Vector& x) {
            LinearMap m(square_space(d), R);
            m.at(0, 0) = std::exp(x[0]);
            return m;
        };
    } else if (id == "bilinear-pairing") {
        require(dim_a == dim_x, "make_fixture: bilinear-pairing needs equal dimensions");
        f.eval = [R](const Vector& a, const Vector& x) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.dim(); ++i) s += a[i] * x[i];
            return Vector(R, {s});
        };
        f.d_a = [F, R](const Vector&, const Vector& x) {
            LinearMap m(F, R);
            for (std::size_t i = 0; i < x.dim(); ++i) m.at(0, i) = x[i];
            return m;
        };
        f.d_x = [E, R](const Vector& a, const Vector&) {
            LinearMap m(E, R);
            for (std::size_t i = 0; i < a.dim(); ++i) m.at(0, i) = a[i];
            return m;
        };
        f.d2_x = [d, R](const Vector&, const Vector&) { return zeros(square_space(d), R); };
    } else if (id == "softnorm") {
        auto s_of = [](const Vector& x) {
            double s = 1.0;
            for (double c : x.coords()) s += c * c;
            return std::sqrt(s);
        };
        f.eval = [R, s_of](const Vector&, const Vector& x) { return Vector(R, {s_of(x)}); };
        f.d_x = [E, R, s_of](const Vector&, const Vector& x) {
            LinearMap m(E, R);
            const double s = s_of(x);
            for (std::size_t i = 0; i < x.dim(); ++i) m.at(0, i) = x[i] / s;
            return m;
        };
        f.d2_x = [d, R, s_of](const Vector&, const Vector& x) {
            LinearMap m(square_space(d), R);
            const double s = s_of(x);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    m.at(0, i * d + j) = (i == j ? 1.0 / s : 0.0) - x[i] * x[j] / (s * s * s);
            return m;
        };
    } else if (id == "sin-square") {
        require(dim_x >= 2, "make_fixture: sin-square needs dim_x >= 2");
        f.eval = [R](const Vector&, const Vector& x) { return Vector(R, {std::sin(x[0]) + x[1] * x[1]}); };
        f.d_x = [E, R](const Vector&, const Vector& x) {
            LinearMap m(E, R);
            m.at(0, 0) = std::cos(x[0]);
            m.at(0, 1) = 2.0 * x[1];
            return m;
        };
        f.d2_x = [d, R](const Vector&, const Vector& x) {
            LinearMap m(square_space(d), R);
            m.at(0, 0) = -std::sin(x[0]);
            m.at(0, d + 1) = 2.0;
            return m;
        };
    } else if (id == "coord-square") {
        f.eval = [R](const Vector&, const Vector& x) { return Vector(R, {x[0] * x[0]}); };
        f.d_x = [E, R](const Vector&, const Vector& x) {
            LinearMap m(E, R);
            m.at(0, 0) = 2.0 * x[0];
            return m;
        };
        f.d2_x = [d, R](const Vector&, const Vector&) {
            LinearMap m(square_space(d), R);
            m.at(0, 0) = 2.0;
            return m;
        };
    } else if (id == "exp-mixed") {
        f.eval = [R](const Vector& a, const Vector& x) { return Vector(R, {std::exp(x[0]) * std::cos(a[0])}); };
        f.d_a = [F, R](const Vector& a, const Vector& x) {
            LinearMap m(F, R);
            m.at(0, 0) = -std::exp(x[0]) * std::sin(a[0]);
            return m;
        };
        f.d_x = [E, R](const Vector& a, const Vector& x) {
            LinearMap m(E, R);
            m.at(0, 0) = std::exp(x[0]) * std::cos(a[0]);
            return m;
        };
        f.d2_x = [d, R](const Vector& a, const Vector& x) {
            LinearMap m(square_space(d), R);
            m.at(0, 0) = std::exp(x[0]) * std::cos(a[0]);
            return m;
        };
    } else if (id == "outer-product") {
        const auto G = NormedSpace::frobenius(dim_a, dim_x);
        f.codomain = G;
        f.eval = [G](const Vector& a, const Vector& x) {
            std::vector<double> c(a.dim() * x.dim());
            for (std::size_t i = 0; i < a.dim(); ++i)
                for (std::size_t j = 0; j < x.dim(); ++j) c[i * x.dim() + j] = a[i] * x[j];
            return Vector(G, std::move(c));
        };
        f.d_a = [F, G](const Vector&, const Vector& x) {
            LinearMap m(F, G);
            const std::size_t na = F.dim(), nx = x.dim();
            for (std::size_t i = 0; i < na; ++i)
                for (std::size_t j = 0; j < nx; ++j) m.at(i * nx + j, i) = x[j];
            return m;
        };
        f.d_x = [E, G](const Vector& a, const Vector&) {
            LinearMap m(E, G);
            const std::size_t na = a.dim(), nx = E.dim();
            for (std::size_t i = 0; i < na; ++i)
                for (std::size_t j = 0; j < nx; ++j) m.at(i * nx + j, j) = a[i];
            return m;
        };
        f.d2_x = [d, G](const Vector&, const Vector&) { return zeros(square_space(d), G); };
    } else {
        throw ContractError("make_fixture: unknown function id '" + id + "'");
    }
    return f;
}

std::vector<std::string> fixture_ids() {
    return {"quadratic", "exp-coord", "bilinear-pairing", "softnorm", "sin-square", "coord-square", "exp-mixed",
            "outer-product"};
}

// ---------------------------------------------------------------------------

namespace {

double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

FdReport fd_check_gradient(const SmoothFunction& f, const Vector& a, const Vector& x, const Vector& ha,
                           const Vector& hx, std::vector<double> h_grid, double fd_tol) {
    require(a.dim() == f.domain_a.dim() && ha.dim() == a.dim(), "fd_check_gradient: a-direction mismatch");
    require(x.dim() == f.domain_x.dim() && hx.dim() == x.dim(), "fd_check_gradient: x-direction mismatch");
    if (h_grid.empty())
        for (int k = 0; k <= 6; ++k) h_grid.push_back(std::ldexp(1e-2, -k));
    for (std::size_t i = 0; i < h_grid.size(); ++i) {
        require(h_grid[i] > 0.0, "fd_check_gradient: step sizes must be positive");
        if (i > 0) require(h_grid[i] < h_grid[i - 1], "fd_check_gradient: h grid must decrease");
    }
    const Vector analytic = f.d_a(a, x).apply(ha) + f.d_x(a, x).apply(hx);
    const double scale = 1.0 + f.eval(a, x).norm();
    constexpr double eps = std::numeric_limits<double>::epsilon();

    FdReport rep{h_grid, {}, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, false, false};
    std::vector<double> lx, ly;
    for (double h : h_grid) {
        const Vector probe = a + h * ha;
        for (double v : probe.coords()) require(std::isfinite(v), "fd_check_gradient: non-finite point");
        const Vector fp = f.eval(a + h * ha, x + h * hx);
        const Vector fm = f.eval(a - h * ha, x - h * hx);
        const Vector fd = (fp - fm) * (0.5 / h);
        for (double v : fd.coords()) require(std::isfinite(v), "fd_check_gradient: non-finite evaluation");
        const double err = (fd - analytic).norm();
        rep.errors.push_back(err);
        rep.max_error = std::max(rep.max_error, err);
        const double floor = 64.0 * eps * scale / h;
        if (err > 10.0 * floor) {
            lx.push_back(std::log(h));
            ly.push_back(std::log(err));
        }
    }
    rep.finest_error = rep.errors.back();
    rep.exact = lx.size() < 3;
    if (!rep.exact) rep.slope = ls_slope(lx, ly);
    rep.passes = rep.finest_error <= fd_tol && (rep.exact || rep.slope >= 1.9);
    return rep;
}

TaylorRemainder taylor_remainder(const SmoothFunction& f, const Vector& a, const Vector& x, const Vector& u, int order,
                                 double quad_tol) {
    require(order == 1 || order == 2, "taylor_remainder: order must be 1 or 2");
    require(u.dim() == x.dim(), "taylor_remainder: direction has wrong dimension");
    Vector rem = f.eval(a, x + u) - f.eval(a, x);
    if (order == 2) rem -= f.d_x(a, x).apply(u);

    auto integrand = [&](double theta) {
        const Vector p = x + theta * u;
        if (order == 1) return f.d_x(a, p).apply(u);
        return (1.0 - theta) * f.second(a, p, u, u);
    };
    auto rule = [&](std::size_t points) {
        const auto& gl = gauss_legendre(points);
        Vector acc(f.codomain);
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) acc += (0.5 * gl.weights[i]) * integrand(0.5 * (gl.nodes[i] + 1.0));
        return acc;
    };
    const Vector integral = rule(32);
    const double check = (integral - rule(48)).norm();
    const double un = std::pow(u.norm(), order);
    const double agreement = (rem - integral).norm();
    return TaylorRemainder{rem, integral, agreement, check <= quad_tol * (1.0 + un),
                           agreement <= quad_tol * (1.0 + un)};
}

double taylor_order_slope(const SmoothFunction& f, const Vector& a, const Vector& x, const Vector& u, int order,
                          const std::vector<double>& scales) {
    require(scales.size() >= 2, "taylor_order_slope: need at least two scales");
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double kAsymptoticTol = 0.05;
    require(order == 1 || order == 2, "taylor_order_slope: order must be 1 or 2");
    const double fx = f.eval(a, x).norm();
    // leading term of the remainder: D_x f u or D_x^2 f (u, u) / 2
    const Vector lead = order == 1 ? f.d_x(a, x).apply(u) : 0.5 * f.second(a, x, u, u);
    std::vector<double> lx, ly;
    for (double s : scales) {
        const Vector rv = taylor_remainder(f, a, x, s * u, order).remainder;
        const double r = rv.norm();
        const double floor = 64.0 * eps * std::max(fx, f.eval(a, x + s * u).norm());
        if (r <= floor) continue;
        const double sn = std::pow(s, order);
        if ((rv - sn * lead).norm() > kAsymptoticTol * sn * lead.norm()) continue;
        lx.push_back(std::log(s));
        ly.push_back(std::log(r));
    }
    if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return ls_slope(lx, ly);
}

LinearMap assemble_joint_derivative(const SmoothFunction& f, const Vector& a, const Vector& x) {
    const LinearMap da = f.d_a(a, x), dx = f.d_x(a, x);
    const auto dom = NormedSpace::direct_sum({f.domain_a, f.domain_x});
    LinearMap out(dom, f.codomain);
    const std::size_t na = f.domain_a.dim(), nx = f.domain_x.dim();
    for (std::size_t r = 0; r < f.codomain.dim(); ++r) {
        for (std::size_t c = 0; c < na; ++c) out.at(r, c) = da.at(r, c);
        for (std::size_t c = 0; c < nx; ++c) out.at(r, na + c) = dx.at(r, c);
    }
    return out;
}

SecondDerivativeCompressor::SecondDerivativeCompressor(const BilinearMap& b, double tol)
    : b_(b), m_(b.tensor_matrix()), tol_(tol) {
    require(b.domain_left().dim() == b.domain_right().dim(),
            "SecondDerivativeCompressor: B must be defined on E x E");
    const std::size_t d = b.domain_left().dim();
    pinv_ = pseudo_inverse(m_, b.codomain().dim(), d * d);
}

LinearMap SecondDerivativeCompressor::compress(const LinearMap& d2) const {
    const std::size_t d = b_.domain_left().dim(), dd = d * d, e1 = b_.codomain().dim();
    require(d2.domain().dim() == dd, "compress_second_derivative: second derivative has wrong shape");
    const std::size_t g = d2.codomain().dim();
    LinearMap t(b_.codomain(), d2.codomain());
    for (std::size_t r = 0; r < g; ++r)
        for (std::size_t c = 0; c < e1; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < dd; ++k) s += d2.at(r, k) * pinv_[k * e1 + c];
            t.at(r, c) = s;
        }
    double worst = 0.0, scale = 1.0;
    for (std::size_t r = 0; r < g; ++r)
        for (std::size_t k = 0; k < dd; ++k) {
            double s = 0.0;
            for (std::size_t c = 0; c < e1; ++c) s += t.at(r, c) * m_[c * dd + k];
            worst = std::max(worst, std::abs(s - d2.at(r, k)));
            scale = std::max(scale, std::abs(d2.at(r, k)));
        }
    if (worst > tol_ * scale)
        throw FactorizationError("no D_B^2 f exists at this point: second derivative does not factor through B");
    return t;
}

LinearMap compress_second_derivative(const SmoothFunction& f, const Vector& a, const Vector& x, const BilinearMap& b) {
    require(b.domain_left().dim() == f.domain_x.dim(), "compress_second_derivative: B does not act on E x E");
    return SecondDerivativeCompressor(b).compress(f.d2_x(a, x));
}

}  // namespace follmer
