#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "follmer/calculus.hpp"
#include "follmer/itofollmer.hpp"
#include "follmer/partitions.hpp"
#include "follmer/quadvar.hpp"
#include "follmer/scenario.hpp"
#include "follmer/stieltjes.hpp"
#include "support.hpp"

using namespace follmer;
using namespace follmer::testing;

namespace {

const NormedSpace R1 = NormedSpace::l2(1);
const NormedSpace R2 = NormedSpace::l2(2);

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

BilinearMap random_tensor(std::mt19937_64& rng, const NormedSpace& l, const NormedSpace& r, const NormedSpace& g) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> c(l.dim() * r.dim() * g.dim());
    for (auto& v : c) v = n(rng);
    return BilinearMap::tensor(l, r, g, c);
}

std::vector<double> sample_times(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> ts{0.5, 1.0};
    for (int i = 0; i < 4; ++i) ts.push_back(u(rng));
    return ts;
}

Outcome quadratic_exactness() {
    std::mt19937_64 rng(1);
    const std::vector<CadlagPath> paths{
        scaled_walk(1024, 1.0, 42),
        pair(scaled_walk(256, 1.0, 3), scaled_walk(256, 1.0, 4)),
        CadlagPath::pure_jump(Vector(R2), 1.0, {Jump{0.3, Vector(R2, {0.3, 0.4})}, Jump{0.7, Vector(R2, {1.2, -1.6})}}),
        random_path(rng, R2, 1.0, 9, 4),
        scaled_walk(512, 1.0, 7) + random_path(rng, R1, 1.0, 6, 2)};
    double worst = 0.0;
    for (const auto& x : paths) {
        const auto a = CadlagPath::constant(Vector(R1), 1.0);
        ItoScenario sc{"quadratic", a, x, make_fixture("quadratic", 1, x.dim()), BilinearMap::inner(x.space(), x.space()),
                       PartitionSequence::dyadic(1.0), {0.25, 0.5, 1.0}, 12};
        sc.run_monitors = false;
        const auto rep = ito_verify(sc);
        if (!rep.testable) return {false, "quadratic fixture untestable"};
        for (const auto& pt : rep.points)
            for (double r : pt.residual) worst = std::max(worst, r);
    }
    return {worst <= 1e-12, "max residual " + fmt(worst) + " over 5 paths, 3 breakpoints, n <= 12"};
}

Outcome fv_quadratic_variation() {
    const auto x =
        CadlagPath::pure_jump(Vector(R2), 1.0, {Jump{0.3, Vector(R2, {0.3, 0.4})}, Jump{0.7, Vector(R2, {1.2, -1.6})}});
    const std::vector<double> expected{0.09 + 1.44, 0.12 - 1.92, 0.12 - 1.92, 0.16 + 2.56};
    int used = 0;
    double worst = 0.0;
    for (const auto& seq : {PartitionSequence::dyadic(1.0), PartitionSequence::uniform(1.0, 3, 2),
                            PartitionSequence::uniform(1.0, 5, 3), PartitionSequence::oscillation_controlled(x, 1.0)}) {
        if (!condition_C_diagnostic(seq, x, 1.0, default_eps_grid(x), 12).passes()) continue;
        ++used;
        const auto s = scalar_qv(x, seq, {1.0}, 12);
        worst = std::max(worst, std::abs(s.limit_at(1.0).value[0] - 4.25));
        const auto q = qv_limit(QVRequest{x, x, BilinearMap::outer(R2, R2), seq, {1.0}});
        for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(q.limit_at(1.0).value[k] - expected[k]));
    }
    return {used >= 3 && worst <= 1e-10,
            std::to_string(used) + " Condition (C) sequences, max error " + fmt(worst)};
}

Outcome example_classification() {
    struct Case {
        const char* name;
        CadlagPath x;
        PartitionSequence seq;
        bool controls, mesh_to_zero, condition_c;
    };
    const std::vector<Case> cases{
        {"irrational jump, dyadic", scalar_step(1.0 / std::sqrt(2.0), 1.0, 2.0), PartitionSequence::dyadic(2.0), false, true, true},
        {"unit jump, integer", scalar_step(1.0, 1.0, 2.0), PartitionSequence::integer(2.0), true, false, true},
        {"half jump, integer", scalar_step(0.5, 1.0, 2.0), PartitionSequence::integer(2.0), false, false, true}};
    std::string detail;
    bool ok = true;
    for (const auto& c : cases) {
        const auto osc = controls_oscillation(c.seq, c.x, 2.0, 10);
        const bool controls = osc.verdict == Verdict::ConvergingToZero;
        const bool mesh = verdict_of(osc.mesh) == Verdict::ConvergingToZero;
        const bool cc = condition_C_diagnostic(c.seq, c.x, 2.0, default_eps_grid(c.x), 10).passes();
        const bool match = controls == c.controls && mesh == c.mesh_to_zero && cc == c.condition_c;
        ok = ok && match;
        detail += std::string(c.name) + (match ? " ok; " : " MISMATCH; ");
    }
    const auto la = approximates_from_left(PartitionSequence::integer(2.0), scalar_step(0.5, 1.0, 2.0), {0.75, 1.0}, 10);
    bool la_ok = !la.passes;
    for (const auto& tr : la.residuals)
        for (double r : tr) la_ok = la_ok && r == 1.0;
    ok = ok && la_ok;
    return {ok, detail + (la_ok ? "left approximation fails at 1/2 jump" : "left approximation MISMATCH")};
}

Outcome ito_convergence() {
    const auto x = scaled_walk(4096, 1.0, 42, {Jump{0.5, Vector(R1, {0.3})}});
    ItoScenario sc{"exp-coord", CadlagPath::constant(Vector(R1), 1.0), x, make_fixture("exp-coord", 1, 1),
                   BilinearMap::outer(R1, R1), PartitionSequence::dyadic(1.0), {1.0}, 12};
    sc.run_monitors = false;
    const auto rep = ito_verify(sc);
    const auto& r = rep.points[0].residual;
    bool decreasing = true;
    for (std::size_t n = r.size() - 3; n < r.size(); ++n) decreasing = decreasing && r[n] < r[n - 1];
    std::string tail;
    for (std::size_t n = r.size() - 4; n < r.size(); ++n) tail += fmt(r[n]) + (n + 1 < r.size() ? " " : "");
    return {decreasing && r.back() <= 1e-2, "levels 9..12 residuals " + tail};
}

Outcome weighted_qv() {
    const auto x = scaled_walk(1024, 1.0, 11, {Jump{0.4, Vector(R1, {0.5})}});
    const auto b = BilinearMap::inner(R1, R1);
    const auto ls = LinearMap::space_of(R1, R1);
    const auto xi = CadlagPath::pure_jump(Vector(ls, {2.0}), 1.0,
                                          {Jump{0.25, Vector(ls, {-3.0})}, Jump{0.75, Vector(ls, {1.5})}});
    const auto seq = PartitionSequence::dyadic(1.0);
    const auto step = weighted_qv_vs_integral(xi, R1, x, b, seq, 1.0, 12, {0.25, 0.75, 1.0});
    const auto pi = seq.at(12);
    const double q25 = discrete_scalar_qv(x, pi, 0.25), q75 = discrete_scalar_qv(x, pi, 0.75);
    const double q1 = discrete_scalar_qv(x, pi, 1.0);
    const double closed = 2.0 * q25 - (q75 - q25) + 0.5 * (q1 - q75);
    const double err = std::max(std::abs(step.rhs[0] - closed), std::abs(step.lhs.back()[0] - closed));

    const auto clock = CadlagPath(R1, 1.0, {0.0, 1.0}, {Vector(R1, {0.0}), Vector(R1, {1.0})});
    const auto smooth_xi =
        PathFunction(clock).compose(ls, [](const Vector& s) { return Vector(s.space(), {std::cos(2.0 * s[0])}); });
    const auto sm = weighted_qv_vs_integral(smooth_xi, R1, scaled_walk(1024, 1.0, 13), b, seq, 1.0, 16, {}, {}, {}, false);
    const bool stall_ok = sm.verdict == Verdict::ConvergingToZero;
    return {err <= 1e-9 && stall_ok,
            "step closed-form error " + fmt(err) + ", smooth residual " + fmt(sm.residual.back()) +
                (stall_ok ? " converging" : " stalled")};
}

Outcome integration_by_parts_check() {
    std::mt19937_64 rng(5);
    const auto seq = PartitionSequence::dyadic(1.0);
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
        const auto a = random_path(rng, R2, 1.0, 5, 2);
        const auto x = pair(scaled_walk(256, 1.0, 3 + k), scaled_walk(256, 1.0, 40 + k));
        for (const auto& p : integration_by_parts(a, x, seq, {0.25, 0.5, 1.0}, 12))
            for (double r : p.residual) worst = std::max(worst, r);
    }
    // Lipschitz A and X: |A| <= 3, |X| <= 1, Lip(A) = 2, Lip(X) = 4
    const auto al = scalar_linear({0.0, 1.0}, {1.0, 3.0}, 1.0);
    const auto xl = scalar_linear({0.0, 0.5, 1.0}, {0.0, -1.0, 1.0}, 1.0);
    bool bounded = true;
    double ratio = 0.0;
    for (const auto& p : integration_by_parts(al, xl, seq, {0.3, 0.777, 1.0 / 3.0}, 12, QVConvention::IndicatorLeft))
        for (std::size_t n = 0; n < p.residual.size(); ++n) {
            const double bound = 2.0 * p.mesh[n] * (2.0 * 1.0 + 3.0 * 4.0);
            bounded = bounded && p.residual[n] <= bound;
            ratio = std::max(ratio, p.residual[n] / bound);
        }
    return {worst <= 1e-12 && bounded,
            "breakpoint max residual " + fmt(worst) + ", generic residual/bound max " + fmt(ratio)};
}

Outcome algebraic_laws() {
    std::mt19937_64 rng(17);
    const auto seq = PartitionSequence::dyadic(1.0);
    const auto g = NormedSpace::l2(2);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const auto x1 = random_path(rng, R2, 1.0, 6, 3), x2 = random_path(rng, R2, 1.0, 4, 2);
        const auto y1 = random_path(rng, NormedSpace::l1(3), 1.0, 5, 3);
        const auto y2 = random_path(rng, NormedSpace::l1(3), 1.0, 7, 1);
        for (double r : qv_bilinearity_check(x1, x2, y1, y2, random_tensor(rng, R2, y1.space(), g), seq,
                                             sample_times(rng), 8))
            worst = std::max(worst, r);

        const auto e1 = R1;
        const auto u1 = random_path(rng, e1, 1.0, 5, 2), u2 = random_path(rng, R2, 1.0, 6, 2);
        const auto v1 = random_path(rng, e1, 1.0, 4, 3), v2 = random_path(rng, R2, 1.0, 3, 1);
        const auto blk = qv_block_matrix(u1, u2, v1, v2, random_tensor(rng, e1, e1, g), random_tensor(rng, e1, R2, g),
                                         random_tensor(rng, R2, e1, g), random_tensor(rng, R2, R2, g), seq,
                                         sample_times(rng), 8);
        for (double r : blk.residual) worst = std::max(worst, r);

        const auto y = random_path(rng, NormedSpace::linf(3), 1.0, 6, 2);
        const auto bt = random_tensor(rng, R2, y.space(), NormedSpace::l1(2));
        const auto walk = pair(scaled_walk(64, 1.0, 100 + k), scaled_walk(64, 1.0, 200 + k));
        const auto fv = random_path(rng, R2, 1.0, 4, 3);
        const auto outer = BilinearMap::outer(R2, R2);
        for (int n = 0; n <= 8; ++n) {
            const auto pi = seq.at(n);
            for (double t : sample_times(rng)) {
                worst = std::max(worst, max_abs_diff(discrete_qv(x1, y, bt, pi, t), discrete_qv(y, x1, bt.transpose(), pi, t)));
                const auto sum = walk + fv;
                const Vector lhs = discrete_qv(sum, sum, outer, pi, t);
                const Vector rhs = discrete_qv(walk, walk, outer, pi, t) + discrete_qv(walk, fv, outer, pi, t) +
                                   discrete_qv(fv, walk, outer, pi, t) + discrete_qv(fv, fv, outer, pi, t);
                worst = std::max(worst, max_abs_diff(lhs, rhs));
            }
        }
    }
    return {worst <= 1e-12, "20 fixtures x 4 laws, max residual " + fmt(worst)};
}

Outcome crossnorm_sandwich_check() {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> dim(1, 5);
    int violations = 0;
    double rank_one = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t r = dim(rng), c = dim(rng);
        const auto s = NormedSpace::frobenius(r, c);
        const auto t = crossnorm_sandwich(random_vector(rng, s));
        const double tol = 1e-10 * (1.0 + t.projective);
        if (t.injective > t.frobenius + tol || t.frobenius > t.projective + tol) ++violations;

        const Vector u = random_vector(rng, NormedSpace::l2(r)), v = random_vector(rng, NormedSpace::l2(c));
        std::vector<double> m(r * c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) m[i * c + j] = u[i] * v[j];
        const auto o = crossnorm_sandwich(Vector(s, m));
        const double uv = u.norm() * v.norm();
        rank_one = std::max({rank_one, std::abs(o.injective - uv) / (1.0 + uv), std::abs(o.frobenius - uv) / (1.0 + uv),
                             std::abs(o.projective - uv) / (1.0 + uv)});
    }
    return {violations == 0 && rank_one <= 1e-10,
            std::to_string(violations) + " ordering violations in 1000, rank-one spread " + fmt(rank_one)};
}

Outcome taylor_suite() {
    std::mt19937_64 rng(3);
    double fd_slope = INFINITY, taylor_margin = INFINITY, agreement = 0.0;
    bool fd_pass = true, converged = true;
    int empty_windows = 0;
    std::vector<double> window;
    for (int k = 4; k <= 16; ++k) window.push_back(std::ldexp(1.0, -k));
    for (const auto& id : fixture_ids()) {
        const auto f = make_fixture(id, 2, 2);
        for (int k = 0; k < 10; ++k) {
            const Vector a = random_vector(rng, f.domain_a, 0.5), x = random_vector(rng, f.domain_x, 0.5);
            const auto fd = fd_check_gradient(f, a, x, random_vector(rng, f.domain_a), random_vector(rng, f.domain_x));
            fd_pass = fd_pass && fd.passes;
            if (!fd.exact) fd_slope = std::min(fd_slope, fd.slope);
            const Vector u = random_vector(rng, f.domain_x, 0.5);
            for (int n : {1, 2}) {
                const auto t = taylor_remainder(f, a, x, u, n);
                converged = converged && t.quadrature_converged;
                agreement = std::max(agreement, t.agreement);
                const double slope = taylor_order_slope(f, a, x, u, n, window);
                const Vector lead = n == 1 ? f.d_x(a, x).apply(u) : 0.5 * f.second(a, x, u, u);
                if (std::isfinite(slope))
                    taylor_margin = std::min(taylor_margin, slope - n);
                else if (lead.norm() > 1e-3 * std::pow(u.norm(), n))
                    ++empty_windows;
            }
        }
    }
    return {fd_pass && fd_slope >= 1.9 && taylor_margin >= -0.05 && empty_windows == 0 && converged &&
                agreement <= 1e-10,
            "min fd slope " + fmt(fd_slope) + ", min Taylor slope - n " + fmt(taylor_margin) + ", " +
                std::to_string(empty_windows) + " empty windows, max agreement " + fmt(agreement)};
}

Outcome stieltjes_correctness() {
    const auto id = scalar_linear({0.0, 1.0}, {0.0, 1.0}, 1.0);
    const auto inner = BilinearMap::inner(R1, R1);
    const double sds = integrate_left(FVMeasure(id), id, inner, 0.0, 1.0)[0];
    bool ok = std::abs(sds - 0.5) <= 1e-10;

    // step integrands with dyadic jump times against random FV integrators
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> slot(1, 63);
    double worst = 0.0;
    int monitored = 0;
    const auto b = BilinearMap::inner(R2, R2);
    for (int k = 0; k < 20; ++k) {
        const auto x = random_path(rng, R2, 1.0, 6, 3);
        std::vector<Jump> js;
        for (int i = 0; i < 4; ++i) js.push_back(Jump{slot(rng) / 64.0, random_vector(rng, R2)});
        const auto h = CadlagPath::pure_jump(random_vector(rng, R2), 1.0, js);
        const auto r = if_integral(h, x, b, PartitionSequence::dyadic(1.0), 1.0, 12);
        if (!r.monitor.passes) continue;
        ++monitored;
        worst = std::max(worst, std::abs(r.estimate.value[0] - integrate_left(FVMeasure(x), h, b, 0.0, 1.0)[0]));
    }
    ok = ok && monitored == 20 && worst <= 1e-9;

    int violations = 0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<NormedSpace> spaces{R2, NormedSpace::l1(2), NormedSpace::linf(3)};
    for (int k = 0; k < 1000; ++k) {
        const auto& s = spaces[k % spaces.size()];
        const auto f = random_path(rng, s, 1.0, 3 + k % 4, k % 3);
        const auto g = random_path(rng, s, 1.0, 2 + k % 5, k % 2);
        const auto bl = k % 2 ? BilinearMap::outer(s, s, NormKind::Nuclear) : BilinearMap::inner(s, s);
        double a = u(rng), c = u(rng);
        if (a > c) std::swap(a, c);
        const FVMeasure m(f);
        if (integrate_left(m, g, bl, a, c).norm() > dominated_bound(m, g, bl, a, c) * (1 + 1e-12) + 1e-15) ++violations;
    }
    ok = ok && violations == 0;
    return {ok, "int s ds = " + fmt(sds) + ", IF vs Stieltjes max " + fmt(worst) + " on " + std::to_string(monitored) +
                    " monitored fixtures, " + std::to_string(violations) + " bound violations in 1000"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"quadratic exactness", quadratic_exactness},
        {"FV quadratic variation", fv_quadratic_variation},
        {"example classification", example_classification},
        {"Ito formula convergence", ito_convergence},
        {"weighted QV integral", weighted_qv},
        {"integration by parts", integration_by_parts_check},
        {"algebraic QV laws", algebraic_laws},
        {"crossnorm sandwich", crossnorm_sandwich_check},
        {"Taylor and derivative suite", taylor_suite},
        {"Stieltjes correctness", stieltjes_correctness}};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
