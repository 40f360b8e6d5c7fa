#include "follmer/stieltjes.hpp"

#include <algorithm>
#include <cmath>

#include "follmer/error.hpp"
#include "follmer/quadrature.hpp"
#include "follmer/summation.hpp"

namespace follmer {

FVMeasure::FVMeasure(const CadlagPath& f) : f_(f) {}

Vector FVMeasure::measure_of(double a, double b) const {
    require(a <= b, "measure_of: need a <= b");
    require(a >= 0.0 && b <= f_.horizon(), "measure_of: interval outside the horizon");
    return f_.value(b) - f_.value(a);
}

double FVMeasure::variation(double a, double b) const { return total_variation(f_, a, b); }

FVMeasure FVMeasure::continuous() const { return FVMeasure(jump_decomposition(f_).continuous_part.path()); }

FVMeasure FVMeasure::discontinuous() const { return FVMeasure(jump_decomposition(f_).jump_part.path()); }

namespace {

void check_interval(const FVMeasure& mu, double a, double c) {
    require(std::isfinite(a) && std::isfinite(c), "stieltjes: non-finite interval");
    require(a <= c, "stieltjes: need a <= b");
    require(a >= 0.0 && c <= mu.horizon(), "stieltjes: interval outside the horizon");
}

/// Pieces of [lo, hi] cut at the breaks of g.
std::vector<double> cut_points(const PathFunction& g, double lo, double hi) {
    std::vector<double> cuts{lo};
    const auto& br = g.breaks();
    for (auto it = std::upper_bound(br.begin(), br.end(), lo); it != br.end() && *it < hi; ++it) cuts.push_back(*it);
    cuts.push_back(hi);
    return cuts;
}

/// ∫_lo^hi g(s) ds; g has no breaks inside (lo, hi).
std::vector<double> integrate_piece(const PathFunction& g, double lo, double hi) {
    const std::size_t d = g.space().dim();
    // interior nodes only, so the value at a break never enters
    VectorIntegrand f = [&g](double s, std::vector<double>& out) {
        const Vector v = g.value(s);
        std::copy(v.coords().begin(), v.coords().end(), out.begin());
    };
    if (g.piecewise_linear()) return integrate_fixed(f, d, lo, hi, 2);
    return integrate_adaptive(f, d, lo, hi, 1e-14, 1e-14, 40);
}

double integrate_norm_piece(const PathFunction& g, double lo, double hi) {
    return integrate_adaptive_scalar([&g](double s) { return g.value(s).norm(); }, lo, hi, 1e-15, 1e-14, 40);
}

}  // namespace

Vector integrate_left(const FVMeasure& mu, const PathFunction& g, const BilinearMap& b, double a, double c,
                      IntegrandEvaluation eval) {
    check_interval(mu, a, c);
    require(g.space().dim() == b.domain_left().dim(), "integrate_left: integrand does not match B");
    require(mu.space().dim() == b.domain_right().dim(), "integrate_left: measure does not match B");
    require(g.horizon() >= c, "integrate_left: integrand horizon too short");
    const auto& f = mu.source();
    const std::size_t gd = b.codomain().dim();
    CompensatedVector acc(gd);
    std::vector<double> out(gd);

    const auto& knots = f.knot_times();
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double lo = std::max(a, knots[k]), hi = std::min(c, knots[k + 1]);
        if (hi <= lo) continue;
        const Vector slope = (f.knot_value(k + 1) - f.knot_value(k)) * (1.0 / (knots[k + 1] - knots[k]));
        if (slope.is_zero()) continue;
        const auto cuts = cut_points(g, lo, hi);
        CompensatedVector gint(g.space().dim());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) gint.add(integrate_piece(g, cuts[i], cuts[i + 1]));
        const auto gi = gint.values();
        b.apply_into(gi, slope.coords(), out);
        acc.add(out);
    }
    for (const auto& j : f.jumps()) {
        if (j.time <= a) continue;
        if (j.time > c) break;
        const Vector gv = eval == IntegrandEvaluation::LeftLimit ? g.left_limit(j.time) : g.value(j.time);
        b.apply_into(gv.coords(), j.delta.coords(), out);
        acc.add(out);
    }
    return Vector(b.codomain(), acc.values());
}

double dominated_bound(const FVMeasure& mu, const PathFunction& g, const BilinearMap& b, double a, double c) {
    check_interval(mu, a, c);
    const auto& f = mu.source();
    CompensatedSum acc;
    const auto& knots = f.knot_times();
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double lo = std::max(a, knots[k]), hi = std::min(c, knots[k + 1]);
        if (hi <= lo) continue;
        const double speed = (f.knot_value(k + 1) - f.knot_value(k)).norm() / (knots[k + 1] - knots[k]);
        if (speed == 0.0) continue;
        const auto cuts = cut_points(g, lo, hi);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) acc.add(speed * integrate_norm_piece(g, cuts[i], cuts[i + 1]));
    }
    for (const auto& j : f.jumps()) {
        if (j.time <= a) continue;
        if (j.time > c) break;
        acc.add(g.left_limit(j.time).norm() * j.delta.norm());
    }
    return b.bound() * acc.value();
}

Vector left_riemann_sum(const FVMeasure& mu, const PathFunction& g, const BilinearMap& b, const Partition& pi,
                        double t) {
    require(t >= 0.0 && t <= pi.horizon(), "left_riemann_sum: t outside the partition range");
    const auto& f = mu.source();
    const std::size_t gd = b.codomain().dim();
    CompensatedVector acc(gd);
    std::vector<double> out(gd);
    for (std::size_t i = 0; i < pi.intervals(); ++i) {
        const double r = pi.left(i), s = pi.right(i);
        if (r >= t) break;
        const Vector inc = f.value(std::min(s, t)) - f.value(r);
        b.apply_into(g.value(r).coords(), inc.coords(), out);
        acc.add(out);
    }
    return Vector(b.codomain(), acc.values());
}

std::vector<double> monitor_times(const PathFunction& g, double t) {
    std::vector<double> ts;
    for (double s : g.breaks())
        if (s > 0.0 && s <= t) ts.push_back(s);
    if (t > 0.0)
        for (int i = 1; i <= 16; ++i) ts.push_back(t * i / 16.0);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

IFStieltjesReport if_vs_stieltjes(const FVMeasure& mu, const PathFunction& g, const BilinearMap& b,
                                  const PartitionSequence& seq, double t, int n_max, const StallRule& rule) {
    const Vector exact = integrate_left(mu, g, b, 0.0, t);
    IFStieltjesReport rep{exact, {}, {}, approximates_from_left(seq, g, monitor_times(g, t), n_max, rule),
                          Verdict::Stalled};
    for (int n = 0; n <= n_max; ++n) {
        const Partition pi = seq.at(n);
        rep.mesh.push_back(pi.mesh());
        rep.residual.push_back((left_riemann_sum(mu, g, b, pi, t) - exact).norm());
    }
    rep.verdict = verdict_of(rep.residual, rule);
    return rep;
}

}  // namespace follmer
