#include "follmer/partitions.hpp"

#include <algorithm>
#include <cmath>

#include "follmer/error.hpp"

namespace follmer {

const char* to_string(PartitionKind kind) {
    switch (kind) {
        case PartitionKind::Uniform: return "uniform";
        case PartitionKind::Dyadic: return "dyadic";
        case PartitionKind::Integer: return "integer";
        case PartitionKind::OscillationControlled: return "oscillation-controlled";
        case PartitionKind::Custom: return "custom";
    }
    return "unknown";
}

PartitionSequence::PartitionSequence(PartitionKind kind, double horizon) : kind_(kind), horizon_(horizon) {
    require(std::isfinite(horizon) && horizon > 0.0, "PartitionSequence: horizon must be positive");
}

PartitionSequence PartitionSequence::uniform(double horizon, std::size_t k0, std::size_t growth) {
    require(k0 >= 1 && growth >= 1, "PartitionSequence::uniform: k0 and growth must be positive");
    PartitionSequence s(PartitionKind::Uniform, horizon);
    s.k0_ = k0;
    s.growth_ = growth;
    return s;
}

PartitionSequence PartitionSequence::dyadic(double horizon) { return PartitionSequence(PartitionKind::Dyadic, horizon); }

PartitionSequence PartitionSequence::integer(double horizon) {
    return PartitionSequence(PartitionKind::Integer, horizon);
}

PartitionSequence PartitionSequence::oscillation_controlled(const CadlagPath& path, double eps0, double ratio) {
    require(eps0 > 0.0 && ratio > 0.0 && ratio < 1.0,
            "PartitionSequence::oscillation_controlled: need eps0 > 0 and 0 < ratio < 1");
    PartitionSequence s(PartitionKind::OscillationControlled, path.horizon());
    s.eps0_ = eps0;
    s.ratio_ = ratio;
    s.path_ = std::make_shared<const CadlagPath>(path);
    return s;
}

PartitionSequence PartitionSequence::custom(double horizon, std::vector<std::vector<double>> levels) {
    require(!levels.empty(), "PartitionSequence::custom: no levels given");
    PartitionSequence s(PartitionKind::Custom, horizon);
    for (const auto& l : levels) {
        Partition p(l);
        require(p.horizon() == horizon, "PartitionSequence::custom: level does not end at the horizon");
    }
    s.levels_ = std::move(levels);
    return s;
}

double PartitionSequence::eps_at(int n) const { return eps0_ * std::pow(ratio_, n); }

Partition PartitionSequence::at(int n) const {
    require(n >= 0, "PartitionSequence::at: negative index");
    std::vector<double> pts;
    switch (kind_) {
        case PartitionKind::Uniform: {
            const double k = static_cast<double>(k0_) * std::pow(static_cast<double>(growth_), n);
            require(k <= 1e8, "PartitionSequence::at: partition too fine");
            const auto count = static_cast<std::size_t>(k);
            pts.reserve(count + 1);
            for (std::size_t i = 0; i < count; ++i)
                pts.push_back(static_cast<double>(i) * horizon_ / static_cast<double>(count));
            pts.push_back(horizon_);
            break;
        }
        case PartitionKind::Dyadic: {
            require(std::ldexp(horizon_, n) <= 1e8, "PartitionSequence::at: partition too fine");
            for (std::size_t k = 0;; ++k) {
                const double p = std::ldexp(static_cast<double>(k), -n);
                if (p >= horizon_) break;
                pts.push_back(p);
            }
            pts.push_back(horizon_);
            break;
        }
        case PartitionKind::Integer: {
            for (std::size_t k = 0; static_cast<double>(k) < horizon_; ++k) pts.push_back(static_cast<double>(k));
            pts.push_back(horizon_);
            break;
        }
        case PartitionKind::OscillationControlled: return generate_oscillation_controlled(*path_, eps_at(n));
        case PartitionKind::Custom:
            pts = levels_[std::min<std::size_t>(static_cast<std::size_t>(n), levels_.size() - 1)];
            break;
    }
    return Partition(std::move(pts));
}

Partition::Cell locate(const Partition& pi, double t) { return pi.locate(t); }
double mesh(const Partition& pi) { return pi.mesh(); }

// ---------------------------------------------------------------------------

namespace {

/// Values seen since the last breakpoint; the diameter stays below the
/// threshold by construction.
class ValueCloud {
public:
    ValueCloud(const NormedSpace& space) : space_(space), d_(space.dim()) {}

    void reset() { pts_.clear(); }
    void add(std::span<const double> v) { pts_.insert(pts_.end(), v.begin(), v.end()); }

    double reach(std::span<const double> y) const {
        double best = 0.0;
        std::vector<double> diff(d_);
        for (std::size_t k = 0; k < pts_.size() / d_; ++k) {
            for (std::size_t i = 0; i < d_; ++i) diff[i] = y[i] - pts_[k * d_ + i];
            best = std::max(best, norm(space_, diff));
        }
        return best;
    }

private:
    NormedSpace space_;
    std::size_t d_;
    std::vector<double> pts_;
};

}  // namespace

Partition generate_oscillation_controlled(const CadlagPath& x, double eps) {
    require(eps > 0.0 && std::isfinite(eps), "generate_oscillation_controlled: eps must be positive");
    const double threshold = eps * (1.0 - 1e-9);
    const double T = x.horizon();
    const std::size_t d = x.dim();
    std::vector<double> breaks{0.0};
    ValueCloud cloud(x.space());
    std::vector<double> cur(d), end(d), probe(d);

    double p = 0.0;
    x.value_into(0.0, cur);
    cloud.add(cur);
    const auto& events = x.event_times();
    std::size_t next_event = 1;  // events[0] == 0

    while (next_event < events.size()) {
        const double q = events[next_event];
        x.left_limit_into(q, end);
        if (cloud.reach(end) >= threshold) {
            // X is affine on [p, q[ and the reach is convex along it: bisect the first crossing
            auto at = [&](double u) {
                const double w = (u - p) / (q - p);
                for (std::size_t i = 0; i < d; ++i) probe[i] = cur[i] + w * (end[i] - cur[i]);
                return cloud.reach(probe);
            };
            double lo = p, hi = q;
            for (int it = 0; it < 200 && hi - lo > 4e-16 * std::max(1.0, std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                if (at(mid) >= threshold) hi = mid;
                else lo = mid;
            }
            if (!(lo > p)) lo = std::nextafter(p, q);
            breaks.push_back(lo);
            const double w = (lo - p) / (q - p);
            for (std::size_t i = 0; i < d; ++i) cur[i] = cur[i] + w * (end[i] - cur[i]);
            p = lo;
            cloud.reset();
            cloud.add(cur);
            continue;
        }
        cloud.add(end);
        std::vector<double> val(d);
        x.value_into(q, val);
        if (x.is_jump_time(q) && cloud.reach(val) >= threshold) {
            if (q < T) breaks.push_back(q);
            cloud.reset();
        }
        cloud.add(val);
        cur = val;
        p = q;
        ++next_event;
    }
    if (breaks.back() < T) breaks.push_back(T);
    return Partition(std::move(breaks));
}

ScalarTrace controls_oscillation(const PartitionSequence& seq, const CadlagPath& x, double t, int n_max,
                                 const StallRule& rule) {
    ScalarTrace out;
    for (int n = 0; n <= n_max; ++n) {
        const Partition pi = seq.at(n);
        out.n.push_back(n);
        out.mesh.push_back(pi.mesh());
        out.values.push_back(partition_oscillation(x, pi, t).minus);
    }
    out.verdict = verdict_of(out.values, rule);
    return out;
}

std::vector<JumpExhaustion> exhausts_jumps(const PartitionSequence& seq, const CadlagPath& x, int n_max,
                                           std::size_t tail) {
    std::vector<Partition> parts;
    for (int n = 0; n <= n_max; ++n) parts.push_back(seq.at(n));
    std::vector<JumpExhaustion> out;
    for (double s : x.jump_times()) {
        int onset = -1;
        for (int n = n_max; n >= 0; --n) {
            if (!parts[static_cast<std::size_t>(n)].contains_point(s)) break;
            onset = n;
        }
        const bool ok = onset >= 0 && static_cast<std::size_t>(n_max - onset + 1) >= tail;
        out.push_back(JumpExhaustion{s, ok, onset});
    }
    return out;
}

ScalarTrace no_flat_interval(const PartitionSequence& seq, const CadlagPath& x, double t, int n_max,
                             const StallRule& rule) {
    std::vector<std::pair<double, double>> segments;
    const auto& knots = x.knot_times();
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double a = knots[k], b = std::min(knots[k + 1], t);
        if (b <= a) break;
        if ((x.knot_value(k + 1) - x.knot_value(k)).is_zero()) continue;
        segments.emplace_back(a, b);
    }
    ScalarTrace out;
    for (int n = 0; n <= n_max; ++n) {
        const Partition pi = seq.at(n);
        const auto& pts = pi.points();
        double gap = 0.0;
        for (const auto& [a, b] : segments) {
            double prev = a;
            for (auto it = std::upper_bound(pts.begin(), pts.end(), a); it != pts.end() && *it < b; ++it) {
                gap = std::max(gap, *it - prev);
                prev = *it;
            }
            gap = std::max(gap, b - prev);
        }
        out.n.push_back(n);
        out.mesh.push_back(pi.mesh());
        out.values.push_back(gap);
    }
    out.verdict = verdict_of(out.values, rule);
    return out;
}

std::vector<double> default_eps_grid(const CadlagPath& x) {
    const double scale = x.jumps().empty() ? 1.0 : x.max_jump_norm();
    std::vector<double> grid;
    for (int k = 1; k <= 12; ++k) grid.push_back(std::ldexp(scale, -k));
    return grid;
}

ConditionCReport condition_C_diagnostic(const PartitionSequence& seq, const CadlagPath& x, double t,
                                        std::vector<double> eps_grid, int n_max, const StallRule& rule) {
    require(!eps_grid.empty(), "condition_C_diagnostic: empty eps grid");
    require(n_max >= 0, "condition_C_diagnostic: negative n_max");
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        require(eps_grid[i] > 0.0, "condition_C_diagnostic: eps must be positive");
        if (i > 0) require(eps_grid[i] < eps_grid[i - 1], "condition_C_diagnostic: eps grid must decrease");
    }
    std::vector<Partition> parts;
    for (int n = 0; n <= n_max; ++n) parts.push_back(seq.at(n));

    ConditionCReport rep;
    rep.eps_grid = eps_grid;

    // C1: eventually each interval meets D_eps ∩ [0,t] at most once
    rep.c1 = true;
    const std::size_t tail = std::min<std::size_t>(rule.window, parts.size());
    for (double eps : eps_grid) {
        std::vector<double> times;
        for (const auto& j : jump_set(x, eps, t)) times.push_back(j.time);
        int onset = -1;
        for (int n = n_max; n >= 0; --n) {
            const Partition& pi = parts[static_cast<std::size_t>(n)];
            bool separated = true;
            for (std::size_t k = 1; k < times.size() && separated; ++k)
                separated = pi.locate(times[k]).index != pi.locate(times[k - 1]).index;
            if (!separated) break;
            onset = n;
        }
        const bool ok = onset >= 0 && static_cast<std::size_t>(n_max - onset + 1) >= tail;
        rep.c1_onset.push_back(ok ? onset : -1);
        rep.c1 = rep.c1 && ok;
    }

    // C2: delta X_t(pi_n(s)) -> Delta X_s for every jump s <= t
    rep.c2 = true;
    for (const auto& j : x.jumps()) {
        if (j.time > t) break;
        JumpResidualTrace tr{j.time, {}, Verdict::Stalled};
        for (const auto& pi : parts) {
            const auto cell = pi.locate(j.time);
            const Vector inc = x.value(std::min(cell.over, t)) - x.value(std::min(cell.under, t));
            tr.residuals.push_back((inc - j.delta).norm());
        }
        tr.verdict = verdict_of(tr.residuals, rule);
        rep.c2 = rep.c2 && tr.verdict == Verdict::ConvergingToZero;
        rep.c2_traces.push_back(std::move(tr));
    }

    // C3: iterated limsup surrogate
    for (double eps : eps_grid) {
        const CadlagPath rest = remove_large_jumps(x, eps);
        std::vector<double> row;
        for (const auto& pi : parts) row.push_back(partition_oscillation(rest, pi, t).plus);
        double tail_max = 0.0;
        for (std::size_t k = row.size() - tail; k < row.size(); ++k) tail_max = std::max(tail_max, row[k]);
        rep.c3_tail.push_back(tail_max);
        rep.c3_matrix.push_back(std::move(row));
    }
    rep.c3_monotone = true;
    for (std::size_t i = 1; i < rep.c3_tail.size(); ++i)
        if (rep.c3_tail[i] > rep.c3_tail[i - 1] * (1.0 + 1e-12) + 1e-15) rep.c3_monotone = false;
    const bool last_small =
        rep.c3_tail.back() < rule.tol_limit || converges_to_zero(rep.c3_matrix.back(), rule);
    rep.c3 = rep.c3_monotone && last_small;
    return rep;
}

// ---------------------------------------------------------------------------

Vector LeftDiscretization::at(double t) const { return t == 0.0 ? initial : steps.left_limit(t); }

LeftDiscretization left_discretization(const Partition& pi, const PathFunction& xi) {
    require(pi.horizon() == xi.horizon(), "left_discretization: partition and path horizons differ");
    const auto& pts = pi.points();
    std::vector<Vector> values;
    values.reserve(pts.size());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) values.push_back(xi.value(pts[i]));
    values.push_back(values.back());
    return LeftDiscretization{CadlagPath(xi.space(), xi.horizon(), pts, values, Interpolation::StepRight),
                              xi.value(0.0)};
}

LeftDiscretization left_discretization(const PartitionSequence& seq, int n, const PathFunction& xi) {
    return left_discretization(seq.at(n), xi);
}

LeftApproximationReport approximates_from_left(const PartitionSequence& seq, const PathFunction& xi,
                                               const std::vector<double>& sample_times, int n_max,
                                               const StallRule& rule) {
    LeftApproximationReport rep;
    rep.times = sample_times;
    rep.residuals.assign(sample_times.size(), {});
    for (double t : sample_times) require(t > 0.0 && t <= xi.horizon(), "approximates_from_left: t outside ]0, T]");
    for (int n = 0; n <= n_max; ++n) {
        const Partition pi = seq.at(n);
        for (std::size_t k = 0; k < sample_times.size(); ++k) {
            const double t = sample_times[k];
            const double under = pi.locate(t).under;
            rep.residuals[k].push_back((xi.value(under) - xi.left_limit(t)).norm());
        }
    }
    rep.passes = true;
    for (const auto& r : rep.residuals) {
        rep.verdicts.push_back(verdict_of(r, rule));
        rep.passes = rep.passes && rep.verdicts.back() == Verdict::ConvergingToZero;
    }
    return rep;
}

}  // namespace follmer
