#include "follmer/quadvar.hpp"

#include <algorithm>
#include <cmath>

#include "follmer/error.hpp"
#include "follmer/parallel.hpp"
#include "follmer/summation.hpp"

namespace follmer {

const char* to_string(QVConvention c) { return c == QVConvention::Truncated ? "truncated" : "indicator-left"; }

namespace {

using Pairing = std::function<void(std::span<const double>, std::span<const double>, std::span<double>)>;

Pairing bilinear_pairing(const BilinearMap& b) {
    return [b](std::span<const double> x, std::span<const double> y, std::span<double> out) {
        b.apply_into(x, y, out);
    };
}

Pairing squared_norm_pairing(const NormedSpace& space) {
    return [space](std::span<const double> x, std::span<const double>, std::span<double> out) {
        const double n = norm(space, x);
        out[0] = n * n;
    };
}

void check_spaces(const CadlagPath& x, const CadlagPath& y, const BilinearMap& b) {
    require(x.dim() == b.domain_left().dim(), "quadvar: X does not match the left domain of B");
    require(y.dim() == b.domain_right().dim(), "quadvar: Y does not match the right domain of B");
    require(x.horizon() == y.horizon(), "quadvar: X and Y have different horizons");
}

/// Sums of one partition level, with the full-interval terms cached.
class LevelSums {
public:
    LevelSums(const CadlagPath& x, const CadlagPath& y, const Pairing& pairing, std::size_t gdim, const Partition& pi)
        : x_(x), y_(y), pairing_(pairing), g_(gdim), pi_(pi) {
        require(pi.horizon() <= x.horizon(), "quadvar: partition extends beyond the path horizon");
        const auto& pts = pi.points();
        const std::size_t dx = x.dim(), dy = y.dim();
        xs_.resize(pts.size() * dx);
        ys_.resize(pts.size() * dy);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            x.value_into(pts[i], std::span<double>(&xs_[i * dx], dx));
            y.value_into(pts[i], std::span<double>(&ys_[i * dy], dy));
        }
        terms_.resize(pi.intervals() * g_);
        std::vector<double> ix(dx), iy(dy);
        for (std::size_t i = 0; i < pi.intervals(); ++i) {
            for (std::size_t k = 0; k < dx; ++k) ix[k] = xs_[(i + 1) * dx + k] - xs_[i * dx + k];
            for (std::size_t k = 0; k < dy; ++k) iy[k] = ys_[(i + 1) * dy + k] - ys_[i * dy + k];
            pairing_(ix, iy, std::span<double>(&terms_[i * g_], g_));
        }
    }

    const Partition& partition() const { return pi_; }

    std::vector<double> at(double t, QVConvention conv) const {
        if (t <= 0.0) return std::vector<double>(g_, 0.0);
        require(t <= pi_.horizon(), "quadvar: t beyond the partition horizon");
        const auto cell = pi_.locate(t);
        CompensatedVector acc(g_);
        for (std::size_t i = 0; i < cell.index; ++i) acc.add(std::span<const double>(&terms_[i * g_], g_));
        if (conv == QVConvention::IndicatorLeft) {
            acc.add(std::span<const double>(&terms_[cell.index * g_], g_));
        } else {
            add_partial(acc, cell, t, false);
        }
        return acc.values();
    }

    std::vector<double> left_at(double t) const {
        require(t > 0.0 && t <= pi_.horizon(), "quadvar: left limit needs t in ]0, T]");
        const auto cell = pi_.locate(t);
        CompensatedVector acc(g_);
        for (std::size_t i = 0; i < cell.index; ++i) acc.add(std::span<const double>(&terms_[i * g_], g_));
        add_partial(acc, cell, t, true);
        return acc.values();
    }

private:
    void add_partial(CompensatedVector& acc, const Partition::Cell& cell, double t, bool left) const {
        const std::size_t dx = x_.dim(), dy = y_.dim();
        std::vector<double> ix(dx), iy(dy), out(g_);
        if (left) {
            x_.left_limit_into(t, ix);
            y_.left_limit_into(t, iy);
        } else {
            x_.value_into(t, ix);
            y_.value_into(t, iy);
        }
        for (std::size_t k = 0; k < dx; ++k) ix[k] -= xs_[cell.index * dx + k];
        for (std::size_t k = 0; k < dy; ++k) iy[k] -= ys_[cell.index * dy + k];
        pairing_(ix, iy, out);
        acc.add(out);
    }

    const CadlagPath& x_;
    const CadlagPath& y_;
    const Pairing& pairing_;
    std::size_t g_;
    Partition pi_;
    std::vector<double> xs_, ys_, terms_;
};

std::vector<double> normalized_grid(std::vector<double> grid, double horizon) {
    for (double t : grid) require(t >= 0.0 && t <= horizon, "quadvar: evaluation time outside [0, T]");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

QVPathResult qv_core(const CadlagPath& x, const CadlagPath& y, const Pairing& pairing, const NormedSpace& codomain,
                     const PartitionSequence& seq, std::vector<double> grid, QVConvention conv, int n_max,
                     const std::vector<Vector>& functionals, const StallRule& rule) {
    require(n_max >= 0, "qv_limit: negative n_max");
    if (grid.empty()) grid = default_t_grid(x, y);
    grid = normalized_grid(std::move(grid), x.horizon());
    const std::size_t g = codomain.dim();
    for (const auto& z : functionals) require(z.dim() == g, "qv_limit: functional has wrong dimension");

    // jump times of X or Y inside the grid range
    std::vector<double> jt;
    std::merge(x.jump_times().begin(), x.jump_times().end(), y.jump_times().begin(), y.jump_times().end(),
               std::back_inserter(jt));
    jt.erase(std::unique(jt.begin(), jt.end()), jt.end());
    const double tmax = grid.back();
    jt.erase(std::remove_if(jt.begin(), jt.end(), [&](double s) { return s > tmax; }), jt.end());

    const auto levels = static_cast<std::size_t>(n_max + 1);
    std::vector<std::vector<std::vector<double>>> values(levels);  // [n][t] -> coords
    std::vector<std::vector<std::vector<double>>> jumps(levels);   // [n][s] -> Delta Q coords
    std::vector<double> meshes(levels);
    parallel_for(levels, [&](std::size_t n) {
        const Partition pi = seq.at(static_cast<int>(n));
        meshes[n] = pi.mesh();
        LevelSums sums(x, y, pairing, g, pi);
        for (double t : grid) values[n].push_back(sums.at(t, conv));
        for (double s : jt) {
            auto a = sums.at(s, QVConvention::Truncated);
            const auto b = sums.left_at(s);
            for (std::size_t k = 0; k < g; ++k) a[k] -= b[k];
            jumps[n].push_back(std::move(a));
        }
    });

    QVPathResult res{codomain, {}, false, {}, false, std::nullopt, std::nullopt, std::nullopt, {}};
    res.established = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ConvergenceTrace trace(codomain);
        for (std::size_t n = 0; n < levels; ++n)
            trace.push(static_cast<int>(n), meshes[n], grid[i], Vector(codomain, values[n][i]));
        auto lim = trace.limit(rule);
        res.established = res.established && lim.established;
        res.points.push_back(QVPoint{grid[i], std::move(trace), std::move(lim)});
    }

    res.jumps_ok = true;
    std::vector<double> dx(x.dim()), dy(y.dim());
    for (std::size_t k = 0; k < jt.size(); ++k) {
        const double s = jt[k];
        const Vector ddx = x.jump_at(s), ddy = y.jump_at(s);
        Vector expected(codomain);
        pairing(ddx.coords(), ddy.coords(), expected.coords());
        JumpCheck jc{s, expected, {}, Verdict::Stalled};
        for (std::size_t n = 0; n < levels; ++n) {
            Vector got(codomain, jumps[n][k]);
            jc.residuals.push_back((got - expected).norm());
        }
        jc.verdict = verdict_of(jc.residuals, rule);
        res.jumps_ok = res.jumps_ok && jc.verdict == Verdict::ConvergingToZero;
        res.jump_checks.push_back(std::move(jc));
    }

    for (const auto& z : functionals) {
        bool ok = true;
        for (const auto& p : res.points) {
            std::vector<double> scalar;
            for (const auto& e : p.trace.entries()) {
                double s = 0.0;
                for (std::size_t k = 0; k < g; ++k) s += z[k] * e.value[k];
                scalar.push_back(s);
            }
            std::vector<double> d;
            for (std::size_t k = 1; k < scalar.size(); ++k) d.push_back(std::abs(scalar[k] - scalar[k - 1]));
            ok = ok && !d.empty() && converges_to_zero(d, rule);
        }
        res.weak_established.push_back(ok);
    }

    if (tmax > 0.0) {
        std::vector<double> knots = grid;
        if (knots.front() != 0.0) knots.insert(knots.begin(), 0.0);
        std::vector<Jump> qjumps;
        for (const auto& jc : res.jump_checks)
            if (!jc.expected.is_zero()) qjumps.push_back(Jump{jc.time, jc.expected});
        auto jump_sum = [&](double t) {
            Vector acc(codomain);
            for (const auto& j : qjumps)
                if (j.time <= t) acc += j.delta;
            return acc;
        };
        std::vector<Vector> cont;
        for (double t : knots) {
            if (t == 0.0) {
                cont.emplace_back(codomain);
                continue;
            }
            cont.push_back(res.limit_at(t).value - jump_sum(t));
        }
        CadlagPath c(codomain, tmax, knots, cont);
        CadlagPath j = CadlagPath::pure_jump(Vector(codomain), tmax, qjumps);
        res.path = c + j;
        res.continuous_part = std::move(c);
        res.jump_part = std::move(j);
    }
    return res;
}

}  // namespace

const LimitEstimate& QVPathResult::limit_at(double t) const {
    for (const auto& p : points)
        if (p.t == t) return p.limit;
    throw ContractError("QVPathResult::limit_at: time not on the evaluation grid");
}

Vector discrete_qv(const CadlagPath& x, const CadlagPath& y, const BilinearMap& b, const Partition& pi, double t,
                   QVConvention convention) {
    check_spaces(x, y, b);
    require(t >= 0.0 && t <= pi.horizon(), "discrete_qv: t outside the partition range");
    const Pairing p = bilinear_pairing(b);
    LevelSums sums(x, y, p, b.codomain().dim(), pi);
    return Vector(b.codomain(), sums.at(t, convention));
}

Vector discrete_qv_left(const CadlagPath& x, const CadlagPath& y, const BilinearMap& b, const Partition& pi,
                        double t) {
    check_spaces(x, y, b);
    const Pairing p = bilinear_pairing(b);
    LevelSums sums(x, y, p, b.codomain().dim(), pi);
    return Vector(b.codomain(), sums.left_at(t));
}

double discrete_scalar_qv(const CadlagPath& x, const Partition& pi, double t) {
    const Pairing p = squared_norm_pairing(x.space());
    LevelSums sums(x, x, p, 1, pi);
    return sums.at(t, QVConvention::Truncated)[0];
}

std::vector<double> default_t_grid(const CadlagPath& x, const CadlagPath& y) {
    const double T = x.horizon();
    std::vector<double> grid;
    for (int i = 0; i <= 32; ++i) grid.push_back(T * i / 32.0);
    std::vector<Jump> all(x.jumps());
    all.insert(all.end(), y.jumps().begin(), y.jumps().end());
    std::stable_sort(all.begin(), all.end(),
                     [](const Jump& a, const Jump& b) { return a.delta.norm() > b.delta.norm(); });
    const double h = T / 1024.0;
    for (std::size_t k = 0; k < std::min<std::size_t>(8, all.size()); ++k) {
        const double s = all[k].time;
        for (double c : {s - h, s, s + h})
            if (c >= 0.0 && c <= T) grid.push_back(c);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

QVPathResult qv_limit(const QVRequest& req) {
    check_spaces(req.x, req.y, req.b);
    return qv_core(req.x, req.y, bilinear_pairing(req.b), req.b.codomain(), req.seq, req.t_grid, req.convention,
                   req.n_max, req.functionals, req.rule);
}

QVPathResult scalar_qv(const CadlagPath& x, const PartitionSequence& seq, std::vector<double> t_grid, int n_max,
                       const StallRule& rule) {
    return qv_core(x, x, squared_norm_pairing(x.space()), NormedSpace::l2(1), seq, std::move(t_grid),
                   QVConvention::Truncated, n_max, {}, rule);
}

TwoVariation two_variation(const CadlagPath& x, const PartitionSequence& seq, double t, int n_max) {
    TwoVariation out{0.0, {}, false};
    for (int n = 0; n <= n_max; ++n) {
        const double s = discrete_scalar_qv(x, seq.at(n), t);
        out.level_sums.push_back(s);
        out.value = std::max(out.value, s);
    }
    const auto& v = out.level_sums;
    if (v.size() >= 3) {
        const std::size_t m = v.size();
        out.growing = v[m - 1] > v[m - 2] && v[m - 2] > v[m - 3];
    }
    return out;
}

std::vector<double> qv_bilinearity_check(const CadlagPath& x1, const CadlagPath& x2, const CadlagPath& y1,
                                         const CadlagPath& y2, const BilinearMap& b, const PartitionSequence& seq,
                                         const std::vector<double>& t_grid, int n_max) {
    const CadlagPath xs = x1 + x2, ys = y1 + y2;
    const Pairing p = bilinear_pairing(b);
    const std::size_t g = b.codomain().dim();
    std::vector<double> out;
    for (int n = 0; n <= n_max; ++n) {
        const Partition pi = seq.at(n);
        LevelSums whole(xs, ys, p, g, pi), s11(x1, y1, p, g, pi), s12(x1, y2, p, g, pi), s21(x2, y1, p, g, pi),
            s22(x2, y2, p, g, pi);
        double worst = 0.0;
        for (double t : t_grid) {
            Vector diff(b.codomain(), whole.at(t, QVConvention::Truncated));
            for (const LevelSums* part : {&s11, &s12, &s21, &s22})
                diff -= Vector(b.codomain(), part->at(t, QVConvention::Truncated));
            worst = std::max(worst, diff.norm());
        }
        out.push_back(worst);
    }
    return out;
}

BlockQVReport qv_block_matrix(const CadlagPath& x1, const CadlagPath& x2, const CadlagPath& y1,
                              const CadlagPath& y2, const BilinearMap& b11, const BilinearMap& b12,
                              const BilinearMap& b21, const BilinearMap& b22, const PartitionSequence& seq,
                              const std::vector<double>& t_grid, int n_max) {
    const BilinearMap block = BilinearMap::block(b11, b12, b21, b22);
    const CadlagPath xp = pair(x1, x2), yp = pair(y1, y2);
    const BilinearMap* bs[4] = {&b11, &b12, &b21, &b22};
    const CadlagPath* xs[4] = {&x1, &x1, &x2, &x2};
    const CadlagPath* ys[4] = {&y1, &y2, &y1, &y2};

    BlockQVReport rep;
    for (int k = 0; k < 4; ++k) {
        QVRequest req{*xs[k], *ys[k], *bs[k], seq, t_grid, QVConvention::Truncated, n_max, {}, {}};
        rep.blocks.push_back(qv_limit(req));
    }
    const Pairing whole_pairing = bilinear_pairing(block);
    const auto& gspace = block.codomain();
    for (int n = 0; n <= n_max; ++n) {
        const Partition pi = seq.at(n);
        LevelSums whole(xp, yp, whole_pairing, gspace.dim(), pi);
        double worst = 0.0;
        for (double t : t_grid) {
            const auto w = whole.at(t, QVConvention::Truncated);
            for (std::size_t k = 0; k < 4; ++k) {
                const auto part = discrete_qv(*xs[k], *ys[k], *bs[k], pi, t);
                const std::size_t off = gspace.component_offset(k);
                std::vector<double> diff(part.dim());
                for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = w[off + i] - part[i];
                worst = std::max(worst, norm(bs[k]->codomain(), diff));
            }
        }
        rep.residual.push_back(worst);
    }
    return rep;
}

std::vector<ConventionTrace> convention_equivalence(const CadlagPath& x, const CadlagPath& y, const BilinearMap& b,
                                                    const PartitionSequence& seq, const std::vector<double>& t_grid,
                                                    int n_max, const StallRule& rule) {
    check_spaces(x, y, b);
    const Pairing p = bilinear_pairing(b);
    std::vector<ConventionTrace> out;
    for (double t : t_grid) out.push_back(ConventionTrace{t, {}, {}, {}, Verdict::Stalled, Verdict::Stalled});
    for (int n = 0; n <= n_max; ++n) {
        const Partition pi = seq.at(n);
        LevelSums sums(x, y, p, b.codomain().dim(), pi);
        for (auto& tr : out) {
            const double t = tr.t;
            Vector diff(b.codomain(), sums.at(t, QVConvention::Truncated));
            diff -= Vector(b.codomain(), sums.at(t, QVConvention::IndicatorLeft));
            tr.residual.push_back(diff.norm());
            if (t <= 0.0) {
                tr.monitor.push_back(0.0);
                tr.bound.push_back(0.0);
                continue;
            }
            const auto cell = pi.locate(t);
            const Vector xv = x.value(cell.over), xt = x.value(t), xu = x.value(cell.under);
            const Vector yv = y.value(cell.over), yt = y.value(t), yu = y.value(cell.under);
            tr.monitor.push_back((xv - xt).norm() + (yv - yt).norm());
            tr.bound.push_back(b.bound() * ((xv - xt).norm() * (yv - yu).norm() + (xt - xu).norm() * (yv - yt).norm()));
        }
    }
    for (auto& tr : out) {
        tr.monitor_verdict = verdict_of(tr.monitor, rule);
        tr.residual_verdict = verdict_of(tr.residual, rule);
    }
    return out;
}

}  // namespace follmer
