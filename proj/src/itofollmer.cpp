#include "follmer/itofollmer.hpp"

#include <algorithm>
#include <cmath>

#include "follmer/error.hpp"
#include "follmer/parallel.hpp"
#include "follmer/quadrature.hpp"
#include "follmer/stieltjes.hpp"
#include "follmer/summation.hpp"

namespace follmer {

namespace {

double endpoint(double s, double t, QVConvention conv) { return conv == QVConvention::Truncated ? std::min(s, t) : s; }

std::vector<double> sorted_union(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<bool> weak_verdicts(const std::vector<Vector>& functionals, const std::vector<Vector>& values,
                                bool deltas, const StallRule& rule) {
    std::vector<bool> out;
    for (const auto& z : functionals) {
        std::vector<double> s;
        for (const auto& v : values) {
            require(z.dim() == v.dim(), "weak mode: functional has wrong dimension");
            double acc = 0.0;
            for (std::size_t k = 0; k < v.dim(); ++k) acc += z[k] * v[k];
            s.push_back(acc);
        }
        std::vector<double> probe;
        if (deltas) {
            for (std::size_t k = 1; k < s.size(); ++k) probe.push_back(std::abs(s[k] - s[k - 1]));
        } else {
            for (double v : s) probe.push_back(std::abs(v));
        }
        out.push_back(!probe.empty() && converges_to_zero(probe, rule));
    }
    return out;
}

std::vector<double> checked_grid(std::vector<double> grid, double horizon) {
    if (grid.empty()) grid.push_back(horizon);
    for (double t : grid) require(t >= 0.0 && t <= horizon, "time outside [0, T]");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

/// s -> op(A_s, X_s) as a path of linear maps.
PathFunction derivative_path(const CadlagPath& a, const CadlagPath& x, NormedSpace space,
                             std::function<Vector(const Vector&, const Vector&)> op) {
    auto value = [a, x, op](double s) { return op(a.value(s), x.value(s)); };
    auto left = [a, x, op](double s) { return op(a.left_limit(s), x.left_limit(s)); };
    return PathFunction(std::move(space), std::min(a.horizon(), x.horizon()), value, left,
                        sorted_union(a.event_times(), x.event_times()),
                        sorted_union(a.jump_times(), x.jump_times()));
}

Vector gl_integral(const NormedSpace& space, std::size_t points, const std::function<Vector(double)>& f) {
    const auto& gl = gauss_legendre(points);
    CompensatedVector acc(space.dim());
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
        acc.add(f(0.5 * (gl.nodes[i] + 1.0)).coords(), 0.5 * gl.weights[i]);
    return Vector(space, acc.values());
}

}  // namespace

Vector if_riemann_sum(const PathFunction& h, const CadlagPath& x, const BilinearMap& b, const Partition& pi, double t,
                      IFSide side, QVConvention convention) {
    const auto& hs = side == IFSide::LeftOfB ? b.domain_left() : b.domain_right();
    const auto& xs = side == IFSide::LeftOfB ? b.domain_right() : b.domain_left();
    require(h.space().dim() == hs.dim(), "if_riemann_sum: integrand does not match B");
    require(x.dim() == xs.dim(), "if_riemann_sum: integrator does not match B");
    require(t >= 0.0 && t <= pi.horizon() && t <= x.horizon(), "if_riemann_sum: t outside the partition range");
    const std::size_t gd = b.codomain().dim();
    CompensatedVector acc(gd);
    std::vector<double> out(gd);
    for (std::size_t i = 0; i < pi.intervals(); ++i) {
        const double r = pi.left(i);
        if (r >= t) break;
        const double e = endpoint(pi.right(i), t, convention);
        const Vector dx = x.value(e) - x.value(r);
        const Vector hr = h.value(r);
        if (side == IFSide::LeftOfB)
            b.apply_into(hr.coords(), dx.coords(), out);
        else
            b.apply_into(dx.coords(), hr.coords(), out);
        acc.add(out);
    }
    return Vector(b.codomain(), acc.values());
}

IFIntegralResult if_integral(const PathFunction& h, const CadlagPath& x, const BilinearMap& b,
                             const PartitionSequence& seq, double t, int n_max, IFSide side,
                             const std::vector<Vector>& functionals, const StallRule& rule) {
    require(n_max >= 0, "if_integral: negative n_max");
    const auto levels = static_cast<std::size_t>(n_max + 1);
    std::vector<Vector> sums(levels, Vector(b.codomain()));
    std::vector<double> meshes(levels);
    parallel_for(levels, [&](std::size_t n) {
        const Partition pi = seq.at(static_cast<int>(n));
        meshes[n] = pi.mesh();
        sums[n] = if_riemann_sum(h, x, b, pi, t, side);
    });
    ConvergenceTrace trace(b.codomain());
    for (std::size_t n = 0; n < levels; ++n) trace.push(static_cast<int>(n), meshes[n], t, sums[n]);
    auto estimate = trace.limit(rule);
    auto monitor = approximates_from_left(seq, h, monitor_times(h, t), n_max, rule);
    const bool reported_only = !monitor.passes;
    return IFIntegralResult{std::move(trace), std::move(estimate), std::move(monitor), reported_only,
                            weak_verdicts(functionals, sums, true, rule)};
}

ItoReport ito_verify(const ItoScenario& sc) {
    const auto& f = sc.f;
    require(sc.a.dim() == f.domain_a.dim(), "ito_verify: A does not live in the domain of f");
    require(sc.x.dim() == f.domain_x.dim(), "ito_verify: X does not live in the domain of f");
    require(sc.b.domain_left().dim() == f.domain_x.dim() && sc.b.domain_right().dim() == f.domain_x.dim(),
            "ito_verify: B must act on E x E");
    require(sc.a.horizon() == sc.x.horizon(), "ito_verify: A and X must share the horizon");
    require(sc.n_max >= 0, "ito_verify: negative n_max");
    const double horizon = sc.x.horizon();
    const auto grid = checked_grid(sc.t_grid, horizon);
    const double tmax = grid.back();
    const auto& G = f.codomain;
    const auto dx_space = LinearMap::space_of(f.domain_x, G);
    const auto da_space = LinearMap::space_of(f.domain_a, G);
    const auto t_space = LinearMap::space_of(sc.b.codomain(), G);

    ItoReport rep;
    rep.scenario_id = sc.id;

    const PathFunction h = derivative_path(sc.a, sc.x, dx_space, [&f](const Vector& a, const Vector& x) {
        return f.d_x(a, x).as_vector();
    });
    const PathFunction ga = derivative_path(sc.a, sc.x, da_space, [&f](const Vector& a, const Vector& x) {
        return f.d_a(a, x).as_vector();
    });

    if (sc.run_monitors) {
        const CadlagPath joint = pair(sc.a, sc.x);
        rep.condition_c = condition_C_diagnostic(sc.seq, joint, tmax, default_eps_grid(joint), sc.n_max, sc.rule);
        rep.left_approx = approximates_from_left(sc.seq, h, monitor_times(h, tmax), sc.n_max, sc.rule);
    }

    SecondDerivativeCompressor comp(sc.b);
    try {
        comp.compress(f.d2_x(sc.a.value(0.0), sc.x.value(0.0)));
    } catch (const FactorizationError& e) {
        rep.testable = false;
        rep.untestable_reason = e.what();
    }

    QVRequest qreq{sc.x, sc.x, sc.b, sc.seq, {}, QVConvention::Truncated, sc.n_max, {}, sc.rule};
    qreq.t_grid = default_t_grid(sc.x, sc.x);
    qreq.t_grid.insert(qreq.t_grid.end(), grid.begin(), grid.end());
    const QVPathResult qv = qv_limit(qreq);
    rep.qv_established = qv.established;
    rep.qv_status = qv.established ? "established" : "QV not established; residual informational";

    const FVMeasure mu_a(sc.a);
    const FVMeasure mu_ac = mu_a.continuous();
    const auto eval_a = BilinearMap::evaluation(f.domain_a, G);
    const auto eval_t = BilinearMap::evaluation(sc.b.codomain(), G);
    const auto events = sorted_union(sc.a.jump_times(), sc.x.jump_times());

    for (double t : grid) {
        ItoPointReport pt{t,  f.eval(sc.a.value(t), sc.x.value(t)) - f.eval(sc.a.value(0.0), sc.x.value(0.0)),
                          Vector(G), Vector(G), 0.0, Vector(G), {}, {}, std::nullopt, {}, {}, Verdict::Stalled, {}};
        pt.t1 = integrate_left(mu_ac, ga, eval_a, 0.0, t);
        CompensatedVector jump_a(G.dim()), t4(G.dim());
        for (double s : events) {
            if (s > t) break;
            const Vector al = sc.a.left_limit(s), xl = sc.x.left_limit(s);
            const Vector da = sc.a.jump_at(s), dx = sc.x.jump_at(s);
            jump_a.add(f.d_a(al, xl).apply(da).coords());
            const Vector term = f.eval(sc.a.value(s), sc.x.value(s)) - f.eval(al, xl) - f.d_x(al, xl).apply(dx);
            t4.add(term.coords());
        }
        pt.t1_alt = integrate_left(mu_a, ga, eval_a, 0.0, t) - Vector(G, jump_a.values());
        pt.t1_consistency = (pt.t1 - pt.t1_alt).norm();
        pt.t4 = Vector(G, t4.values());
        rep.points.push_back(std::move(pt));
    }

    const auto levels = static_cast<std::size_t>(sc.n_max + 1);
    std::vector<double> meshes(levels);
    std::vector<std::vector<Vector>> t2(levels), t3(levels);
    if (rep.testable) {
        try {
            // jump part of the discrete second-order sums, removed to leave the continuous part
            std::vector<Vector> t3_jumps;
            for (double t : grid) {
                CompensatedVector acc(G.dim());
                for (const auto& j : sc.x.jumps()) {
                    if (j.time > t) break;
                    const Vector al = sc.a.left_limit(j.time), xl = sc.x.left_limit(j.time);
                    const Vector q = sc.b.apply(j.delta, j.delta);
                    acc.add(comp.compress(f.d2_x(al, xl)).apply(q).coords(), 0.5);
                }
                t3_jumps.emplace_back(G, acc.values());
            }
            parallel_for(levels, [&](std::size_t n) {
                const Partition pi = sc.seq.at(static_cast<int>(n));
                meshes[n] = pi.mesh();
                for (std::size_t k = 0; k < grid.size(); ++k) {
                    const double t = grid[k];
                    CompensatedVector s2(G.dim()), s3(G.dim());
                    for (std::size_t i = 0; i < pi.intervals(); ++i) {
                        const double r = pi.left(i);
                        if (r >= t) break;
                        const Vector ar = sc.a.value(r), xr = sc.x.value(r);
                        const Vector dx = sc.x.value(std::min(pi.right(i), t)) - xr;
                        s2.add(f.d_x(ar, xr).apply(dx).coords());
                        s3.add(comp.compress(f.d2_x(ar, xr)).apply(sc.b.apply(dx, dx)).coords(), 0.5);
                    }
                    t2[n].emplace_back(G, s2.values());
                    t3[n].push_back(Vector(G, s3.values()) - t3_jumps[k]);
                }
            });
        } catch (const FactorizationError& e) {
            rep.testable = false;
            rep.untestable_reason = e.what();
            for (auto& v : t2) v.clear();
            for (auto& v : t3) v.clear();
        }
    }
    if (!rep.testable) {
        parallel_for(levels, [&](std::size_t n) {
            const Partition pi = sc.seq.at(static_cast<int>(n));
            meshes[n] = pi.mesh();
            for (double t : grid) t2[n].push_back(if_riemann_sum(h, sc.x, BilinearMap::evaluation(f.domain_x, G), pi, t));
        });
    }

    for (std::size_t k = 0; k < grid.size(); ++k) {
        auto& pt = rep.points[k];
        pt.mesh = meshes;
        for (std::size_t n = 0; n < levels; ++n) pt.t2.push_back(t2[n][k]);
        if (!rep.testable) continue;
        std::vector<Vector> resid;
        for (std::size_t n = 0; n < levels; ++n) {
            pt.t3.push_back(t3[n][k]);
            resid.push_back(pt.lhs - pt.t1 - pt.t2[n] - pt.t3[n] - pt.t4);
            pt.residual.push_back(resid.back().norm());
        }
        pt.verdict = verdict_of(pt.residual, sc.rule);
        pt.weak_converging = weak_verdicts(sc.functionals, resid, false, sc.rule);
        if (qv.continuous_part && pt.t > 0.0) {
            const PathFunction tp = derivative_path(sc.a, sc.x, t_space, [&f, &comp](const Vector& a, const Vector& x) {
                return comp.compress(f.d2_x(a, x)).as_vector();
            });
            pt.t3_limit = 0.5 * integrate_left(FVMeasure(*qv.continuous_part), tp, eval_t, 0.0, pt.t);
        }
    }
    return rep;
}

TaylorSplit taylor_split(const SmoothFunction& f, const CadlagPath& a, const CadlagPath& x, const BilinearMap& b,
                         const Partition& pi, double t, double eps) {
    require(a.dim() == f.domain_a.dim() && x.dim() == f.domain_x.dim(), "taylor_split: paths do not match f");
    require(t >= 0.0 && t <= pi.horizon(), "taylor_split: t outside the partition range");
    const auto& G = f.codomain;
    const SecondDerivativeCompressor comp(b);
    const auto big = jump_set(pair(a, x), eps, t);

    std::array<CompensatedVector, 8> acc{CompensatedVector(G.dim()), CompensatedVector(G.dim()),
                                         CompensatedVector(G.dim()), CompensatedVector(G.dim()),
                                         CompensatedVector(G.dim()), CompensatedVector(G.dim()),
                                         CompensatedVector(G.dim()), CompensatedVector(G.dim())};
    CompensatedVector dxsum(G.dim()), second_half(G.dim());
    double agreement = 0.0;
    std::size_t next_jump = 0;
    for (std::size_t i = 0; i < pi.intervals(); ++i) {
        const double u = pi.left(i);
        if (u >= t) break;
        const double v = std::min(pi.right(i), t);
        bool e1 = false;
        while (next_jump < big.size() && big[next_jump].time <= v) {
            if (big[next_jump].time > u) e1 = true;
            ++next_jump;
        }
        const Vector au = a.value(u), xu = x.value(u), av = a.value(v), xv = x.value(v);
        const Vector da = av - au, dx = xv - xu;
        const LinearMap dau = f.d_a(au, xu);
        const Vector fuu = f.eval(au, xu), fuv = f.eval(au, xv), fvv = f.eval(av, xv);
        const Vector df = fvv - fuu;
        const Vector dxf = f.d_x(au, xu).apply(dx);
        const Vector daf = dau.apply(da);
        const Vector sec = f.second(au, xu, dx, dx);
        const Vector i5 = 0.5 * comp.compress(f.d2_x(au, xu)).apply(b.apply(dx, dx));
        const Vector r = fvv - fuv - daf;
        const Vector rr = fuv - fuu - dxf - 0.5 * sec;
        const Vector r_quad = gl_integral(G, 32, [&](double th) {
            return f.d_a(au + th * da, xv).apply(da) - daf;
        });
        const Vector rr_quad = gl_integral(G, 32, [&](double th) {
            return (1.0 - th) * (f.second(au, xu + th * dx, dx, dx) - sec);
        });
        agreement = std::max({agreement, (r - r_quad).norm(), (rr - rr_quad).norm()});

        dxsum.add(dxf.coords());
        second_half.add(sec.coords(), 0.5);
        acc[2].add(daf.coords());
        acc[4].add(i5.coords());
        if (e1) {
            acc[0].add(df.coords());
            acc[1].add(dxf.coords());
            acc[3].add(daf.coords());
            acc[5].add(i5.coords());
        } else {
            acc[6].add(r.coords());
            acc[7].add(rr.coords());
        }
    }

    auto term = [&](std::size_t k) { return Vector(G, acc[k].values()); };
    TaylorSplit out{eps,       {term(0), term(1), term(2), term(3), term(4), term(5), term(6), term(7)},
                    Vector(G), 0.0,
                    agreement, 0.0};
    out.lhs = f.eval(a.value(t), x.value(t)) - f.eval(a.value(0.0), x.value(0.0)) - Vector(G, dxsum.values());
    const auto& I = out.terms;
    const Vector rhs = I[0] - I[1] + I[2] - I[3] + I[4] - I[5] + I[6] + I[7];
    out.identity_residual = (out.lhs - rhs).norm();
    out.compress_agreement = (I[4] - Vector(G, second_half.values())).norm();
    return out;
}

std::vector<TaylorSplit> taylor_split_ladder(const SmoothFunction& f, const CadlagPath& a, const CadlagPath& x,
                                             const BilinearMap& b, const Partition& pi, double t) {
    double m = pair(a, x).max_jump_norm();
    if (m == 0.0) m = 1.0;
    std::vector<TaylorSplit> out;
    for (int k = 1; k <= 12; ++k) out.push_back(taylor_split(f, a, x, b, pi, t, std::ldexp(m, -k)));
    return out;
}

WeightedQVReport weighted_qv_vs_integral(const PathFunction& xi, const NormedSpace& g, const CadlagPath& x,
                                      const BilinearMap& b, const PartitionSequence& seq, double t, int n_max,
                                      std::vector<double> q_grid, const std::vector<Vector>& functionals,
                                      const StallRule& rule, bool run_condition_c) {
    require(n_max >= 0, "weighted_qv_vs_integral: negative n_max");
    require(t > 0.0 && t <= x.horizon(), "weighted_qv_vs_integral: t outside ]0, T]");
    const auto eval = BilinearMap::evaluation(b.codomain(), g);
    require(xi.space().dim() == eval.domain_left().dim(), "weighted_qv_vs_integral: xi must take values in L(E1, G)");

    if (q_grid.empty()) q_grid = default_t_grid(x, x);
    q_grid.push_back(t);
    QVRequest req{x, x, b, seq, q_grid, QVConvention::Truncated, n_max, {}, rule};
    const QVPathResult qv = qv_limit(req);
    const Vector rhs = integrate_left(FVMeasure(*qv.path), xi, eval, 0.0, t);

    const auto levels = static_cast<std::size_t>(n_max + 1);
    std::vector<Vector> lhs(levels, Vector(g));
    std::vector<double> meshes(levels);
    parallel_for(levels, [&](std::size_t n) {
        const Partition pi = seq.at(static_cast<int>(n));
        meshes[n] = pi.mesh();
        CompensatedVector acc(g.dim());
        std::vector<double> out(g.dim());
        for (std::size_t i = 0; i < pi.intervals(); ++i) {
            const double r = pi.left(i);
            if (r >= t) break;
            const Vector dx = x.value(std::min(pi.right(i), t)) - x.value(r);
            eval.apply_into(xi.value(r).coords(), b.apply(dx, dx).coords(), out);
            acc.add(out);
        }
        lhs[n] = Vector(g, acc.values());
    });

    WeightedQVReport rep{rhs, lhs, meshes, {}, Verdict::Stalled, qv.established, {}, std::nullopt,
                      approximates_from_left(seq, xi, monitor_times(xi, t), n_max, rule)};
    std::vector<Vector> diffs;
    for (const auto& v : lhs) {
        diffs.push_back(v - rhs);
        rep.residual.push_back(diffs.back().norm());
    }
    rep.verdict = verdict_of(rep.residual, rule);
    rep.weak_converging = weak_verdicts(functionals, diffs, false, rule);
    if (run_condition_c) rep.condition_c = condition_C_diagnostic(seq, x, t, default_eps_grid(x), n_max, rule);
    return rep;
}

std::vector<IBPPoint> integration_by_parts(const CadlagPath& a, const CadlagPath& x, const PartitionSequence& seq,
                                           const std::vector<double>& t_grid, int n_max, QVConvention convention) {
    require(n_max >= 0, "integration_by_parts: negative n_max");
    require(a.horizon() == x.horizon(), "integration_by_parts: A and X must share the horizon");
    const auto grid = checked_grid(t_grid, x.horizon());
    const auto outer = BilinearMap::outer(a.space(), x.space());
    const auto& G = outer.codomain();
    const auto levels = static_cast<std::size_t>(n_max + 1);

    std::vector<IBPPoint> out;
    for (double t : grid)
        out.push_back(IBPPoint{t, outer.apply(a.value(t), x.value(t)) - outer.apply(a.value(0.0), x.value(0.0)),
                               std::vector<Vector>(levels, Vector(G)), std::vector<Vector>(levels, Vector(G)),
                               std::vector<Vector>(levels, Vector(G)), std::vector<double>(levels),
                               std::vector<double>(levels)});
    parallel_for(levels, [&](std::size_t n) {
        const Partition pi = seq.at(static_cast<int>(n));
        for (auto& p : out) {
            p.mesh[n] = pi.mesh();
            p.da_x[n] = if_riemann_sum(x, a, outer, pi, p.t, IFSide::RightOfB, convention);
            p.a_dx[n] = if_riemann_sum(a, x, outer, pi, p.t, IFSide::LeftOfB, convention);
            p.bracket[n] = discrete_qv(a, x, outer, pi, p.t, convention);
            p.residual[n] = (p.target - p.da_x[n] - p.a_dx[n] - p.bracket[n]).norm();
        }
    });
    return out;
}

}  // namespace follmer
