#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "follmer/error.hpp"
#include "follmer/partitions.hpp"
#include "support.hpp"

using namespace follmer;
using namespace follmer::testing;

namespace {

const double kIrrational = 1.0 / std::sqrt(2.0);

bool controls(const PartitionSequence& seq, const CadlagPath& x, int n_max) {
    return controls_oscillation(seq, x, x.horizon(), n_max).verdict == Verdict::ConvergingToZero;
}

bool exhausts(const PartitionSequence& seq, const CadlagPath& x, int n_max) {
    for (const auto& j : exhausts_jumps(seq, x, n_max))
        if (!j.exhausted) return false;
    return true;
}

bool no_flat(const PartitionSequence& seq, const CadlagPath& x, int n_max) {
    return no_flat_interval(seq, x, x.horizon(), n_max).verdict == Verdict::ConvergingToZero;
}

}  // namespace

TEST(Partition, LocateAndMesh) {
    const auto d2 = PartitionSequence::dyadic(1.0).at(2);
    const auto c = locate(d2, 0.3);
    EXPECT_DOUBLE_EQ(c.under, 0.25);
    EXPECT_DOUBLE_EQ(c.over, 0.5);
    EXPECT_DOUBLE_EQ(locate(d2, 0.5).over, 0.5);
    EXPECT_THROW(locate(d2, 0.0), ContractError);
    EXPECT_THROW(locate(d2, 1.01), ContractError);

    EXPECT_DOUBLE_EQ(mesh(PartitionSequence::uniform(1.0, 5, 1).at(3)), 0.2);
    for (int n = 0; n < 12; ++n) EXPECT_DOUBLE_EQ(mesh(PartitionSequence::dyadic(1.0).at(n)), std::ldexp(1.0, -n));
    EXPECT_DOUBLE_EQ(mesh(Partition({0.0, 0.1, 0.7, 1.0})), 0.6);
    EXPECT_THROW(Partition({0.0, 0.5, 0.5, 1.0}), ContractError);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> pts{0.0, 1.0};
    for (int i = 0; i < 50; ++i) pts.push_back(u(rng));
    std::sort(pts.begin(), pts.end());
    const Partition pi(pts);
    for (int k = 0; k < 1000; ++k) {
        const double t = std::max(u(rng), 1e-9);
        std::size_t idx = 0;
        while (!(pts[idx] < t && t <= pts[idx + 1])) ++idx;
        const auto cell = locate(pi, t);
        EXPECT_EQ(cell.index, idx);
        EXPECT_LT(cell.under, t);
        EXPECT_LE(t, cell.over);
        EXPECT_LE(cell.over - cell.under, mesh(pi));
    }
}

TEST(Partition, DyadicTruncatedAtHorizon) {
    const auto p = PartitionSequence::dyadic(2.0).at(1);
    EXPECT_EQ(p.points(), (std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}));
    const auto q = PartitionSequence::dyadic(0.7).at(2);
    EXPECT_EQ(q.points(), (std::vector<double>{0.0, 0.25, 0.5, 0.7}));
    const auto i = PartitionSequence::integer(2.5).at(7);
    EXPECT_EQ(i.points(), (std::vector<double>{0.0, 1.0, 2.0, 2.5}));
}

TEST(OscillationControlled, Generator) {
    const auto step = scalar_step(1.0, 1.0, 2.0);
    const auto p = generate_oscillation_controlled(step, 0.5);
    EXPECT_TRUE(p.contains_point(1.0));

    const auto flat = CadlagPath::constant(scalar(3.0), 2.0);
    EXPECT_EQ(generate_oscillation_controlled(flat, 0.1).points(), (std::vector<double>{0.0, 2.0}));

    const auto ramp = scalar_linear({0.0, 1.0}, {0.0, 1.0}, 1.0);
    const auto r = generate_oscillation_controlled(ramp, 0.3);
    ASSERT_EQ(r.points().size(), 5u);
    for (std::size_t i = 1; i + 1 < r.points().size(); ++i) EXPECT_NEAR(r.points()[i], 0.3 * i, 1e-8);
}

TEST(OscillationControlled, RemeasuredOscillationBelowEps) {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 10; ++k) {
        const auto x = random_path(rng, NormedSpace::l2(2), 1.0, 10, 4);
        for (double eps : {1.0, 0.3, 0.05}) {
            const auto p = generate_oscillation_controlled(x, eps);
            for (std::size_t i = 0; i < p.intervals(); ++i)
                EXPECT_LT(oscillation(x, p.left(i), p.right(i), 1.0, OscillationMode::OpenInterior), eps);
        }
    }
    const auto x = random_path(rng, NormedSpace::l1(3), 1.0, 8, 3);
    const auto seq = PartitionSequence::oscillation_controlled(x, 1.0);
    const auto tr = controls_oscillation(seq, x, 1.0, 10);
    for (std::size_t n = 0; n < tr.values.size(); ++n) EXPECT_LT(tr.values[n], std::ldexp(1.0, -int(n)));
    EXPECT_EQ(tr.verdict, Verdict::ConvergingToZero);
}

TEST(JumpClassification, DyadicIrrationalJumpDoesNotControl) {
    const auto x = scalar_step(kIrrational, 1.0, 2.0);
    const auto seq = PartitionSequence::dyadic(2.0);
    const auto tr = controls_oscillation(seq, x, 2.0, 12);
    for (double v : tr.values) EXPECT_GE(v, 1.0);
    EXPECT_EQ(tr.verdict, Verdict::Stalled);
    const auto ex = exhausts_jumps(seq, x, 12);
    ASSERT_EQ(ex.size(), 1u);
    EXPECT_FALSE(ex[0].exhausted);
    EXPECT_EQ(ex[0].onset, -1);
    EXPECT_TRUE(condition_C_diagnostic(seq, x, 2.0, default_eps_grid(x), 12).passes());
}

TEST(JumpClassification, IntegerPartitionControlsUnitJump) {
    const auto x = scalar_step(1.0, 1.0, 2.0);
    const auto seq = PartitionSequence::integer(2.0);
    const auto tr = controls_oscillation(seq, x, 2.0, 8);
    for (double v : tr.values) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(tr.verdict, Verdict::ConvergingToZero);
    const auto ex = exhausts_jumps(seq, x, 8);
    ASSERT_EQ(ex.size(), 1u);
    EXPECT_TRUE(ex[0].exhausted);
    EXPECT_EQ(ex[0].onset, 0);
}

TEST(JumpClassification, IntegerPartitionHalfJumpSatisfiesConditionC) {
    const auto x = scalar_step(0.5, 1.0, 2.0);
    const auto seq = PartitionSequence::integer(2.0);
    const auto rep = condition_C_diagnostic(seq, x, 2.0, default_eps_grid(x), 8);
    EXPECT_TRUE(rep.c1);
    ASSERT_EQ(rep.c2_traces.size(), 1u);
    for (std::size_t n = 1; n < rep.c2_traces[0].residuals.size(); ++n) EXPECT_EQ(rep.c2_traces[0].residuals[n], 0.0);
    EXPECT_TRUE(rep.c2);
    for (double v : rep.c3_tail) EXPECT_EQ(v, 0.0);
    EXPECT_TRUE(rep.c3);
    EXPECT_FALSE(controls(seq, x, 8));
}

TEST(JumpClassification, DyadicHalfJumpExhaustedFromLevelOne) {
    const auto x = scalar_step(0.5, 1.0, 1.0);
    const auto ex = exhausts_jumps(PartitionSequence::dyadic(1.0), x, 10);
    ASSERT_EQ(ex.size(), 1u);
    EXPECT_TRUE(ex[0].exhausted);
    EXPECT_EQ(ex[0].onset, 1);
}

TEST(ConditionC, CloseJumpsBreakSeparation) {
    const auto x = CadlagPath::pure_jump(scalar(0.0), 1.0, {Jump{0.25, scalar(1.0)}, Jump{0.26, scalar(1.0)}});
    const auto seq = PartitionSequence::custom(1.0, {{0.0, 0.5, 1.0}});
    const auto rep = condition_C_diagnostic(seq, x, 1.0, {0.5}, 6);
    EXPECT_FALSE(rep.c1);
    EXPECT_EQ(rep.c1_onset[0], -1);
    EXPECT_FALSE(rep.passes());
}

TEST(ConditionC, DyadicPassesOnFixtures) {
    std::mt19937_64 rng(23);
    for (int k = 0; k < 5; ++k) {
        const auto x = random_path(rng, NormedSpace::l2(2), 1.0, 6, 0);
        const auto pj = CadlagPath::pure_jump(scalar(0.0), 1.0,
                                              {Jump{0.375, scalar(1.0)}, Jump{0.8125, scalar(-0.5)}});
        const auto seq = PartitionSequence::dyadic(1.0);
        EXPECT_TRUE(condition_C_diagnostic(seq, x, 1.0, default_eps_grid(x), 12).passes());
        EXPECT_TRUE(condition_C_diagnostic(seq, pj, 1.0, default_eps_grid(pj), 12).passes());
    }
}

TEST(ConditionC, ProductPathImpliesComponents) {
    const auto x = CadlagPath::pure_jump(scalar(0.0), 1.0, {Jump{0.25, scalar(1.0)}});
    const auto y = scalar_linear({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0}, 1.0, {Jump{0.625, scalar(-0.5)}});
    const auto xy = pair(x, y);
    for (const auto& seq : {PartitionSequence::dyadic(1.0), PartitionSequence::uniform(1.0, 8, 2)}) {
        if (!condition_C_diagnostic(seq, xy, 1.0, default_eps_grid(xy), 10).passes()) continue;
        EXPECT_TRUE(condition_C_diagnostic(seq, x, 1.0, default_eps_grid(x), 10).passes());
        EXPECT_TRUE(condition_C_diagnostic(seq, y, 1.0, default_eps_grid(y), 10).passes());
    }
}

TEST(ControlEquivalence, EquivalenceOnFixtures) {
    struct Case {
        PartitionSequence seq;
        CadlagPath x;
        int n_max;
    };
    std::mt19937_64 rng(41);
    const auto rp = random_path(rng, NormedSpace::l2(2), 1.0, 6, 3);
    const auto ramp_jump = scalar_linear({0.0, 1.0}, {0.0, 1.0}, 1.0, {Jump{0.5, scalar(1.0)}});
    const std::vector<Case> cases{
        {PartitionSequence::dyadic(2.0), scalar_step(kIrrational, 1.0, 2.0), 12},
        {PartitionSequence::integer(2.0), scalar_step(1.0, 1.0, 2.0), 8},
        {PartitionSequence::integer(2.0), scalar_step(0.5, 1.0, 2.0), 8},
        {PartitionSequence::integer(2.0), scalar_linear({0.0, 2.0}, {0.0, 1.0}, 2.0), 8},
        {PartitionSequence::oscillation_controlled(rp, 1.0), rp, 10},
        {PartitionSequence::oscillation_controlled(ramp_jump, 1.0), ramp_jump, 10},
        {PartitionSequence::dyadic(1.0), CadlagPath::pure_jump(scalar(0.0), 1.0, {Jump{0.5, scalar(1.0)}}), 8},
    };
    for (const auto& c : cases) {
        const bool lhs = controls(c.seq, c.x, c.n_max);
        const bool rhs = exhausts(c.seq, c.x, c.n_max) && no_flat(c.seq, c.x, c.n_max);
        EXPECT_EQ(lhs, rhs) << to_string(c.seq.kind());
    }
}

TEST(ControlledSequences, ControlImpliesConditionCAndLeftApproximation) {
    // exact fixtures: the stall rule sees the limits directly
    const std::vector<CadlagPath> exact{
        CadlagPath::pure_jump(scalar(0.0), 1.0, {Jump{0.3, scalar(1.0)}, Jump{0.7, scalar(-0.4)}}),
        CadlagPath::pure_jump(scalar(1.0), 1.0, {Jump{0.1, scalar(-2.0)}, Jump{0.9, scalar(0.25)}}),
        scalar_step(kIrrational, 1.0, 1.0)};
    for (const auto& x : exact) {
        const auto seq = PartitionSequence::oscillation_controlled(x, 1.0);
        ASSERT_TRUE(controls(seq, x, 12));
        EXPECT_TRUE(condition_C_diagnostic(seq, x, 1.0, default_eps_grid(x), 12).passes());
        EXPECT_TRUE(approximates_from_left(seq, x, {0.3, 0.7, 1.0}, 12).passes);
    }
}

TEST(ControlledSequences, OscillationControlledResidualsDominatedByEps) {
    // generic fixtures: the residuals plateau between levels, so check the bound they obey
    std::mt19937_64 rng(43);
    for (int k = 0; k < 4; ++k) {
        const auto x = random_path(rng, NormedSpace::l2(1), 1.0, 5, 3);
        const auto seq = PartitionSequence::oscillation_controlled(x, 1.0);
        ASSERT_TRUE(controls(seq, x, 10));
        double min_jump = 1e300;
        for (const auto& j : x.jumps()) min_jump = std::min(min_jump, j.delta.norm());
        const auto rep = condition_C_diagnostic(seq, x, 1.0, default_eps_grid(x), 10);
        for (const auto& tr : rep.c2_traces)
            for (std::size_t n = 0; n < tr.residuals.size(); ++n)
                if (seq.eps_at(int(n)) < min_jump / 2) EXPECT_LE(tr.residuals[n], 2 * seq.eps_at(int(n)));
        EXPECT_TRUE(rep.c1);
        EXPECT_TRUE(rep.c3);
        const auto la = approximates_from_left(seq, x, {0.2, 0.5, 0.9, 1.0}, 10);
        for (const auto& row : la.residuals)
            for (std::size_t n = 0; n < row.size(); ++n) EXPECT_LE(row[n], seq.eps_at(int(n)));
    }
}

TEST(LeftDiscretization, Examples) {
    const auto x = scalar_step(0.5, 1.0, 2.0);
    const auto d = left_discretization(PartitionSequence::integer(2.0), 3, x);
    EXPECT_EQ(d.at(0.0)[0], 0.0);
    EXPECT_EQ(d.at(0.75)[0], 0.0);
    EXPECT_EQ(d.at(1.0)[0], 0.0);
    EXPECT_EQ(d.at(1.0001)[0], 1.0);
    EXPECT_EQ(d.at(2.0)[0], 1.0);

    const auto c = CadlagPath::constant(scalar(2.5), 1.0);
    const auto dc = left_discretization(PartitionSequence::dyadic(1.0), 4, c);
    for (double t : {0.0, 0.1, 0.5, 1.0}) EXPECT_EQ(dc.at(t)[0], 2.5);

    const auto ramp = scalar_linear({0.0, 1.0}, {0.0, 1.0}, 1.0);
    const auto st = left_discretization(PartitionSequence::uniform(1.0, 4, 1), 0, ramp);
    EXPECT_DOUBLE_EQ(st.at(0.25)[0], 0.0);
    EXPECT_DOUBLE_EQ(st.at(0.3)[0], 0.25);
    EXPECT_DOUBLE_EQ(st.at(1.0)[0], 0.75);
}

TEST(LeftApproximation, HalfJumpIntegerFails) {
    const auto x = scalar_step(0.5, 1.0, 2.0);
    const auto rep = approximates_from_left(PartitionSequence::integer(2.0), x, {0.75, 1.0, 1.5}, 8);
    EXPECT_FALSE(rep.passes);
    for (double r : rep.residuals[0]) EXPECT_EQ(r, 1.0);
    for (double r : rep.residuals[1]) EXPECT_EQ(r, 1.0);
    EXPECT_EQ(rep.verdicts[2], Verdict::ConvergingToZero);
}

TEST(LeftApproximation, DyadicOnFixturesAndComposition) {
    const auto x = scalar_linear({0.0, 0.25, 0.75, 1.0}, {0.0, 2.0, -1.0, 0.5}, 1.0,
                                 {Jump{0.375, scalar(1.0)}, Jump{0.8125, scalar(-2.0)}});
    const std::vector<double> times{0.125, 0.375, 0.5, 0.8125, 1.0};
    const auto seq = PartitionSequence::dyadic(1.0);
    EXPECT_TRUE(approximates_from_left(seq, x, times, 16).passes);

    const PathFunction sq = PathFunction(x).compose(NormedSpace::l2(1), [](const Vector& v) {
        return Vector(v.space(), {v[0] * v[0]});
    });
    EXPECT_TRUE(approximates_from_left(seq, sq, times, 16).passes);
}

TEST(LeftApproximation, DyadicResidualBoundedByLipschitzMesh) {
    std::mt19937_64 rng(47);
    const std::size_t knots = 7;
    const auto x = random_path(rng, NormedSpace::l2(2), 1.0, knots, 3);
    double lip = 0.0;
    for (std::size_t i = 0; i + 1 < knots; ++i)
        lip = std::max(lip, (x.knot_value(i + 1) - x.knot_value(i)).norm() /
                                (x.knot_times()[i + 1] - x.knot_times()[i]));
    std::vector<double> times;
    for (const auto& j : x.jumps()) times.push_back(j.time);
    times.push_back(0.333);
    times.push_back(1.0);
    const auto rep = approximates_from_left(PartitionSequence::dyadic(1.0), x, times, 16);
    for (std::size_t i = 0; i < times.size(); ++i) {
        double last_jump_gap = times[i];
        for (const auto& j : x.jumps())
            if (j.time < times[i]) last_jump_gap = std::min(last_jump_gap, times[i] - j.time);
        for (int n = 0; n <= 16; ++n)
            if (std::ldexp(1.0, -n) < last_jump_gap)
                EXPECT_LE(rep.residuals[i][n], lip * std::ldexp(1.0, -n) * (1 + 1e-12));
        EXPECT_LT(rep.residuals[i].back(), 1e-3);
    }
}
