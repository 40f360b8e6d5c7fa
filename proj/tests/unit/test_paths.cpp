#include <gtest/gtest.h>

#include <random>

#include "follmer/error.hpp"
#include "follmer/paths.hpp"
#include "follmer/scenario.hpp"
#include "support.hpp"

using namespace follmer;
using namespace follmer::testing;

namespace {

// skeleton f(t) = t on [0, 1] with a jump +2 at 0.5
CadlagPath ramp_with_jump() { return scalar_linear({0.0, 1.0}, {0.0, 1.0}, 1.0, {Jump{0.5, scalar(2.0)}}); }

}  // namespace

TEST(CadlagPath, ValueAndLeftLimit) {
    const auto x = ramp_with_jump();
    EXPECT_DOUBLE_EQ(x.value(0.75)[0], 2.75);
    EXPECT_DOUBLE_EQ(x.value(0.5)[0], 2.5);
    EXPECT_DOUBLE_EQ(x.left_limit(0.5)[0], 0.5);
    EXPECT_DOUBLE_EQ(x.jump_at(0.5)[0], 2.0);
    EXPECT_DOUBLE_EQ(x.jump_at(0.25)[0], 0.0);
    EXPECT_DOUBLE_EQ(x.value(0.0)[0], 0.0);
    EXPECT_DOUBLE_EQ(x.left_limit(0.3)[0], x.value(0.3)[0]);
    EXPECT_THROW(x.left_limit(0.0), ContractError);
    EXPECT_THROW(x.value(1.5), ContractError);

    const auto r2 = NormedSpace::l2(2);
    const Vector v(r2, {1.0, -2.0});
    const auto step = CadlagPath::pure_jump(Vector(r2), 2.0, {Jump{1.0, v}});
    EXPECT_EQ(step.value(1.0)[1], -2.0);
    EXPECT_TRUE(step.left_limit(1.0).is_zero());
}

TEST(CadlagPath, ConstructorNormalisesJumps) {
    EXPECT_THROW(scalar_linear({0.0, 1.0}, {0.0, 0.0}, 1.0, {Jump{0.0, scalar(1.0)}}), ContractError);
    EXPECT_THROW(scalar_linear({0.0, 1.0}, {0.0, 0.0}, 1.0, {Jump{1.5, scalar(1.0)}}), ContractError);
    // equal times merge, cancelling jumps vanish
    const auto x = scalar_linear({0.0, 1.0}, {0.0, 0.0}, 1.0,
                                 {Jump{0.5, scalar(1.0)}, Jump{0.5, scalar(0.25)}, Jump{0.7, scalar(1.0)},
                                  Jump{0.7, scalar(-1.0)}});
    ASSERT_EQ(x.jumps().size(), 1u);
    EXPECT_DOUBLE_EQ(x.jumps()[0].delta[0], 1.25);
    EXPECT_FALSE(x.is_jump_time(0.7));
}

TEST(CadlagPath, StepSkeletonBecomesJumps) {
    const auto r = NormedSpace::l2(1);
    const CadlagPath x(r, 1.0, {0.0, 0.25, 0.5, 1.0}, {scalar(1.0), scalar(3.0), scalar(2.0), scalar(2.0)},
                       Interpolation::StepRight);
    EXPECT_DOUBLE_EQ(x.value(0.1)[0], 1.0);
    EXPECT_DOUBLE_EQ(x.value(0.25)[0], 3.0);
    EXPECT_DOUBLE_EQ(x.left_limit(0.25)[0], 1.0);
    EXPECT_DOUBLE_EQ(x.value(0.9)[0], 2.0);
    EXPECT_EQ(x.jump_times(), (std::vector<double>{0.25, 0.5}));
}

TEST(CadlagPath, JumpConsistencyAndRightContinuity) {
    std::mt19937_64 rng(1);
    const auto x = random_path(rng, NormedSpace::l2(2), 1.0, 9, 5);
    for (double s : x.event_times()) {
        if (s == 0.0) continue;
        const Vector d = x.value(s) - x.left_limit(s);
        EXPECT_LT(max_abs_diff(d, x.jump_at(s)), 1e-14);
        if (s < 1.0) EXPECT_LT((x.value(s + 1e-12) - x.value(s)).norm(), 1e-9);
    }
}

TEST(JumpSets, FilterAndTruncation) {
    const auto x = CadlagPath::pure_jump(scalar(0.0), 1.0, {Jump{0.2, scalar(0.5)}, Jump{0.6, scalar(-2.0)}});
    const auto big = jump_set(x, 1.0, 1.0);
    ASSERT_EQ(big.size(), 1u);
    EXPECT_DOUBLE_EQ(big[0].time, 0.6);
    EXPECT_TRUE(jump_set(x, 3.0, 1.0).empty());
    EXPECT_EQ(jump_set(x, 0.5, 1.0).size(), 2u);
    EXPECT_EQ(jump_set(x, 0.1, 0.5).size(), 1u);

    std::mt19937_64 rng(9);
    const auto y = random_path(rng, NormedSpace::l2(3), 2.0, 5, 12);
    std::vector<double> norms;
    for (const auto& j : y.jumps()) norms.push_back(j.delta.norm());
    std::vector<double> sorted = norms;
    std::sort(sorted.begin(), sorted.end());
    const double eps = sorted[sorted.size() / 2];
    std::size_t expected = 0;
    for (double n : norms) expected += n >= eps;
    EXPECT_EQ(jump_set(y, eps, 2.0).size(), expected);

    const auto all = jump_truncation(y, y.jump_times());
    EXPECT_TRUE(all.remainder.jumps().empty());
    const auto none = jump_truncation(y, {});
    EXPECT_TRUE(none.removed.jumps().empty());
    const auto first = jump_truncation(y, {y.jump_times()[0]});
    EXPECT_EQ(first.removed.jumps().size(), 1u);
    for (double t : {0.3, 1.1, 2.0})
        EXPECT_LT(max_abs_diff(first.removed.value(t) + first.remainder.value(t), y.value(t)), 1e-13);
    EXPECT_THROW(jump_truncation(y, {0.123456789}), ContractError);
    EXPECT_TRUE(remove_large_jumps(y, 0.0 + 1e-300).jumps().empty());
}

TEST(Oscillation, Examples) {
    const auto x = scalar_step(1.0, 1.0, 2.0);
    EXPECT_DOUBLE_EQ(oscillation(x, 0.5, 1.5, 2.0, OscillationMode::HalfOpenRight), 1.0);
    EXPECT_DOUBLE_EQ(oscillation(x, 0.5, 1.0, 2.0, OscillationMode::OpenInterior), 0.0);
    EXPECT_DOUBLE_EQ(oscillation(x, 0.5, 1.0, 2.0, OscillationMode::HalfOpenRight), 1.0);

    const auto ramp = scalar_linear({0.0, 1.0}, {0.0, 1.0}, 1.0);
    EXPECT_NEAR(oscillation(ramp, 0.2, 0.7, 1.0, OscillationMode::OpenInterior), 0.5, 1e-15);
    EXPECT_NEAR(oscillation(ramp, 0.2, 0.7, 0.5, OscillationMode::OpenInterior), 0.3, 1e-15);
}

TEST(Oscillation, MinusNeverExceedsPlus) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 20; ++k) {
        const auto x = random_path(rng, NormedSpace::l2(2), 1.0, 6, 4);
        std::vector<double> pts{0.0};
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 6; ++i) pts.push_back(u(rng));
        pts.push_back(1.0);
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        const Partition pi(pts);
        for (double t : {0.3, 0.77, 1.0}) {
            const auto o = partition_oscillation(x, pi, t);
            EXPECT_LE(o.minus, o.plus + 1e-15);
        }
    }
    // continuous monotone skeleton collapses the two
    const auto ramp = scalar_linear({0.0, 1.0}, {0.0, 1.0}, 1.0);
    const auto o = partition_oscillation(ramp, Partition({0.0, 0.3, 1.0}), 1.0);
    EXPECT_NEAR(o.plus, o.minus, 1e-15);
}

TEST(Variation, KnownValuesAndAdditivity) {
    EXPECT_NEAR(total_variation(scalar_linear({0.0, 1.0}, {0.0, 1.0}, 1.0), 0.0, 1.0), 1.0, 1e-15);
    const auto pj = CadlagPath::pure_jump(scalar(0.0), 1.0, {Jump{0.2, scalar(0.5)}, Jump{0.6, scalar(-2.0)}});
    EXPECT_DOUBLE_EQ(total_variation(pj, 0.0, 1.0), 2.5);
    EXPECT_DOUBLE_EQ(total_variation(pj, 0.2, 1.0), 2.0);  // ]a, b] excludes the jump at a

    // zig-zag against refinement of partition sums
    const auto zz = scalar_linear({0.0, 0.25, 0.5, 0.75, 1.0}, {0.0, 1.0, -0.5, 0.5, 0.25}, 1.0,
                                  {Jump{0.6, scalar(0.3)}});
    double brute = 0.0;
    const int m = 1 << 14;
    for (int i = 0; i < m; ++i) brute += std::abs(zz.value((i + 1.0) / m)[0] - zz.value(double(i) / m)[0]);
    EXPECT_NEAR(total_variation(zz, 0.0, 1.0), brute, 1e-10);

    std::mt19937_64 rng(12);
    const auto x = random_path(rng, NormedSpace::l1(2), 3.0, 7, 6);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int k = 0; k < 100; ++k) {
        double a = u(rng), b = u(rng), c = u(rng);
        if (a > b) std::swap(a, b);
        if (b > c) std::swap(b, c);
        if (a > b) std::swap(a, b);
        EXPECT_NEAR(total_variation(x, a, c), total_variation(x, a, b) + total_variation(x, b, c), 1e-12);
    }
}

TEST(Decomposition, Recomposition) {
    std::mt19937_64 rng(2);
    const auto x = random_path(rng, NormedSpace::l2(2), 1.0, 8, 5);
    const auto d = jump_decomposition(x);
    EXPECT_TRUE(d.continuous_part.path().jumps().empty());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double t = u(rng);
        EXPECT_LT(max_abs_diff(d.continuous_part.path().value(t) + d.jump_part.path().value(t), x.value(t)), 1e-12);
    }
    const auto pj = CadlagPath::pure_jump(scalar(1.5), 1.0, {Jump{0.5, scalar(1.0)}});
    const auto dp = jump_decomposition(pj);
    EXPECT_DOUBLE_EQ(dp.continuous_part.path().value(0.9)[0], 1.5);
    const auto cont = jump_decomposition(scalar_linear({0.0, 1.0}, {0.0, 1.0}, 1.0));
    EXPECT_TRUE(cont.jump_part.path().value(1.0).is_zero());
}

TEST(PathAlgebra, CombinationPairMap) {
    std::mt19937_64 rng(8);
    const auto x = random_path(rng, NormedSpace::l2(2), 1.0, 5, 2);
    const auto y = random_path(rng, NormedSpace::l2(2), 1.0, 7, 3);
    const auto z = linear_combination(2.0, x, -0.5, y);
    const auto p = pair(x, y);
    LinearMap swap(NormedSpace::l2(2), NormedSpace::l2(2), {0, 1, 1, 0});
    const auto m = map_linear(swap, x);
    for (double t : {0.0, 0.13, 0.5, 0.99, 1.0}) {
        EXPECT_LT(max_abs_diff(z.value(t), 2.0 * x.value(t) - 0.5 * y.value(t)), 1e-13);
        EXPECT_EQ(p.value(t)[2], y.value(t)[0]);
        EXPECT_EQ(m.value(t)[0], x.value(t)[1]);
        if (t > 0) EXPECT_LT(max_abs_diff(z.left_limit(t), 2.0 * x.left_limit(t) - 0.5 * y.left_limit(t)), 1e-13);
    }
    EXPECT_DOUBLE_EQ(p.space().kind() == NormKind::DirectSum ? 1.0 : 0.0, 1.0);
}

TEST(PathFunction, ComposeKeepsLeftLimits) {
    const auto x = ramp_with_jump();
    const PathFunction sq = PathFunction(x).compose(NormedSpace::l2(1), [](const Vector& v) {
        return Vector(v.space(), {v[0] * v[0]});
    });
    EXPECT_DOUBLE_EQ(sq.value(0.5)[0], 6.25);
    EXPECT_DOUBLE_EQ(sq.left_limit(0.5)[0], 0.25);
    EXPECT_FALSE(sq.piecewise_linear());
}

TEST(Serialization, ExplicitRoundTripIsExact) {
    std::mt19937_64 rng(31);
    for (int k = 0; k < 10; ++k) {
        const auto x = random_path(rng, NormedSpace::l2(3), 1.7, 6, 4);
        const auto back = build_path(json::parse(path_to_json(x).dump()), 0);
        ASSERT_EQ(back.knot_times(), x.knot_times());
        ASSERT_EQ(back.jump_times(), x.jump_times());
        for (double t : x.event_times()) {
            EXPECT_EQ(max_abs_diff(back.value(t), x.value(t)), 0.0);
            if (t > 0) EXPECT_EQ(max_abs_diff(back.left_limit(t), x.left_limit(t)), 0.0);
        }
        EXPECT_TRUE(back.space() == x.space());
    }
}
