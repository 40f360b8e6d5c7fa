#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "follmer/paths.hpp"
#include "follmer/spaces.hpp"

namespace follmer::testing {

inline Vector random_vector(std::mt19937_64& rng, const NormedSpace& s, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    std::vector<double> c(s.dim());
    for (auto& v : c) v = n(rng);
    return Vector(s, std::move(c));
}

/// Piecewise-linear path on a uniform knot grid with a few jumps at random times.
inline CadlagPath random_path(std::mt19937_64& rng, const NormedSpace& s, double horizon, std::size_t knots,
                              std::size_t jumps) {
    std::vector<double> times;
    std::vector<Vector> values;
    for (std::size_t i = 0; i < knots; ++i) {
        times.push_back(i + 1 == knots ? horizon : horizon * double(i) / double(knots - 1));
        values.push_back(random_vector(rng, s));
    }
    std::uniform_real_distribution<double> u(0.01, horizon);
    std::vector<Jump> js;
    for (std::size_t i = 0; i < jumps; ++i) js.push_back(Jump{u(rng), random_vector(rng, s)});
    return CadlagPath(s, horizon, times, values, Interpolation::Linear, js);
}

inline CadlagPath scalar_step(double time, double size, double horizon) {
    const auto r = NormedSpace::l2(1);
    return CadlagPath::pure_jump(Vector(r), horizon, {Jump{time, Vector(r, {size})}});
}

inline CadlagPath scalar_linear(std::vector<double> times, std::vector<double> values, double horizon,
                                std::vector<Jump> jumps = {}) {
    const auto r = NormedSpace::l2(1);
    std::vector<Vector> v;
    for (double x : values) v.push_back(Vector(r, {x}));
    return CadlagPath(r, horizon, std::move(times), std::move(v), Interpolation::Linear, std::move(jumps));
}

inline Vector scalar(double x) { return Vector(NormedSpace::l2(1), {x}); }

inline double max_abs_diff(const Vector& a, const Vector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace follmer::testing
