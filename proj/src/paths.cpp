#include "follmer/paths.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "follmer/error.hpp"

namespace follmer {

namespace {

std::vector<Jump> normalize_jumps(const NormedSpace& space, double horizon, std::vector<Jump> jumps) {
    for (const auto& j : jumps) {
        require(std::isfinite(j.time), "CadlagPath: non-finite jump time");
        require(j.time > 0.0, "CadlagPath: jumps must occur at times > 0");
        require(j.time <= horizon, "CadlagPath: jump time beyond the horizon");
        require(j.delta.dim() == space.dim(), "CadlagPath: jump vector has wrong dimension");
    }
    std::stable_sort(jumps.begin(), jumps.end(), [](const Jump& a, const Jump& b) { return a.time < b.time; });
    std::vector<Jump> merged;
    for (auto& j : jumps) {
        if (!merged.empty() && merged.back().time == j.time) {
            merged.back().delta += j.delta;
        } else {
            merged.push_back(Jump{j.time, j.delta.in(space)});
        }
    }
    std::vector<Jump> out;
    for (auto& j : merged)
        if (!j.delta.is_zero()) out.push_back(std::move(j));
    return out;
}

std::vector<double> sorted_union(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

CadlagPath::CadlagPath(NormedSpace space, double horizon, std::vector<double> knot_times,
                       std::vector<Vector> knot_values, Interpolation interpolation, std::vector<Jump> jumps)
    : space_(std::move(space)), horizon_(horizon) {
    require(std::isfinite(horizon_) && horizon_ > 0.0, "CadlagPath: horizon must be positive and finite");
    require(knot_times.size() == knot_values.size(), "CadlagPath: knot times and values differ in length");
    require(knot_times.size() >= 2, "CadlagPath: at least two knots required");
    require(knot_times.front() == 0.0, "CadlagPath: first knot must be at 0");
    require(knot_times.back() == horizon_, "CadlagPath: last knot must be at the horizon");
    for (std::size_t i = 0; i < knot_times.size(); ++i) {
        require(std::isfinite(knot_times[i]), "CadlagPath: non-finite knot time");
        if (i > 0) require(knot_times[i] > knot_times[i - 1], "CadlagPath: knot times must be strictly increasing");
        require(knot_values[i].dim() == space_.dim(), "CadlagPath: knot value has wrong dimension");
    }

    if (interpolation == Interpolation::StepRight) {
        for (std::size_t i = 1; i < knot_times.size(); ++i)
            jumps.push_back(Jump{knot_times[i], knot_values[i] - knot_values[i - 1]});
        knots_ = {0.0, horizon_};
        knot_values_.assign(knot_values[0].coords().begin(), knot_values[0].coords().end());
        knot_values_.insert(knot_values_.end(), knot_values[0].coords().begin(), knot_values[0].coords().end());
    } else {
        knots_ = std::move(knot_times);
        knot_values_.reserve(knots_.size() * space_.dim());
        for (const auto& v : knot_values) knot_values_.insert(knot_values_.end(), v.coords().begin(), v.coords().end());
    }

    jumps_ = normalize_jumps(space_, horizon_, std::move(jumps));
    const std::size_t d = space_.dim();
    jump_prefix_.assign((jumps_.size() + 1) * d, 0.0);
    jump_times_.reserve(jumps_.size());
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
        jump_times_.push_back(jumps_[k].time);
        for (std::size_t i = 0; i < d; ++i) jump_prefix_[(k + 1) * d + i] = jump_prefix_[k * d + i] + jumps_[k].delta[i];
    }
    events_ = sorted_union(knots_, jump_times_);
}

CadlagPath CadlagPath::constant(const Vector& value, double horizon) {
    return CadlagPath(value.space(), horizon, {0.0, horizon}, {value, value});
}

CadlagPath CadlagPath::pure_jump(const Vector& start, double horizon, std::vector<Jump> jumps) {
    return CadlagPath(start.space(), horizon, {0.0, horizon}, {start, start}, Interpolation::Linear, std::move(jumps));
}

Vector CadlagPath::knot_value(std::size_t i) const {
    require(i < knots_.size(), "CadlagPath::knot_value: index out of range");
    const std::size_t d = space_.dim();
    return Vector(space_, std::vector<double>(knot_values_.begin() + static_cast<std::ptrdiff_t>(i * d),
                                              knot_values_.begin() + static_cast<std::ptrdiff_t>((i + 1) * d)));
}

void CadlagPath::check_time(double t) const {
    require(t >= 0.0 && t <= horizon_, "CadlagPath: time outside [0, T]");
}

void CadlagPath::skeleton_into(double t, std::span<double> out) const {
    check_time(t);
    const std::size_t d = space_.dim();
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const auto k = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double* a = &knot_values_[k * d];
    if (k + 1 == knots_.size() || t == knots_[k]) {
        std::copy(a, a + d, out.begin());
        return;
    }
    const double* b = &knot_values_[(k + 1) * d];
    const double w = (t - knots_[k]) / (knots_[k + 1] - knots_[k]);
    for (std::size_t i = 0; i < d; ++i) out[i] = a[i] + w * (b[i] - a[i]);
}

void CadlagPath::value_into(double t, std::span<double> out) const {
    skeleton_into(t, out);
    const auto j = static_cast<std::size_t>(std::upper_bound(jump_times_.begin(), jump_times_.end(), t) -
                                            jump_times_.begin());
    const std::size_t d = space_.dim();
    for (std::size_t i = 0; i < d; ++i) out[i] += jump_prefix_[j * d + i];
}

void CadlagPath::left_limit_into(double t, std::span<double> out) const {
    require(t > 0.0, "CadlagPath::left_limit: undefined at t = 0");
    skeleton_into(t, out);
    const auto j = static_cast<std::size_t>(std::lower_bound(jump_times_.begin(), jump_times_.end(), t) -
                                            jump_times_.begin());
    const std::size_t d = space_.dim();
    for (std::size_t i = 0; i < d; ++i) out[i] += jump_prefix_[j * d + i];
}

Vector CadlagPath::value(double t) const {
    Vector v(space_);
    value_into(t, v.coords());
    return v;
}

Vector CadlagPath::left_limit(double t) const {
    Vector v(space_);
    left_limit_into(t, v.coords());
    return v;
}

Vector CadlagPath::skeleton_value(double t) const {
    Vector v(space_);
    skeleton_into(t, v.coords());
    return v;
}

bool CadlagPath::is_jump_time(double t) const {
    return std::binary_search(jump_times_.begin(), jump_times_.end(), t);
}

Vector CadlagPath::jump_at(double t) const {
    check_time(t);
    const auto it = std::lower_bound(jump_times_.begin(), jump_times_.end(), t);
    if (it == jump_times_.end() || *it != t) return Vector(space_);
    return jumps_[static_cast<std::size_t>(it - jump_times_.begin())].delta;
}

double CadlagPath::max_jump_norm() const {
    double m = 0.0;
    for (const auto& j : jumps_) m = std::max(m, j.delta.norm());
    return m;
}

// ---------------------------------------------------------------------------

std::vector<Jump> jump_set(const CadlagPath& x, double eps, double t) {
    require(eps > 0.0, "jump_set: eps must be positive");
    std::vector<Jump> out;
    for (const auto& j : x.jumps()) {
        if (j.time > t) break;
        if (j.delta.norm() >= eps) out.push_back(j);
    }
    return out;
}

JumpTruncation jump_truncation(const CadlagPath& x, const std::vector<double>& times) {
    std::vector<double> d(times);
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    for (double s : d) require(x.is_jump_time(s), "jump_truncation: time is not a jump time of the path");
    std::vector<Jump> removed, kept;
    for (const auto& j : x.jumps()) {
        (std::binary_search(d.begin(), d.end(), j.time) ? removed : kept).push_back(j);
    }
    std::vector<Vector> values;
    for (std::size_t i = 0; i < x.knot_times().size(); ++i) values.push_back(x.knot_value(i));
    return JumpTruncation{CadlagPath::pure_jump(Vector(x.space()), x.horizon(), std::move(removed)),
                          CadlagPath(x.space(), x.horizon(), x.knot_times(), values, Interpolation::Linear,
                                     std::move(kept))};
}

CadlagPath remove_large_jumps(const CadlagPath& x, double eps) {
    std::vector<double> times;
    for (const auto& j : jump_set(x, eps, x.horizon())) times.push_back(j.time);
    return jump_truncation(x, times).remainder;
}

double diameter(const CadlagPath& x, double lo, double hi, bool hi_closed) {
    if (hi < lo || (hi == lo && !hi_closed)) return 0.0;
    const std::size_t d = x.dim();
    std::vector<double> pts;
    std::vector<double> buf(d);
    auto push_value = [&](double s) {
        x.value_into(s, buf);
        pts.insert(pts.end(), buf.begin(), buf.end());
    };
    auto push_left = [&](double s) {
        x.left_limit_into(s, buf);
        pts.insert(pts.end(), buf.begin(), buf.end());
    };
    push_value(lo);
    const auto& ev = x.event_times();
    for (auto it = std::upper_bound(ev.begin(), ev.end(), lo); it != ev.end() && *it < hi; ++it) {
        if (x.is_jump_time(*it)) push_left(*it);
        push_value(*it);
    }
    if (hi > lo) {
        push_left(hi);
        if (hi_closed) push_value(hi);
    }
    const std::size_t count = pts.size() / d;
    if (d == 1) {
        const auto [mn, mx] = std::minmax_element(pts.begin(), pts.end());
        return *mx - *mn;
    }
    // a single varying coordinate k reduces to the scalar case: |c e_k| = |c| |e_k|
    std::size_t varying = 0, k = 0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t a = 1; a < count; ++a)
            if (pts[a * d + i] != pts[i]) {
                ++varying;
                k = i;
                break;
            }
    if (varying == 0) return 0.0;
    std::vector<double> diff(d);
    if (varying == 1) {
        double mn = pts[k], mx = pts[k];
        for (std::size_t a = 1; a < count; ++a) {
            mn = std::min(mn, pts[a * d + k]);
            mx = std::max(mx, pts[a * d + k]);
        }
        diff[k] = mx - mn;
        return norm(x.space(), diff);
    }
    double best = 0.0;
    for (std::size_t a = 0; a < count; ++a)
        for (std::size_t b = a + 1; b < count; ++b) {
            for (std::size_t i = 0; i < d; ++i) diff[i] = pts[a * d + i] - pts[b * d + i];
            best = std::max(best, norm(x.space(), diff));
        }
    return best;
}

double oscillation(const CadlagPath& x, double r, double s, double t, OscillationMode mode) {
    require(r >= 0.0 && r < s, "oscillation: need 0 <= r < s");
    require(t >= 0.0 && t <= x.horizon(), "oscillation: t outside [0, T]");
    const double top = std::min(s, x.horizon());
    if (mode == OscillationMode::HalfOpenRight) {
        const double b = std::min(top, t);
        if (b <= r) return 0.0;
        // sup over ]r,b] equals sup over [r,b] by right continuity at r
        return diameter(x, r, b, true);
    }
    if (r > t) return 0.0;
    if (t < s) return diameter(x, r, t, true);
    return diameter(x, r, top, false);
}

PartitionOscillation partition_oscillation(const CadlagPath& x, const Partition& pi, double t) {
    require(pi.horizon() >= t, "partition_oscillation: partition does not cover [0, t]");
    PartitionOscillation out{0.0, 0.0};
    for (std::size_t i = 0; i < pi.intervals(); ++i) {
        const double r = pi.left(i), s = pi.right(i);
        if (r >= t) break;
        const double sp = std::min(s, x.horizon());
        out.plus = std::max(out.plus, oscillation(x, r, sp, t, OscillationMode::HalfOpenRight));
        out.minus = std::max(out.minus, oscillation(x, r, sp, t, OscillationMode::OpenInterior));
    }
    return out;
}

double total_variation(const CadlagPath& a, double from, double to) {
    require(from <= to, "total_variation: need a <= b");
    require(from >= 0.0 && to <= a.horizon(), "total_variation: interval outside [0, T]");
    if (from == to) return 0.0;
    double v = 0.0;
    const auto& knots = a.knot_times();
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double lo = std::max(from, knots[k]), hi = std::min(to, knots[k + 1]);
        if (hi <= lo) continue;
        v += (a.skeleton_value(hi) - a.skeleton_value(lo)).norm();
    }
    for (const auto& j : a.jumps())
        if (j.time > from && j.time <= to) v += j.delta.norm();
    return v;
}

JumpDecomposition jump_decomposition(const CadlagPath& a) {
    std::vector<Vector> values;
    for (std::size_t i = 0; i < a.knot_times().size(); ++i) values.push_back(a.knot_value(i));
    CadlagPath cont(a.space(), a.horizon(), a.knot_times(), values);
    CadlagPath jumps = CadlagPath::pure_jump(Vector(a.space()), a.horizon(), a.jumps());
    return JumpDecomposition{FVPath(std::move(cont)), FVPath(std::move(jumps))};
}

CadlagPath linear_combination(double a, const CadlagPath& x, double b, const CadlagPath& y) {
    require(x.dim() == y.dim(), "linear_combination: paths live in spaces of different dimension");
    require(x.horizon() == y.horizon(), "linear_combination: horizons differ");
    const auto knots = sorted_union(x.knot_times(), y.knot_times());
    std::vector<Vector> values;
    values.reserve(knots.size());
    for (double t : knots) values.push_back(a * x.skeleton_value(t) + b * y.skeleton_value(t).in(x.space()));
    std::vector<Jump> jumps;
    for (const auto& j : x.jumps()) jumps.push_back(Jump{j.time, a * j.delta});
    for (const auto& j : y.jumps()) jumps.push_back(Jump{j.time, b * j.delta.in(x.space())});
    return CadlagPath(x.space(), x.horizon(), knots, values, Interpolation::Linear, std::move(jumps));
}

CadlagPath operator+(const CadlagPath& x, const CadlagPath& y) { return linear_combination(1.0, x, 1.0, y); }
CadlagPath operator-(const CadlagPath& x, const CadlagPath& y) { return linear_combination(1.0, x, -1.0, y); }

namespace {

Vector concat(const NormedSpace& space, const Vector& a, const Vector& b) {
    std::vector<double> c(a.coords().begin(), a.coords().end());
    c.insert(c.end(), b.coords().begin(), b.coords().end());
    return Vector(space, std::move(c));
}

}  // namespace

CadlagPath pair(const CadlagPath& x, const CadlagPath& y) {
    require(x.horizon() == y.horizon(), "pair: horizons differ");
    const auto space = NormedSpace::direct_sum({x.space(), y.space()});
    const auto knots = sorted_union(x.knot_times(), y.knot_times());
    std::vector<Vector> values;
    for (double t : knots) values.push_back(concat(space, x.skeleton_value(t), y.skeleton_value(t)));
    std::vector<Jump> jumps;
    for (const auto& j : x.jumps()) jumps.push_back(Jump{j.time, concat(space, j.delta, Vector(y.space()))});
    for (const auto& j : y.jumps()) jumps.push_back(Jump{j.time, concat(space, Vector(x.space()), j.delta)});
    return CadlagPath(space, x.horizon(), knots, values, Interpolation::Linear, std::move(jumps));
}

CadlagPath map_linear(const LinearMap& map, const CadlagPath& x) {
    require(map.domain().dim() == x.dim(), "map_linear: domain dimension mismatch");
    std::vector<Vector> values;
    for (std::size_t i = 0; i < x.knot_times().size(); ++i) values.push_back(map.apply(x.knot_value(i)));
    std::vector<Jump> jumps;
    for (const auto& j : x.jumps()) jumps.push_back(Jump{j.time, map.apply(j.delta)});
    return CadlagPath(map.codomain(), x.horizon(), x.knot_times(), values, Interpolation::Linear, std::move(jumps));
}

// ---------------------------------------------------------------------------

PathFunction::PathFunction(const CadlagPath& path)
    : space_(path.space()),
      horizon_(path.horizon()),
      breaks_(path.event_times()),
      jump_times_(path.jump_times()),
      linear_(true) {
    auto shared = std::make_shared<const CadlagPath>(path);
    value_ = [shared](double t) { return shared->value(t); };
    left_ = [shared](double t) { return shared->left_limit(t); };
}

PathFunction::PathFunction(NormedSpace space, double horizon, Eval value, Eval left_limit, std::vector<double> breaks,
                           std::vector<double> jump_times, bool piecewise_linear)
    : space_(std::move(space)),
      horizon_(horizon),
      value_(std::move(value)),
      left_(std::move(left_limit)),
      breaks_(std::move(breaks)),
      jump_times_(std::move(jump_times)),
      linear_(piecewise_linear) {
    std::sort(breaks_.begin(), breaks_.end());
    breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
    std::sort(jump_times_.begin(), jump_times_.end());
}

PathFunction PathFunction::compose(NormedSpace codomain, std::function<Vector(const Vector&)> f) const {
    auto inner_value = value_;
    auto inner_left = left_;
    auto fv = [inner_value, f](double t) { return f(inner_value(t)); };
    auto fl = [inner_left, f](double t) { return f(inner_left(t)); };
    return PathFunction(std::move(codomain), horizon_, fv, fl, breaks_, jump_times_, false);
}

PathFunction PathFunction::pair(const PathFunction& a, const PathFunction& b) {
    require(a.horizon() == b.horizon(), "PathFunction::pair: horizons differ");
    const auto space = NormedSpace::direct_sum({a.space(), b.space()});
    auto av = a.value_, al = a.left_, bv = b.value_, bl = b.left_;
    auto v = [space, av, bv](double t) { return concat(space, av(t), bv(t)); };
    auto l = [space, al, bl](double t) { return concat(space, al(t), bl(t)); };
    return PathFunction(space, a.horizon(), v, l, sorted_union(a.breaks(), b.breaks()),
                        sorted_union(a.jump_times(), b.jump_times()), a.piecewise_linear() && b.piecewise_linear());
}

}  // namespace follmer
