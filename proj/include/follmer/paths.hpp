#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "follmer/partition.hpp"
#include "follmer/spaces.hpp"

namespace follmer {

enum class Interpolation { Linear, StepRight };

struct Jump {
    double time;
    Vector delta;
};

/// Càdlàg path on [0, T]: a continuous skeleton through knots plus a finite
/// list of jumps at times in ]0, T].
///
/// A StepRight skeleton (value v_i on [t_i, t_{i+1})) is stored as a constant
/// skeleton plus jumps v_i - v_{i-1} at the knots, so after construction the
/// skeleton is always piecewise linear and continuous.
class CadlagPath {
public:
    CadlagPath(NormedSpace space, double horizon, std::vector<double> knot_times, std::vector<Vector> knot_values,
               Interpolation interpolation = Interpolation::Linear, std::vector<Jump> jumps = {});

    static CadlagPath constant(const Vector& value, double horizon);
    static CadlagPath pure_jump(const Vector& start, double horizon, std::vector<Jump> jumps);

    const NormedSpace& space() const { return space_; }
    std::size_t dim() const { return space_.dim(); }
    double horizon() const { return horizon_; }
    const std::vector<double>& knot_times() const { return knots_; }
    Vector knot_value(std::size_t i) const;
    const std::vector<Jump>& jumps() const { return jumps_; }
    const std::vector<double>& jump_times() const { return jump_times_; }
    /// Knot times and jump times, sorted and deduplicated.
    const std::vector<double>& event_times() const { return events_; }

    Vector value(double t) const;
    Vector left_limit(double t) const;
    Vector jump_at(double t) const;
    Vector skeleton_value(double t) const;
    bool is_jump_time(double t) const;
    double max_jump_norm() const;

    void value_into(double t, std::span<double> out) const;
    void left_limit_into(double t, std::span<double> out) const;
    void skeleton_into(double t, std::span<double> out) const;

private:
    void check_time(double t) const;

    NormedSpace space_;
    double horizon_;
    std::vector<double> knots_;
    std::vector<double> knot_values_;  // flattened, knots x dim
    std::vector<Jump> jumps_;
    std::vector<double> jump_times_;
    std::vector<double> jump_prefix_;  // (jumps + 1) x dim running sums
    std::vector<double> events_;
};

/// A càdlàg path whose skeleton is piecewise linear; every CadlagPath
/// representation qualifies, the wrapper only records the intent.
class FVPath {
public:
    explicit FVPath(CadlagPath path) : path_(std::move(path)) {}
    const CadlagPath& path() const { return path_; }
    operator const CadlagPath&() const { return path_; }

private:
    CadlagPath path_;
};

/// Jumps in ]0, t] with norm >= eps, in time order.
std::vector<Jump> jump_set(const CadlagPath& x, double eps, double t);

struct JumpTruncation {
    CadlagPath removed;    // J_D(X), starts at 0
    CadlagPath remainder;  // X - J_D(X)
};

JumpTruncation jump_truncation(const CadlagPath& x, const std::vector<double>& times);
/// X - J_eps(X): removes every jump with norm >= eps.
CadlagPath remove_large_jumps(const CadlagPath& x, double eps);

enum class OscillationMode { HalfOpenRight, OpenInterior };

/// sup |X(u) - X(v)| over ]r,s] ∩ [0,t] (HalfOpenRight) or [r,s[ ∩ [0,t]
/// (OpenInterior).
double oscillation(const CadlagPath& x, double r, double s, double t, OscillationMode mode);

/// Diameter of X over [lo, hi] (hi_closed) or [lo, hi[.
double diameter(const CadlagPath& x, double lo, double hi, bool hi_closed);

struct PartitionOscillation {
    double plus;
    double minus;
};

PartitionOscillation partition_oscillation(const CadlagPath& x, const Partition& pi, double t);

double total_variation(const CadlagPath& a, double from, double to);

struct JumpDecomposition {
    FVPath continuous_part;
    FVPath jump_part;
};

JumpDecomposition jump_decomposition(const CadlagPath& a);

/// a X + b Y on the union of the knot grids.
CadlagPath linear_combination(double a, const CadlagPath& x, double b, const CadlagPath& y);
CadlagPath operator+(const CadlagPath& x, const CadlagPath& y);
CadlagPath operator-(const CadlagPath& x, const CadlagPath& y);

/// (X, Y) in the direct sum of the two spaces.
CadlagPath pair(const CadlagPath& x, const CadlagPath& y);

/// L X, for a linear map L on the path's space.
CadlagPath map_linear(const LinearMap& map, const CadlagPath& x);

/// Type-erased càdlàg path given by value and left-limit callables, used for
/// integrands such as s -> D_x f(A_s, X_s).
class PathFunction {
public:
    using Eval = std::function<Vector(double)>;

    PathFunction(const CadlagPath& path);  // NOLINT: implicit by design
    PathFunction(NormedSpace space, double horizon, Eval value, Eval left_limit, std::vector<double> breaks,
                 std::vector<double> jump_times, bool piecewise_linear = false);

    const NormedSpace& space() const { return space_; }
    double horizon() const { return horizon_; }
    Vector value(double t) const { return value_(t); }
    Vector left_limit(double t) const { return left_(t); }
    /// Times where the function may fail to be smooth (including jumps).
    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<double>& jump_times() const { return jump_times_; }
    bool piecewise_linear() const { return linear_; }

    /// s -> f(self(s)).
    PathFunction compose(NormedSpace codomain, std::function<Vector(const Vector&)> f) const;
    static PathFunction pair(const PathFunction& a, const PathFunction& b);

private:
    NormedSpace space_;
    double horizon_;
    Eval value_;
    Eval left_;
    std::vector<double> breaks_;
    std::vector<double> jump_times_;
    bool linear_;
};

}  // namespace follmer
