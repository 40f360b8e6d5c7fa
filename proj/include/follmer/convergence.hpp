#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "follmer/spaces.hpp"

namespace follmer {

/// Finite surrogate for "lim = 0". A trace passes if the max over its last
/// `window` entries is below `tol_limit`, or if each of those entries is at
/// most the previous one divided by `ratio`.
struct StallRule {
    double tol_limit = 1e-9;
    double ratio = 1.5;
    std::size_t window = 3;
};

enum class Verdict { ConvergingToZero, Stalled };

const char* to_string(Verdict v);

bool converges_to_zero(std::span<const double> values, const StallRule& rule = {});
inline Verdict verdict_of(std::span<const double> values, const StallRule& rule = {}) {
    return converges_to_zero(values, rule) ? Verdict::ConvergingToZero : Verdict::Stalled;
}

struct TraceEntry {
    int n;
    double mesh;
    double t;
    std::vector<double> value;
    double delta_norm;  // |value_n - value_{n-1}|; NaN on the first entry
};

struct LimitEstimate {
    Vector value;
    double uncertainty;  // max of the last `window` successive deltas
    bool established;    // successive deltas pass the stall rule
};

/// Values of a partition-indexed quantity for n = n_0, n_0 + 1, ...
class ConvergenceTrace {
public:
    explicit ConvergenceTrace(NormedSpace space);

    void push(int n, double mesh, double t, const Vector& value);

    const NormedSpace& space() const { return space_; }
    const std::vector<TraceEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    Vector value(std::size_t i) const;
    Vector last() const;

    std::vector<double> norms() const;
    std::vector<double> deltas() const;  // successive deltas, starting at the second entry

    Verdict zero_verdict(const StallRule& rule = {}) const;
    LimitEstimate limit(const StallRule& rule = {}) const;

private:
    NormedSpace space_;
    std::vector<TraceEntry> entries_;
};

}  // namespace follmer
