#include "follmer/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "follmer/error.hpp"

namespace follmer {

const char* to_string(Verdict v) { return v == Verdict::ConvergingToZero ? "converging-to-0" : "stalled"; }

bool converges_to_zero(std::span<const double> values, const StallRule& rule) {
    if (values.empty()) return false;
    const std::size_t w = std::min(rule.window, values.size());
    const auto tail = values.subspan(values.size() - w);
    double tail_max = 0.0;
    for (double v : tail) {
        if (!std::isfinite(v)) return false;
        tail_max = std::max(tail_max, std::abs(v));
    }
    if (tail_max < rule.tol_limit) return true;
    if (values.size() < rule.window + 1) return false;
    for (std::size_t i = values.size() - rule.window; i < values.size(); ++i) {
        if (!(std::abs(values[i]) * rule.ratio <= std::abs(values[i - 1]))) return false;
    }
    return true;
}

ConvergenceTrace::ConvergenceTrace(NormedSpace space) : space_(std::move(space)) {}

void ConvergenceTrace::push(int n, double mesh, double t, const Vector& value) {
    require(value.dim() == space_.dim(), "ConvergenceTrace: value has wrong dimension");
    TraceEntry e{n, mesh, t, std::vector<double>(value.coords().begin(), value.coords().end()),
                 std::numeric_limits<double>::quiet_NaN()};
    if (!entries_.empty()) {
        std::vector<double> diff(e.value);
        const auto& prev = entries_.back().value;
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= prev[i];
        e.delta_norm = norm(space_, diff);
    }
    entries_.push_back(std::move(e));
}

Vector ConvergenceTrace::value(std::size_t i) const { return Vector(space_, entries_.at(i).value); }

Vector ConvergenceTrace::last() const {
    require(!entries_.empty(), "ConvergenceTrace: empty trace");
    return value(entries_.size() - 1);
}

std::vector<double> ConvergenceTrace::norms() const {
    std::vector<double> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(norm(space_, e.value));
    return out;
}

std::vector<double> ConvergenceTrace::deltas() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < entries_.size(); ++i) out.push_back(entries_[i].delta_norm);
    return out;
}

Verdict ConvergenceTrace::zero_verdict(const StallRule& rule) const { return verdict_of(norms(), rule); }

LimitEstimate ConvergenceTrace::limit(const StallRule& rule) const {
    const auto d = deltas();
    double unc = 0.0;
    const std::size_t w = std::min(rule.window, d.size());
    for (std::size_t i = d.size() - w; i < d.size(); ++i) unc = std::max(unc, d[i]);
    return LimitEstimate{last(), unc, !d.empty() && converges_to_zero(d, rule)};
}

}  // namespace follmer
