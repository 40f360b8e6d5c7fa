#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "follmer/convergence.hpp"
#include "follmer/partition.hpp"
#include "follmer/paths.hpp"

namespace follmer {

enum class PartitionKind { Uniform, Dyadic, Integer, OscillationControlled, Custom };

const char* to_string(PartitionKind kind);

/// Deterministic rule n -> pi_n on [0, T].
///
/// Uniform: k0 * growth^n equal intervals. Dyadic: k 2^-n, truncated at T.
/// Integer: {0, 1, ..., floor(T)} plus T, for every n. OscillationControlled:
/// exit-time partition of a path at eps_n = eps0 * ratio^n. Custom: explicit
/// lists, the last list repeated for larger n.
class PartitionSequence {
public:
    static PartitionSequence uniform(double horizon, std::size_t k0, std::size_t growth = 2);
    static PartitionSequence dyadic(double horizon);
    static PartitionSequence integer(double horizon);
    static PartitionSequence oscillation_controlled(const CadlagPath& path, double eps0, double ratio = 0.5);
    static PartitionSequence custom(double horizon, std::vector<std::vector<double>> levels);

    Partition at(int n) const;

    PartitionKind kind() const { return kind_; }
    double horizon() const { return horizon_; }
    std::size_t k0() const { return k0_; }
    std::size_t growth() const { return growth_; }
    double eps0() const { return eps0_; }
    double ratio() const { return ratio_; }
    double eps_at(int n) const;
    const std::vector<std::vector<double>>& levels() const { return levels_; }
    const CadlagPath* path() const { return path_.get(); }

private:
    explicit PartitionSequence(PartitionKind kind, double horizon);

    PartitionKind kind_;
    double horizon_;
    std::size_t k0_ = 1;
    std::size_t growth_ = 2;
    double eps0_ = 1.0;
    double ratio_ = 0.5;
    std::vector<std::vector<double>> levels_;
    std::shared_ptr<const CadlagPath> path_;
};

Partition::Cell locate(const Partition& pi, double t);
double mesh(const Partition& pi);

/// Partition of [0, T] whose intervals satisfy osc(X; [r, s[) < eps. The
/// breakpoints are exit times of the oscillation started at the previous
/// breakpoint, taken at the threshold eps (1 - 1e-9) so the bound is strict.
Partition generate_oscillation_controlled(const CadlagPath& x, double eps);

struct ScalarTrace {
    std::vector<int> n;
    std::vector<double> mesh;
    std::vector<double> values;
    Verdict verdict;
};

/// O^-_t(X; pi_n) for n = 0..n_max.
ScalarTrace controls_oscillation(const PartitionSequence& seq, const CadlagPath& x, double t, int n_max,
                                 const StallRule& rule = {});

struct JumpExhaustion {
    double time;
    bool exhausted;  // a breakpoint of every pi_k, onset <= k <= n_max, over at least `tail` levels
    int onset;       // -1 when the jump is not a breakpoint of pi_{n_max}
};

std::vector<JumpExhaustion> exhausts_jumps(const PartitionSequence& seq, const CadlagPath& x, int n_max,
                                           std::size_t tail = 3);

/// Largest gap of pi_n inside the skeleton segments on which X is not
/// constant, for n = 0..n_max; the verdict is the no-flat-interval part of
/// the oscillation-control characterisation.
ScalarTrace no_flat_interval(const PartitionSequence& seq, const CadlagPath& x, double t, int n_max,
                             const StallRule& rule = {});

struct JumpResidualTrace {
    double time;
    std::vector<double> residuals;  // |delta X_t(pi_n(s)) - Delta X_s|, n = 0..n_max
    Verdict verdict;
};

struct ConditionCReport {
    std::vector<double> eps_grid;
    std::vector<int> c1_onset;  // per eps; -1 when separation fails at the last levels
    bool c1 = false;
    std::vector<JumpResidualTrace> c2_traces;
    bool c2 = false;
    std::vector<std::vector<double>> c3_matrix;  // [eps][n] of O^+_t(X - J_eps(X); pi_n)
    std::vector<double> c3_tail;          // per eps, max over the last three n
    bool c3_monotone = false;
    bool c3 = false;
    bool passes() const { return c1 && c2 && c3; }
};

std::vector<double> default_eps_grid(const CadlagPath& x);

ConditionCReport condition_C_diagnostic(const PartitionSequence& seq, const CadlagPath& x, double t,
                                        std::vector<double> eps_grid, int n_max, const StallRule& rule = {});

/// The step path sum xi(r) 1_{]r,s]}. It is left-continuous, so it is stored
/// as the right-continuous step path `steps` with at(t) = steps(t-) for t > 0.
struct LeftDiscretization {
    CadlagPath steps;
    Vector initial;
    Vector at(double t) const;
};

LeftDiscretization left_discretization(const Partition& pi, const PathFunction& xi);
LeftDiscretization left_discretization(const PartitionSequence& seq, int n, const PathFunction& xi);

struct LeftApproximationReport {
    std::vector<double> times;
    std::vector<std::vector<double>> residuals;  // [time][n] of |xi(under_n(t)) - xi(t-)|
    std::vector<Verdict> verdicts;
    bool passes = false;
};

LeftApproximationReport approximates_from_left(const PartitionSequence& seq, const PathFunction& xi,
                                               const std::vector<double>& sample_times, int n_max,
                                               const StallRule& rule = {});

}  // namespace follmer
