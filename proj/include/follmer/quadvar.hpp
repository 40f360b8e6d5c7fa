#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "follmer/convergence.hpp"
#include "follmer/partitions.hpp"
#include "follmer/paths.hpp"
#include "follmer/spaces.hpp"

namespace follmer {

/// Truncated: sum over ]r,s] of B(X_{s∧t} - X_{r∧t}, Y_{s∧t} - Y_{r∧t}).
/// IndicatorLeft: sum over ]r,s] with r < t of B(X_s - X_r, Y_s - Y_r).
enum class QVConvention { Truncated, IndicatorLeft };

const char* to_string(QVConvention c);

Vector discrete_qv(const CadlagPath& x, const CadlagPath& y, const BilinearMap& b, const Partition& pi, double t,
                   QVConvention convention = QVConvention::Truncated);

/// Left limit in t of the truncated sum, i.e. the sum with X_t, Y_t replaced
/// by X_{t-}, Y_{t-}.
Vector discrete_qv_left(const CadlagPath& x, const CadlagPath& y, const BilinearMap& b, const Partition& pi,
                        double t);

/// sum over ]r,s] of |X_{s∧t} - X_{r∧t}|^2.
double discrete_scalar_qv(const CadlagPath& x, const Partition& pi, double t);

/// Default evaluation grid: 33 uniform points on [0, T] plus s - h, s, s + h
/// (h = T / 1024) for up to eight of the largest jumps.
std::vector<double> default_t_grid(const CadlagPath& x, const CadlagPath& y);

struct QVRequest {
    CadlagPath x;
    CadlagPath y;
    BilinearMap b;
    PartitionSequence seq;
    std::vector<double> t_grid;  // empty: default grid
    QVConvention convention = QVConvention::Truncated;
    int n_max = 12;
    std::vector<Vector> functionals;  // weak mode: test functionals in G (coordinate pairing)
    StallRule rule = {};
};

struct QVPoint {
    double t;
    ConvergenceTrace trace;
    LimitEstimate limit;
};

struct JumpCheck {
    double time;
    Vector expected;                // B(Delta X_s, Delta Y_s)
    std::vector<double> residuals;  // per n: |Delta Q^{pi_n}_s - B(Delta X_s, Delta Y_s)|
    Verdict verdict;
};

struct QVPathResult {
    NormedSpace codomain;
    std::vector<QVPoint> points;
    bool established = false;  // every trace passes the stall rule on its deltas
    std::vector<JumpCheck> jump_checks;
    bool jumps_ok = false;
    std::optional<CadlagPath> path;  // Q estimated from the n_max values; check `established` before trusting it
    std::optional<CadlagPath> continuous_part;
    std::optional<CadlagPath> jump_part;
    std::vector<bool> weak_established;  // per functional

    /// Limit estimate at grid time t (exact match required).
    const LimitEstimate& limit_at(double t) const;
};

QVPathResult qv_limit(const QVRequest& req);

/// Scalar quadratic variation: summand |delta X_t(I)|^2 in the norm of X's space.
QVPathResult scalar_qv(const CadlagPath& x, const PartitionSequence& seq, std::vector<double> t_grid, int n_max,
                       const StallRule& rule = {});

struct TwoVariation {
    double value;                    // max over n <= n_max
    std::vector<double> level_sums;  // per n
    bool growing;                    // last three level sums strictly increasing
};

TwoVariation two_variation(const CadlagPath& x, const PartitionSequence& seq, double t, int n_max);

/// Per n: max over t of |Q(X1+X2, Y1+Y2) - sum_ij Q(X_i, Y_j)|.
std::vector<double> qv_bilinearity_check(const CadlagPath& x1, const CadlagPath& x2, const CadlagPath& y1,
                                         const CadlagPath& y2, const BilinearMap& b, const PartitionSequence& seq,
                                         const std::vector<double>& t_grid, int n_max);

struct BlockQVReport {
    std::vector<QVPathResult> blocks;  // row-major (1,1), (1,2), (2,1), (2,2)
    std::vector<double> residual;      // per n: max over t of product trace minus component traces
};

/// Q_B((X1, X2), (Y1, Y2)) with B the block map (B_ij), compared block by
/// block against Q_{B_ij}(X_i, Y_j).
BlockQVReport qv_block_matrix(const CadlagPath& x1, const CadlagPath& x2, const CadlagPath& y1,
                              const CadlagPath& y2, const BilinearMap& b11, const BilinearMap& b12,
                              const BilinearMap& b21, const BilinearMap& b22, const PartitionSequence& seq,
                              const std::vector<double>& t_grid, int n_max);

struct ConventionTrace {
    double t;
    std::vector<double> residual;  // per n: |Truncated - IndicatorLeft|
    std::vector<double> monitor;   // per n: |(X, Y)(over_n(t)) - (X, Y)(t)|
    std::vector<double> bound;     // per n: |B| (|X_v - X_t| |Y_v - Y_u| + |X_t - X_u| |Y_v - Y_t|)
    Verdict monitor_verdict;
    Verdict residual_verdict;
};

std::vector<ConventionTrace> convention_equivalence(const CadlagPath& x, const CadlagPath& y, const BilinearMap& b,
                                                    const PartitionSequence& seq, const std::vector<double>& t_grid,
                                                    int n_max, const StallRule& rule = {});

}  // namespace follmer
