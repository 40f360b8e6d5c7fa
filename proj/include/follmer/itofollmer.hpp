#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "follmer/calculus.hpp"
#include "follmer/convergence.hpp"
#include "follmer/partitions.hpp"
#include "follmer/paths.hpp"
#include "follmer/quadvar.hpp"
#include "follmer/spaces.hpp"

namespace follmer {

/// LeftOfB: sum B(H_r, delta X_t(]r,s])). RightOfB: sum B(delta X_t(]r,s]), H_r).
enum class IFSide { LeftOfB, RightOfB };

Vector if_riemann_sum(const PathFunction& h, const CadlagPath& x, const BilinearMap& b, const Partition& pi, double t,
                      IFSide side = IFSide::LeftOfB, QVConvention convention = QVConvention::Truncated);

struct IFIntegralResult {
    ConvergenceTrace trace;
    LimitEstimate estimate;
    LeftApproximationReport monitor;
    bool reported_only;                  // the partitions do not approximate H from the left
    std::vector<bool> weak_established;  // per functional
};

IFIntegralResult if_integral(const PathFunction& h, const CadlagPath& x, const BilinearMap& b,
                             const PartitionSequence& seq, double t, int n_max, IFSide side = IFSide::LeftOfB,
                             const std::vector<Vector>& functionals = {}, const StallRule& rule = {});

struct ItoScenario {
    std::string id;
    CadlagPath a;
    CadlagPath x;
    SmoothFunction f;
    BilinearMap b;
    PartitionSequence seq;
    std::vector<double> t_grid;       // empty: {T}
    int n_max = 12;
    std::vector<Vector> functionals;  // weak mode when non-empty
    StallRule rule = {};
    bool run_monitors = true;
};

struct ItoPointReport {
    double t;
    Vector lhs;                      // f(A_t, X_t) - f(A_0, X_0)
    Vector t1;                       // ∫ D_a f(A_{s-}, X_{s-}) dA^c_s
    Vector t1_alt;                   // ∫ D_a f dA - sum D_a f(A_{s-}, X_{s-}) Delta A_s
    double t1_consistency;           // |t1 - t1_alt|
    Vector t4;                       // sum {Delta f - D_x f(A_{s-}, X_{s-}) Delta X_s}
    std::vector<Vector> t2;          // n-th Riemann sum of D_x f(A, X) dX
    std::vector<Vector> t3;          // n-th discrete ½ ∫ D_B^2 f dQ^c
    std::optional<Vector> t3_limit;  // ½ ∫ D_B^2 f(A_{s-}, X_{s-}) dQ^c_s against the estimated Q path
    std::vector<double> mesh;
    std::vector<double> residual;    // |LHS - T1 - T2_n - T3_n - T4|
    Verdict verdict;
    std::vector<bool> weak_converging;  // per functional, |<z, residual>| under the stall rule
};

struct ItoReport {
    std::string scenario_id;
    bool testable = true;
    std::string untestable_reason;
    std::vector<ItoPointReport> points;
    std::optional<ConditionCReport> condition_c;
    std::optional<LeftApproximationReport> left_approx;
    bool qv_established = false;
    std::string qv_status;
};

/// Checks f(A_t, X_t) - f(A_0, X_0) = T1 + T2 + T3 + T4 level by level.
ItoReport ito_verify(const ItoScenario& sc);

/// The proof's single-partition split of f(A_t, X_t) - f(A_0, X_0) - sum D_x f delta X
/// into I_1 - I_2 + I_3 - I_4 + I_5 - I_6 + I_7 + I_8 for a jump threshold eps.
struct TaylorSplit {
    double eps;
    std::array<Vector, 8> terms;  // I_1 ... I_8
    Vector lhs;                   // f(A_t, X_t) - f(A_0, X_0) - sum D_x f delta X_t
    double identity_residual;     // |lhs - (I_1 - I_2 + ... + I_8)|
    double remainder_agreement;   // max over intervals of direct vs quadrature r_t(I), R_t(I)
    double compress_agreement;    // |I_5 via D_B^2 f - I_5 via D_x^2 f|
};

TaylorSplit taylor_split(const SmoothFunction& f, const CadlagPath& a, const CadlagPath& x, const BilinearMap& b,
                         const Partition& pi, double t, double eps);

/// taylor_split over the eps grid {2^-1, ..., 2^-12} times the largest jump norm of (A, X).
std::vector<TaylorSplit> taylor_split_ladder(const SmoothFunction& f, const CadlagPath& a, const CadlagPath& x,
                                             const BilinearMap& b, const Partition& pi, double t);

struct WeightedQVReport {
    Vector rhs;                     // ∫ xi_{u-} dQ_B(X, X)_u against the estimated Q path
    std::vector<Vector> lhs;        // per n: sum xi(r) B(delta X_t, delta X_t)(]r,s])
    std::vector<double> mesh;
    std::vector<double> residual;   // per n
    Verdict verdict;
    bool qv_established;
    std::vector<bool> weak_converging;
    std::optional<ConditionCReport> condition_c;
    LeftApproximationReport left_approx;
};

/// xi takes values in L(E1, G) (row-major, see LinearMap::as_vector).
/// q_grid must contain t; empty selects the default grid plus t.
WeightedQVReport weighted_qv_vs_integral(const PathFunction& xi, const NormedSpace& g, const CadlagPath& x,
                                      const BilinearMap& b, const PartitionSequence& seq, double t, int n_max,
                                      std::vector<double> q_grid = {}, const std::vector<Vector>& functionals = {},
                                      const StallRule& rule = {}, bool run_condition_c = true);

struct IBPPoint {
    double t;
    Vector target;                 // A_t (x) X_t - A_0 (x) X_0
    std::vector<Vector> da_x;      // sum (delta A) (x) X_r
    std::vector<Vector> a_dx;      // sum A_r (x) (delta X)
    std::vector<Vector> bracket;   // sum (delta A) (x) (delta X)
    std::vector<double> mesh;
    std::vector<double> residual;  // |target - da_x - a_dx - bracket|
};

/// A_t (x) X_t = ∫ dA (x) X_- + ∫ A_- (x) dX + [A, X]_t with B = Outer (Frobenius).
std::vector<IBPPoint> integration_by_parts(const CadlagPath& a, const CadlagPath& x, const PartitionSequence& seq,
                                           const std::vector<double>& t_grid, int n_max,
                                           QVConvention convention = QVConvention::Truncated);

}  // namespace follmer
