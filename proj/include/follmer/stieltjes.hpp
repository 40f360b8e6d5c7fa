#pragma once

#include <vector>

#include "follmer/convergence.hpp"
#include "follmer/partitions.hpp"
#include "follmer/paths.hpp"
#include "follmer/spaces.hpp"

namespace follmer {

/// Vector measure mu_f of a finite-variation path f: mu(]a,b]) = f(b) - f(a),
/// with atoms at the jumps and an absolutely continuous part given by the
/// skeleton slopes.
class FVMeasure {
public:
    explicit FVMeasure(const CadlagPath& f);

    const CadlagPath& source() const { return f_; }
    const NormedSpace& space() const { return f_.space(); }
    double horizon() const { return f_.horizon(); }

    Vector measure_of(double a, double b) const;
    /// mu({0}) = f(0).
    Vector atom_at_zero() const { return f_.value(0.0); }
    /// |mu|(]a,b]).
    double variation(double a, double b) const;

    FVMeasure continuous() const;
    FVMeasure discontinuous() const;

private:
    CadlagPath f_;
};

enum class IntegrandEvaluation { LeftLimit, Value };

/// ∫_{]a,b]} B(g(s-), dmu(s)): the continuous part segment by segment (each
/// skeleton segment has constant density), the jump part as an atom sum.
Vector integrate_left(const FVMeasure& mu, const PathFunction& g, const BilinearMap& b, double a, double c,
                      IntegrandEvaluation eval = IntegrandEvaluation::LeftLimit);

/// |B| ∫_{]a,b]} |g(s-)| d|mu|(s), an upper bound for |integrate_left|.
double dominated_bound(const FVMeasure& mu, const PathFunction& g, const BilinearMap& b, double a, double c);

/// Left Riemann sum sum_{]r,s], r < t} B(g(r), f(s∧t) - f(r∧t)).
Vector left_riemann_sum(const FVMeasure& mu, const PathFunction& g, const BilinearMap& b, const Partition& pi,
                        double t);

struct IFStieltjesReport {
    Vector stieltjes;
    std::vector<double> mesh;
    std::vector<double> residual;  // per n
    LeftApproximationReport monitor;
    Verdict verdict;
};

IFStieltjesReport if_vs_stieltjes(const FVMeasure& mu, const PathFunction& g, const BilinearMap& b,
                                  const PartitionSequence& seq, double t, int n_max, const StallRule& rule = {});

/// Sample times for left-approximation monitors: jump and break times of g
/// in ]0, t], 16 uniform points, and t itself.
std::vector<double> monitor_times(const PathFunction& g, double t);

}  // namespace follmer
