#pragma once

#include <cstddef>
#include <vector>

namespace follmer {

/// Strictly increasing breakpoints 0 = t_0 < ... < t_k = T. The intervals are
/// ]t_i, t_{i+1}], so a point that is itself a breakpoint b lies in the
/// interval whose right end is b.
class Partition {
public:
    explicit Partition(std::vector<double> points);

    struct Cell {
        std::size_t index;  // interval ]points[index], points[index + 1]]
        double under;
        double over;
    };

    const std::vector<double>& points() const { return points_; }
    double horizon() const { return points_.back(); }
    std::size_t intervals() const { return points_.size() - 1; }
    double left(std::size_t i) const { return points_[i]; }
    double right(std::size_t i) const { return points_[i + 1]; }

    /// Interval containing t, for 0 < t <= T.
    Cell locate(double t) const;
    double mesh() const;
    bool contains_point(double s) const;

private:
    std::vector<double> points_;
};

}  // namespace follmer
