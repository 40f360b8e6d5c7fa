#include "follmer/partition.hpp"

#include <algorithm>
#include <cmath>

#include "follmer/error.hpp"

namespace follmer {

Partition::Partition(std::vector<double> points) : points_(std::move(points)) {
    require(points_.size() >= 2, "Partition: at least two breakpoints required");
    require(points_.front() == 0.0, "Partition: first breakpoint must be 0");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        require(std::isfinite(points_[i]), "Partition: non-finite breakpoint");
        if (i > 0) require(points_[i] > points_[i - 1], "Partition: breakpoints must be strictly increasing");
    }
}

Partition::Cell Partition::locate(double t) const {
    require(t > 0.0 && t <= horizon(), "Partition::locate: t must lie in ]0, T]");
    const auto it = std::lower_bound(points_.begin(), points_.end(), t);
    const auto idx = static_cast<std::size_t>(it - points_.begin());
    return Cell{idx - 1, points_[idx - 1], points_[idx]};
}

double Partition::mesh() const {
    double m = 0.0;
    for (std::size_t i = 1; i < points_.size(); ++i) m = std::max(m, points_[i] - points_[i - 1]);
    return m;
}

bool Partition::contains_point(double s) const { return std::binary_search(points_.begin(), points_.end(), s); }

}  // namespace follmer
