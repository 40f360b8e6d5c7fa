#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace follmer {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Coordinate-wise compensated accumulator for vectors of fixed dimension.
class CompensatedVector {
public:
    explicit CompensatedVector(std::size_t dim) : parts_(dim) {}

    void add(std::span<const double> x, double scale = 1.0) {
        for (std::size_t i = 0; i < parts_.size(); ++i) parts_[i].add(scale * x[i]);
    }
    std::vector<double> values() const {
        std::vector<double> out(parts_.size());
        for (std::size_t i = 0; i < parts_.size(); ++i) out[i] = parts_[i].value();
        return out;
    }
    std::size_t dim() const { return parts_.size(); }

private:
    std::vector<CompensatedSum> parts_;
};

}  // namespace follmer
