#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace piwo {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::isinf(t) || std::isnan(t)) {
            sum_ = t;
            comp_ = 0.0;
            return;
        }
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Relative tolerance under which two scores count as tied.
inline constexpr double kTieTolerance = 1e-12;

/// Index of the maximal score, breaking ties (within kTieTolerance relative
/// to the maximum) towards the lowest index. NaN scores are never selected;
/// if every score is -inf the first index is returned.
inline std::size_t argmax_lowest_index(std::span<const double> scores) noexcept {
    double best = -kInf;
    for (double s : scores) {
        if (s > best) {
            best = s;
        }
    }
    if (best == -kInf) {
        return 0;
    }
    const double threshold = std::isinf(best) ? best : best - kTieTolerance * std::abs(best);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] >= threshold) {
            return i;
        }
    }
    return 0;
}

}  // namespace piwo
