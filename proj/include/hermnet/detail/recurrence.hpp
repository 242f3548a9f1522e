#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "hermnet/hermite.hpp"

namespace hermnet::detail {

// psi_k = sqrt(2/k) x psi_{k-1} - sqrt((k-1)/k) psi_{k-2}
struct RecurrenceTable {
    std::vector<double> a;  // sqrt(2/k)
    std::vector<double> b;  // sqrt((k-1)/k)

    RecurrenceTable() : a(kMaxHermiteDegree + 1, 0.0), b(kMaxHermiteDegree + 1, 0.0) {
        for (int k = 1; k <= kMaxHermiteDegree; ++k) {
            a[k] = std::sqrt(2.0 / k);
            b[k] = std::sqrt(static_cast<double>(k - 1) / k);
        }
    }
};

inline const RecurrenceTable& recurrence() {
    static const RecurrenceTable table;
    return table;
}

inline const double kPiQuarter = std::pow(std::numbers::pi, -0.25);

// Below this |x| the plain recurrence starting from pi^{-1/4} exp(-x^2/2) is
// safe: the seed does not underflow and psi_k stays O(1).
inline constexpr double kPlainRecurrenceLimit = 36.0;

}  // namespace hermnet::detail
