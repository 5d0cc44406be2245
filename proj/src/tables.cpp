#include "qvi/tables.hpp"

#include <algorithm>
#include <stdexcept>

namespace qvi {

double QTable::max_value(int t, int s) const {
    auto r = row(t, s);
    return *std::max_element(r.begin(), r.end());
}

std::vector<int> argmax_set(std::span<const double> values, double tol) {
    if (values.empty()) throw std::invalid_argument("argmax_set: empty row");
    const double best = *std::max_element(values.begin(), values.end());
    std::vector<int> out;
    for (std::size_t a = 0; a < values.size(); ++a)
        if (values[a] >= best - tol) out.push_back(static_cast<int>(a));
    return out;
}

int argmax_lowest(std::span<const double> values, double tol) {
    if (values.empty()) throw std::invalid_argument("argmax_lowest: empty row");
    const double best = *std::max_element(values.begin(), values.end());
    for (std::size_t a = 0; a < values.size(); ++a)
        if (values[a] >= best - tol) return static_cast<int>(a);
    return 0;  // unreachable
}

}  // namespace qvi
