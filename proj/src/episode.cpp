#include "qvi/episode.hpp"

namespace qvi {

double Episode::reward_to_go(int t) const {
    double sum = 0.0;
    for (int u = t; u < length(); ++u) sum += rewards[u];
    return sum;
}

}  // namespace qvi
