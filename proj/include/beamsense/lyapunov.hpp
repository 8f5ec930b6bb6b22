#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beamsense {

// Virtual queue tracking cumulative sensing overshoot against the average
// budget alpha (allowed fraction of slots spent sensing). The queue grows
// by 1 - alpha when a slot senses and drains by alpha otherwise; keeping
// it stable keeps the long-run sensing rate at or below alpha.

inline void check_budget(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("sensing budget must lie in (0, 1]");
}

inline double queue_update(double queue, int sense, double alpha) {
    check_budget(alpha);
    if (sense != 0 && sense != 1)
        throw std::invalid_argument("sense decision must be 0 or 1");
    if (!(queue >= 0.0) || !std::isfinite(queue))
        throw std::invalid_argument("queue must be finite and >= 0");
    return std::max(queue + sense - alpha, 0.0);
}

inline double queue_energy(double queue) { return 0.5 * queue * queue; }

// One-slot change in queue energy caused by decision `sense`.
inline double queue_drift(double queue, int sense, double alpha) {
    const double next = queue_update(queue, sense, alpha);
    return queue_energy(next) - queue_energy(queue);
}

// Drift-plus-penalty slot cost: prediction loss scaled by the tradeoff
// weight plus the queue-energy drift. Minimizing this per slot trades
// accuracy against budget compliance.
inline double dpp_cost(double loss, int sense, double queue, double alpha, double penalty_weight) {
    if (!(penalty_weight >= 0.0) || !std::isfinite(penalty_weight))
        throw std::invalid_argument("penalty weight must be finite and >= 0");
    if (!std::isfinite(loss))
        throw std::invalid_argument("loss must be finite");
    return penalty_weight * loss + queue_drift(queue, sense, alpha);
}

}  // namespace beamsense
