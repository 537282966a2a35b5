#include "simreal/reward.hpp"

#include <cmath>

namespace simreal::reward {

std::pair<double, DsrState> dsr_update(const DsrState& state, double r) {
    if (!std::isfinite(r)) throw NonFiniteInput("non-finite return in dsr_update");

    const double delta_a = r - state.A;
    const double delta_b = r * r - state.B;

    double reward = 0.0;
    if (state.t >= 1) {
        const double variance = std::max(state.B - state.A * state.A, 1e-8);
        reward = (state.B * delta_a - 0.5 * state.A * delta_b) /
                 std::pow(variance, 1.5);
    }

    DsrState next = state;
    next.A += state.eta * delta_a;
    next.B += state.eta * delta_b;
    next.t = state.t + 1;
    return {reward, next};
}

double log_return_reward(double equity_before, double equity_after) {
    if (!(equity_before > 0.0) || !(equity_after > 0.0)) {
        throw NonPositiveEquity("log return needs positive equity on both sides");
    }
    return std::log(equity_after / equity_before);
}

}  // namespace simreal::reward
