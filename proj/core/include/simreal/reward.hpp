#pragma once

// Online reward functions: the Differential Sharpe Ratio and a plain
// log-return alternative.

#include <utility>

#include "simreal/common.hpp"

namespace simreal::reward {

/// Exponential-moving-average accumulators behind the DSR. A and B track
/// returns and squared returns at adaptation rate eta; t counts updates.
struct DsrState {
    double A = 0.0;
    double B = 0.0;
    double eta = 0.01;
    int t = 0;
};

/// One DSR step. With the pre-update averages A, B and the new return r:
///   dA = r - A, dB = r^2 - B,
///   D  = (B * dA - A * dB / 2) / (B - A^2)^(3/2),
/// then A += eta * dA, B += eta * dB. The variance term B - A^2 is floored
/// at 1e-8 before exponentiation so degenerate (constant-return) streams
/// stay bounded. The very first update (t == 0) only warms the
/// accumulators and yields reward 0.
std::pair<double, DsrState> dsr_update(const DsrState& state, double r);

/// ln(equity_after / equity_before); throws NonPositiveEquity.
double log_return_reward(double equity_before, double equity_after);

}  // namespace simreal::reward
