#pragma once

/**
 * Risk/return performance statistics for one realized return series.
 *
 * Conventions (fixed, documented, applied everywhere including test
 * oracles):
 *  - annualization is arithmetic: mean * P and std * sqrt(P);
 *  - sample standard deviation (divisor n-1) throughout, including the
 *    downside deviation over the strictly-negative subsample;
 *  - zero returns count in n but in neither the positive nor negative
 *    subsample;
 *  - the equity curve behind max drawdown starts at 1 before the first
 *    return and compounds multiplicatively; max drawdown itself is NOT
 *    annualized;
 *  - Calmar divides by |MDD| so profitable strategies score positive;
 *  - the risk-free rate is 0;
 *  - any ratio whose denominator is zero or undefined is reported as an
 *    explicit empty marker, never 0 or infinity.
 */

#include <optional>
#include <string>
#include <vector>

#include "simreal/common.hpp"

namespace simreal::metrics {

struct MetricsReport {
    double expected_return = 0.0;          // annualized mean return
    double volatility = 0.0;               // annualized std
    std::optional<double> downside_dev;    // annualized std of negative returns
    std::optional<double> sharpe;
    std::optional<double> sortino;
    double max_drawdown = 0.0;             // in [-1, 0], not annualized
    std::optional<double> calmar;
    double pct_positive = 0.0;             // in [0, 1]
    std::optional<double> avg_pos_neg;     // mean(r+) / mean(r-), signed
    double periods_per_year = 252.0;
    int n_obs = 0;
};

/// Full Table-style report from a per-period return series.
/// Throws InsufficientData for fewer than 2 observations.
MetricsReport compute_report(const std::vector<double>& returns,
                             double periods_per_year);

/// Most negative peak-to-trough fractional loss, single pass.
/// Throws NonPositiveEquity on non-positive values, EmptyInput on none.
double max_drawdown(const std::vector<double>& equity);

/// CSV row(s) in the column order
/// `model,E[R],std(R),DD,Sharpe,Sortino,MDD,Calmar,Avg+/Avg-,%+ve`.
/// Undefined ratios render as the `undefined_marker`.
std::string report_csv_header();
std::string report_to_csv_row(const std::string& model,
                              const MetricsReport& report,
                              const std::string& undefined_marker = "NA");

}  // namespace simreal::metrics
