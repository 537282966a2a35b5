#include "simreal/metrics.hpp"

#include <cmath>
#include <sstream>

namespace simreal::metrics {

namespace {

double sample_std(const std::vector<double>& xs) {
    // caller guarantees xs.size() >= 2
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

double max_drawdown(const std::vector<double>& equity) {
    if (equity.empty()) throw EmptyInput("empty equity curve");
    double peak = -1.0;
    double worst = 0.0;
    for (double e : equity) {
        if (!(e > 0.0)) throw NonPositiveEquity("equity must stay positive");
        peak = std::max(peak, e);
        worst = std::min(worst, e / peak - 1.0);
    }
    return worst;
}

MetricsReport compute_report(const std::vector<double>& returns,
                             double periods_per_year) {
    const std::size_t n = returns.size();
    if (n < 2) throw InsufficientData("need >= 2 returns");
    if (!(periods_per_year > 0.0)) {
        throw ParseError("periods_per_year must be positive");
    }

    MetricsReport rep;
    rep.periods_per_year = periods_per_year;
    rep.n_obs = static_cast<int>(n);

    double mean = 0.0;
    for (double r : returns) {
        if (!std::isfinite(r)) throw NonFiniteInput("non-finite return");
        mean += r;
    }
    mean /= static_cast<double>(n);
    rep.expected_return = mean * periods_per_year;

    rep.volatility = sample_std(returns) * std::sqrt(periods_per_year);

    std::vector<double> pos, neg;
    for (double r : returns) {
        if (r > 0.0) pos.push_back(r);
        else if (r < 0.0) neg.push_back(r);
    }
    rep.pct_positive = static_cast<double>(pos.size()) / static_cast<double>(n);

    if (neg.empty()) {
        rep.downside_dev = 0.0;  // no downside observed
    } else if (neg.size() >= 2) {
        rep.downside_dev = sample_std(neg) * std::sqrt(periods_per_year);
    }  // a single negative return leaves the sample std undefined

    if (rep.volatility > 0.0) rep.sharpe = rep.expected_return / rep.volatility;
    if (rep.downside_dev && *rep.downside_dev > 0.0) {
        rep.sortino = rep.expected_return / *rep.downside_dev;
    }

    std::vector<double> equity;
    equity.reserve(n + 1);
    double e = 1.0;
    equity.push_back(e);
    for (double r : returns) {
        e *= 1.0 + r;
        if (!(e > 0.0)) throw NonPositiveEquity("equity curve hit zero");
        equity.push_back(e);
    }
    rep.max_drawdown = max_drawdown(equity);
    if (rep.max_drawdown < 0.0) {
        rep.calmar = rep.expected_return / std::abs(rep.max_drawdown);
    }

    if (!pos.empty() && !neg.empty()) {
        double mp = 0.0, mn = 0.0;
        for (double r : pos) mp += r;
        for (double r : neg) mn += r;
        mp /= static_cast<double>(pos.size());
        mn /= static_cast<double>(neg.size());
        rep.avg_pos_neg = mp / mn;
    }
    return rep;
}

std::string report_csv_header() {
    return "model,E[R],std(R),DD,Sharpe,Sortino,MDD,Calmar,Avg+/Avg-,%+ve";
}

std::string report_to_csv_row(const std::string& model,
                              const MetricsReport& report,
                              const std::string& undefined_marker) {
    auto opt = [&](const std::optional<double>& v) {
        return v ? format_double(*v) : undefined_marker;
    };
    std::ostringstream out;
    out << model << ',' << format_double(report.expected_return) << ','
        << format_double(report.volatility) << ',' << opt(report.downside_dev)
        << ',' << opt(report.sharpe) << ',' << opt(report.sortino) << ','
        << format_double(report.max_drawdown) << ',' << opt(report.calmar)
        << ',' << opt(report.avg_pos_neg) << ','
        << format_double(report.pct_positive);
    return out.str();
}

}  // namespace simreal::metrics
