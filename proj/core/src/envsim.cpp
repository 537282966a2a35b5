#include "simreal/envsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace simreal::envsim {

void EnvConfig::validate() const {
    if (fee_rate < 0.0 || fee_rate >= 1.0) {
        throw ParseError("fee_rate must lie in [0, 1)");
    }
    if (!(initial_equity > 0.0)) throw ParseError("initial_equity must be > 0");
    if (lookback < 1) throw ParseError("lookback must be >= 1");
    if (gamma < 0.0 || gamma >= 1.0) throw ParseError("gamma must lie in [0, 1)");
}

mpt::WeightVector project_to_simplex(const Eigen::VectorXd& raw) {
    if (!raw.allFinite()) throw NonFiniteInput("non-finite entry in action");
    const Eigen::Index n = raw.size();
    if (n == 0) throw EmptyInput("empty action");

    std::vector<double> u(raw.data(), raw.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double running = 0.0;
    double tau = 0.0;
    int rho = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        running += u[static_cast<std::size_t>(j)];
        double candidate = (running - 1.0) / static_cast<double>(j + 1);
        if (u[static_cast<std::size_t>(j)] - candidate > 0.0) {
            tau = candidate;
            rho = static_cast<int>(j + 1);
        }
    }
    (void)rho;
    mpt::WeightVector w;
    w.weights = (raw.array() - tau).cwiseMax(0.0);
    return w;
}

RebalanceOutcome apply_rebalance(double equity, const Eigen::VectorXd& drift,
                                 const Eigen::VectorXd& target,
                                 const Eigen::VectorXd& returns_row,
                                 double fee_rate) {
    RebalanceOutcome out;
    out.turnover = (target - drift).lpNorm<1>();
    out.cost = fee_rate * equity * out.turnover;
    double e = equity - out.cost;
    out.gross = target.dot(returns_row);
    e *= 1.0 + out.gross;
    out.equity_after = e;
    if (1.0 + out.gross > 0.0) {
        out.drifted =
            (target.array() * (1.0 + returns_row.array())) / (1.0 + out.gross);
    } else {
        out.drifted = target;  // bankrupt period; drift undefined, keep target
    }
    return out;
}

Environment::Environment(EnvConfig config, data::ReturnMatrix segment,
                         std::uint64_t seed)
    : config_(std::move(config)), segment_(std::move(segment)), seed_(seed) {
    config_.validate();
    if (config_.allow_cash) {
        const Eigen::Index T = segment_.rows();
        segment_.values.conservativeResize(T, segment_.cols() + 1);
        segment_.values.col(segment_.cols() - 1).setZero();
        segment_.tickers.push_back("CASH");
    }
    if (segment_.rows() < config_.lookback + 1) {
        throw InsufficientHistory("segment has " +
                                  std::to_string(segment_.rows()) +
                                  " rows, lookback needs " +
                                  std::to_string(config_.lookback + 1));
    }
    t_ = config_.lookback - 1;
    equity_ = config_.initial_equity;
    last_valid_equity_ = equity_;
    holdings_ = Eigen::VectorXd::Constant(segment_.cols(),
                                          1.0 / static_cast<double>(segment_.cols()));
    dsr_.eta = config_.dsr_eta;
    rebuild_observation();
}

Environment reset(const EnvConfig& config, const data::ReturnMatrix& segment,
                  std::uint64_t seed) {
    return Environment(config, segment, seed);
}

int Environment::steps_available() const {
    return static_cast<int>(segment_.rows()) - config_.lookback;
}

void Environment::rebuild_observation() {
    const int L = config_.lookback;
    observation_.window = segment_.values.middleRows(t_ - L + 1, L);
    observation_.current_weights.weights = holdings_;
    observation_.current_weights.tickers = segment_.tickers;
    observation_.t = t_;
}

EnvState Environment::state() const {
    EnvState s;
    s.t = t_;
    s.equity = equity_;
    s.holdings.weights = holdings_;
    s.holdings.tickers = segment_.tickers;
    s.done = done_;
    return s;
}

StepResult Environment::step(const Eigen::VectorXd& action) {
    if (done_) throw EpisodeFinished("episode already finished");
    if (action.size() != segment_.cols()) {
        throw DimensionMismatch("action length " + std::to_string(action.size()) +
                                " vs " + std::to_string(segment_.cols()) +
                                " assets");
    }

    last_valid_equity_ = equity_;

    StepResult result;
    if (!action.allFinite()) {
        result.reward = 0.0;
        result.info.equity = equity_;
        result.observation = observation_;
        result.fault = FaultRecord{"NonFiniteInput", t_, equity_,
                                   "non-finite action entry"};
        return fault_guard(*this, std::move(result));
    }

    const double equity_start = equity_;
    const Eigen::VectorXd target = project_to_simplex(action).weights;
    const Eigen::VectorXd returns_row = segment_.values.row(t_ + 1).transpose();
    RebalanceOutcome out =
        apply_rebalance(equity_, holdings_, target, returns_row, config_.fee_rate);

    equity_ = out.equity_after;
    holdings_ = out.drifted;
    ++t_;

    double rw = 0.0;
    if (equity_ > 0.0 && std::isfinite(equity_)) {
        const double net_log = std::log(equity_ / equity_start);
        if (config_.reward_kind == RewardKind::dsr) {
            auto [r, next] = reward::dsr_update(dsr_, net_log);
            dsr_ = next;
            rw = r;
        } else {
            rw = net_log;
        }
    }

    result.reward = rw;
    result.info = {out.gross, out.cost, out.turnover, equity_};
    result.done = t_ + 1 >= static_cast<int>(segment_.rows());
    done_ = result.done;

    rebuild_observation();
    result.observation = observation_;

    trace_.push_back(TraceRow{t_, segment_.dates[static_cast<std::size_t>(t_)],
                              equity_, out.gross, out.cost, out.turnover,
                              target});
    return fault_guard(*this, std::move(result));
}

StepResult fault_guard(Environment& env, StepResult result) {
    std::optional<FaultRecord> fault = result.fault;
    const double last_valid = env.last_valid_equity_;

    if (!fault && !std::isfinite(env.equity_)) {
        fault = FaultRecord{"NonFiniteEquity", env.t_, last_valid,
                            "equity became non-finite"};
    }
    if (!fault && env.equity_ <= 0.0) {
        fault = FaultRecord{"Bankruptcy", env.t_, last_valid,
                            "equity fell to " + format_double(env.equity_)};
    }
    if (!fault && !std::isfinite(result.reward)) {
        fault = FaultRecord{"NonFiniteReward", env.t_, last_valid,
                            "reward became non-finite"};
    }
    if (!fault && env.equity_ > 0.0) {
        const auto& w = env.holdings_;
        if (std::abs(w.sum() - 1.0) > 1e-9 || (w.array() < -1e-12).any()) {
            fault = FaultRecord{
                "SimplexViolation", env.t_, last_valid,
                "holdings left the simplex (sum " + format_double(w.sum()) + ")"};
        }
    }

    if (fault) {
        result.fault = fault;
        result.done = true;
        if (!std::isfinite(result.reward)) result.reward = 0.0;
        env.done_ = true;
        env.equity_ = std::isfinite(env.equity_) ? std::max(env.equity_, 0.0) : 0.0;
        env.faults_.push_back(*fault);
    }
    return result;
}

std::string trace_to_csv(const std::vector<TraceRow>& rows,
                         const std::vector<std::string>& tickers) {
    std::ostringstream out;
    out << "t,date,equity,gross_return,cost,turnover";
    for (const auto& tk : tickers) out << ",w_" << tk;
    out << '\n';
    for (const auto& r : rows) {
        out << r.t << ',' << r.date.to_string() << ',' << format_double(r.equity)
            << ',' << format_double(r.gross_return) << ','
            << format_double(r.cost) << ',' << format_double(r.turnover);
        for (Eigen::Index i = 0; i < r.weights.size(); ++i) {
            out << ',' << format_double(r.weights(i));
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace simreal::envsim
