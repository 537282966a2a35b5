#pragma once

/**
 * Episodic market environment with simplex actions and proportional
 * transaction costs.
 *
 * Step order is fixed: project the action onto the simplex, charge
 * fee_rate * equity * turnover against equity, accrue the next return row,
 * drift the holdings by relative asset growth, then score the period's net
 * log-return with the configured reward. Numeric anomalies terminate the
 * episode through a structured fault record instead of an exception.
 */

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simreal/common.hpp"
#include "simreal/data.hpp"
#include "simreal/mpt.hpp"
#include "simreal/reward.hpp"

namespace simreal::envsim {

enum class RewardKind { dsr, log_return };

struct EnvConfig {
    double fee_rate = 0.0;       // one-way cost on traded notional, in [0,1)
    double initial_equity = 1.0; // > 0
    int lookback = 1;            // observation window length L >= 1
    bool allow_cash = false;     // appends a zero-return CASH column
    double gamma = 0.99;         // exposed for agents; unused by dynamics
    RewardKind reward_kind = RewardKind::dsr;
    double dsr_eta = 0.01;

    void validate() const;
};

/// Structured description of a runtime anomaly. Faults are data: they ride
/// in the StepResult and the episode ends, but nothing throws.
struct FaultRecord {
    std::string cause;  // NonFiniteInput | Bankruptcy | NonFiniteEquity |
                        // NonFiniteReward | SimplexViolation
    int t = 0;
    double last_equity = 0.0;
    std::string message;
};

struct Observation {
    Eigen::MatrixXd window;  // L x n, rows dated <= t (never ahead)
    mpt::WeightVector current_weights;
    int t = 0;
};

struct StepInfo {
    double gross_return = 0.0;
    double cost_paid = 0.0;
    double turnover = 0.0;  // in [0, 2]
    double equity = 0.0;
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
    std::optional<FaultRecord> fault;
};

struct EnvState {
    int t = 0;
    double equity = 0.0;
    mpt::WeightVector holdings;  // post-drift
    bool done = false;
};

struct TraceRow {
    int t = 0;
    Date date;
    double equity = 0.0;
    double gross_return = 0.0;
    double cost = 0.0;
    double turnover = 0.0;
    Eigen::VectorXd weights;  // executed target weights
};

/// Euclidean projection onto {w : w >= 0, sum w = 1} (sort-and-threshold).
/// Idempotent; throws NonFiniteInput.
mpt::WeightVector project_to_simplex(const Eigen::VectorXd& raw);

/// One rebalance-and-accrue step of the dynamics, shared by the environment
/// and the allocation-sequence evaluator so both replay identically.
struct RebalanceOutcome {
    double turnover = 0.0;
    double cost = 0.0;
    double gross = 0.0;
    double equity_after = 0.0;
    Eigen::VectorXd drifted;
};
RebalanceOutcome apply_rebalance(double equity, const Eigen::VectorXd& drift,
                                 const Eigen::VectorXd& target,
                                 const Eigen::VectorXd& returns_row,
                                 double fee_rate);

class Environment {
  public:
    /// Positions the clock after the first `lookback` rows, holding uniform
    /// weights at initial_equity. Throws InsufficientHistory if the segment
    /// is shorter than lookback + 1 rows. Deterministic given (config,
    /// segment, seed).
    Environment(EnvConfig config, data::ReturnMatrix segment,
                std::uint64_t seed);

    StepResult step(const Eigen::VectorXd& action);  // throws EpisodeFinished

    const Observation& observation() const { return observation_; }
    EnvState state() const;
    bool done() const { return done_; }
    double equity() const { return equity_; }
    int t() const { return t_; }
    int steps_available() const;
    Eigen::Index num_assets() const { return segment_.cols(); }
    const std::vector<std::string>& tickers() const { return segment_.tickers; }
    const data::ReturnMatrix& segment() const { return segment_; }
    const EnvConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }

    const std::vector<TraceRow>& trace() const { return trace_; }
    const std::vector<FaultRecord>& faults() const { return faults_; }

  private:
    friend StepResult fault_guard(Environment& env, StepResult result);

    void rebuild_observation();

    EnvConfig config_;
    data::ReturnMatrix segment_;
    std::uint64_t seed_ = 0;
    int t_ = 0;
    double equity_ = 0.0;
    double last_valid_equity_ = 0.0;
    Eigen::VectorXd holdings_;
    bool done_ = false;
    reward::DsrState dsr_;
    Observation observation_;
    std::vector<TraceRow> trace_;
    std::vector<FaultRecord> faults_;
};

/// Spec-shaped constructor: environment plus its first observation.
Environment reset(const EnvConfig& config, const data::ReturnMatrix& segment,
                  std::uint64_t seed);

/// Inspects a StepResult for NaN/Inf equity or reward, non-positive equity
/// and simplex violations. On a trigger the result comes back with the
/// fault attached, done = true, and the environment is terminated.
StepResult fault_guard(Environment& env, StepResult result);

/// Episode trace CSV: `t,date,equity,gross_return,cost,turnover,w_<ticker>...`
std::string trace_to_csv(const std::vector<TraceRow>& rows,
                         const std::vector<std::string>& tickers);

}  // namespace simreal::envsim
