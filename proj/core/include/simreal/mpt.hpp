#pragma once

/**
 * Mean-variance machinery: portfolio variance, sample covariance with PSD
 * repair, a long-only constrained minimum-variance solver, a cardinality
 * pruning heuristic and the efficient frontier.
 *
 * Solver: projected gradient descent on w' Sigma w with an exact Dykstra
 * alternating projection onto {sum w = 1} ∩ {l <= w <= u} ∩ {mu' w = R}.
 * Step size is fixed from the Lipschitz bound 1 / (2 lambda_max + eps).
 * Designed for small universes (tens of assets); no external QP dependency.
 */

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "simreal/common.hpp"
#include "simreal/data.hpp"

namespace simreal::mpt {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Long-only fully-invested allocation: w >= 0, sum w = 1 (within 1e-9).
/// Tickers are optional labels in asset order; empty means unlabeled.
struct WeightVector {
    Eigen::VectorXd weights;
    std::vector<std::string> tickers;

    Eigen::Index size() const { return weights.size(); }

    /// Enforces the simplex invariants; throws SimplexViolation.
    void validate(double sum_tol = 1e-9, double box_tol = 1e-12) const;
};

/// Symmetric n x n covariance with an audit flag recording whether
/// eigenvalue clipping changed the estimate.
struct CovarianceEstimate {
    Eigen::MatrixXd matrix;
    std::vector<std::string> tickers;
    bool repaired = false;

    Eigen::Index size() const { return matrix.rows(); }
};

/// Minimum-variance problem:
///   min w' Sigma w
///   s.t. sum w = 1, l <= w <= u, [mu' w = target_return].
/// `max_assets`, when set, caps |supp(w)| (solved heuristically).
struct MvoProblem {
    Eigen::VectorXd mu;
    CovarianceEstimate cov;
    std::optional<double> target_return;
    Eigen::VectorXd lower;  // empty -> zeros
    Eigen::VectorXd upper;  // empty -> ones
    std::optional<int> max_assets;

    /// Throws on inconsistent dimensions or bound infeasibility.
    void validate() const;
};

struct MvoSolution {
    WeightVector weights;
    double objective = 0.0;      // w' Sigma w at the solution
    double kkt_residual = 0.0;   // fixed-point residual of the gradient map
    int iterations = 0;
};

struct FrontierPoint {
    double target_return = 0.0;
    double variance = 0.0;
    WeightVector weights;
};

struct FrontierResult {
    std::vector<FrontierPoint> points;
    std::vector<std::string> warnings;  // per-point solver failures, not fatal
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// w' Sigma w, clamped to 0 from below at -1e-12 to absorb rounding.
double portfolio_variance(const WeightVector& w, const CovarianceEstimate& cov);

/// Sample covariance (divisor T-1). With repair, negative eigenvalues are
/// clipped at zero and the matrix rebuilt symmetrically; `repaired` records
/// whether clipping changed anything.
CovarianceEstimate estimate_covariance(const data::ReturnMatrix& returns,
                                       bool repair);

/// Minimum of the diagonal: the theoretical variance floor under full
/// diversification of uncorrelated assets.
double diversification_floor(const CovarianceEstimate& cov);

struct SolverOptions {
    int max_iterations = 100000;
    double iterate_tol = 1e-10;    // stop when ||w_{k+1} - w_k||_inf below
    double kkt_tol = 1e-6;
    double constraint_tol = 1e-8;
};

/// Solves the constrained minimum-variance problem. Throws Infeasible when
/// the constraint set is empty and NotConverged (carrying the residual) when
/// the iteration cap is reached first.
MvoSolution solve_mvo(const MvoProblem& problem, const SolverOptions& opts = {});

/// Cardinality heuristic: solve the relaxed problem, prune the
/// smallest-weight asset (ties: larger variance first, then later ticker
/// order), re-solve on the surviving support, repeat until the support fits.
/// Without a target constraint the result is never worse than the best
/// feasible single asset.
MvoSolution solve_mvo_cardinality(const MvoProblem& problem,
                                  const SolverOptions& opts = {});

/// Sweeps solve_mvo over n_points targets linearly spaced across the
/// feasible expected-return interval. Per-point failures are recorded as
/// warnings and skipped.
FrontierResult efficient_frontier(const Eigen::VectorXd& mu,
                                  const CovarianceEstimate& cov, int n_points,
                                  const Eigen::VectorXd& lower = {},
                                  const Eigen::VectorXd& upper = {},
                                  const SolverOptions& opts = {});

/// Frontier CSV: `target_return,variance,w_<ticker>...`, one row per point.
std::string frontier_to_csv(const FrontierResult& frontier,
                            const std::vector<std::string>& tickers);

/// Feasible range of mu' w over {sum w = 1, l <= w <= u}, by greedy
/// allocation. Used for frontier targets and feasibility checks.
std::pair<double, double> feasible_return_range(const Eigen::VectorXd& mu,
                                                const Eigen::VectorXd& lower,
                                                const Eigen::VectorXd& upper);

}  // namespace simreal::mpt
