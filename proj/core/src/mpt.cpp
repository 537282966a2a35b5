#include "simreal/mpt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace simreal::mpt {

namespace {

constexpr double kBudgetTol = 1e-9;

/// Dykstra's alternating projection onto
/// {sum w = 1} ∩ {l <= w <= u} [∩ {mu' w = target}].
/// Exact for this intersection of a box and one or two hyperplanes.
Eigen::VectorXd project_feasible(Eigen::VectorXd x, const Eigen::VectorXd& lower,
                                 const Eigen::VectorXd& upper,
                                 const Eigen::VectorXd* mu, double target) {
    const Eigen::Index n = x.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const double mu_norm2 = mu ? mu->squaredNorm() : 0.0;
    const bool use_mu = mu != nullptr && mu_norm2 > 0.0;

    Eigen::VectorXd p_budget = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd p_box = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd p_target = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y(n);

    const int max_cycles = 20000;
    for (int cycle = 0; cycle < max_cycles; ++cycle) {
        Eigen::VectorXd x_prev = x;

        y = x + p_budget;
        x = y.array() + (1.0 - y.sum()) * inv_n;
        p_budget = y - x;

        y = x + p_box;
        x = y.cwiseMax(lower).cwiseMin(upper);
        p_box = y - x;

        if (use_mu) {
            y = x + p_target;
            x = y - (*mu) * ((mu->dot(y) - target) / mu_norm2);
            p_target = y - x;
        }

        if ((x - x_prev).lpNorm<Eigen::Infinity>() < 1e-14) break;
    }
    return x;
}

struct Pruned {
    std::vector<int> keep;  // original indices, ascending
};

MvoProblem subproblem(const MvoProblem& full, const std::vector<int>& keep) {
    const auto m = static_cast<Eigen::Index>(keep.size());
    MvoProblem sub;
    sub.mu.resize(m);
    sub.cov.matrix.resize(m, m);
    sub.cov.repaired = full.cov.repaired;
    sub.lower.resize(m);
    sub.upper.resize(m);
    sub.target_return = full.target_return;
    for (Eigen::Index a = 0; a < m; ++a) {
        const int i = keep[static_cast<std::size_t>(a)];
        sub.mu(a) = full.mu(i);
        sub.lower(a) = full.lower.size() ? full.lower(i) : 0.0;
        sub.upper(a) = full.upper.size() ? full.upper(i) : 1.0;
        if (!full.cov.tickers.empty()) {
            sub.cov.tickers.push_back(full.cov.tickers[static_cast<std::size_t>(i)]);
        }
        for (Eigen::Index b = 0; b < m; ++b) {
            sub.cov.matrix(a, b) = full.cov.matrix(i, keep[static_cast<std::size_t>(b)]);
        }
    }
    return sub;
}

}  // namespace

void WeightVector::validate(double sum_tol, double box_tol) const {
    if (weights.size() == 0) throw SimplexViolation("empty weight vector");
    if (!weights.allFinite()) throw SimplexViolation("non-finite weight");
    if (std::abs(weights.sum() - 1.0) > sum_tol) {
        throw SimplexViolation("weights sum to " + format_double(weights.sum()));
    }
    if ((weights.array() < -box_tol).any() ||
        (weights.array() > 1.0 + box_tol).any()) {
        throw SimplexViolation("weight outside [0, 1]");
    }
    if (!tickers.empty() &&
        tickers.size() != static_cast<std::size_t>(weights.size())) {
        throw DimensionMismatch("ticker labels do not match weight count");
    }
}

void MvoProblem::validate() const {
    const Eigen::Index n = mu.size();
    if (n == 0) throw EmptyInput("empty expected-return vector");
    if (cov.matrix.rows() != n || cov.matrix.cols() != n) {
        throw DimensionMismatch("covariance does not match mu length");
    }
    if (lower.size() && lower.size() != n) {
        throw DimensionMismatch("lower bound length");
    }
    if (upper.size() && upper.size() != n) {
        throw DimensionMismatch("upper bound length");
    }
    Eigen::VectorXd l = lower.size() ? lower : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd u = upper.size() ? upper : Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (l(i) > u(i)) throw Infeasible("lower bound exceeds upper bound");
    }
    if (l.sum() > 1.0 + kBudgetTol || u.sum() < 1.0 - kBudgetTol) {
        throw Infeasible("bounds cannot reach the budget sum of 1");
    }
    if (max_assets && (*max_assets < 1 || *max_assets > n)) {
        throw Infeasible("max_assets outside [1, n]");
    }
}

double portfolio_variance(const WeightVector& w, const CovarianceEstimate& cov) {
    if (w.weights.size() != cov.matrix.rows()) {
        throw DimensionMismatch("weights vs covariance size");
    }
    double v = w.weights.dot(cov.matrix * w.weights);
    return v < 0.0 ? 0.0 : v;
}

CovarianceEstimate estimate_covariance(const data::ReturnMatrix& returns,
                                       bool repair) {
    const Eigen::Index T = returns.rows();
    const Eigen::Index n = returns.cols();
    if (T < 2) throw InsufficientData("covariance needs >= 2 rows");

    Eigen::MatrixXd centered =
        returns.values.rowwise() - returns.values.colwise().mean();
    Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(T - 1);
    cov = 0.5 * (cov + cov.transpose().eval());

    CovarianceEstimate est;
    est.matrix = std::move(cov);
    est.tickers = returns.tickers;
    est.repaired = false;

    if (repair) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(est.matrix);
        const double lambda_max = eig.eigenvalues().cwiseAbs().maxCoeff();
        // Rounding-scale negatives do not count as damage; clipping them
        // would also break repair idempotence at the bit level.
        const double flag_tol = 1e-12 * std::max(1.0, lambda_max);
        if (eig.eigenvalues().minCoeff() < -flag_tol) {
            Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
            Eigen::MatrixXd rebuilt = eig.eigenvectors() *
                                      clipped.asDiagonal() *
                                      eig.eigenvectors().transpose();
            est.matrix = 0.5 * (rebuilt + rebuilt.transpose().eval());
            est.repaired = true;
        }
    }
    (void)n;
    return est;
}

double diversification_floor(const CovarianceEstimate& cov) {
    if (cov.matrix.rows() == 0) throw EmptyInput("empty covariance");
    return cov.matrix.diagonal().minCoeff();
}

std::pair<double, double> feasible_return_range(const Eigen::VectorXd& mu,
                                                const Eigen::VectorXd& lower,
                                                const Eigen::VectorXd& upper) {
    const Eigen::Index n = mu.size();
    Eigen::VectorXd l = lower.size() ? lower : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd u = upper.size() ? upper : Eigen::VectorXd::Ones(n);

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    auto greedy = [&](bool maximize) {
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return maximize ? mu(a) > mu(b) : mu(a) < mu(b);
        });
        double budget = 1.0 - l.sum();
        double value = mu.dot(l);
        for (int i : order) {
            if (budget <= 0.0) break;
            double add = std::min(budget, u(i) - l(i));
            value += add * mu(i);
            budget -= add;
        }
        return value;
    };
    return {greedy(false), greedy(true)};
}

MvoSolution solve_mvo(const MvoProblem& problem, const SolverOptions& opts) {
    problem.validate();
    const Eigen::Index n = problem.mu.size();
    const Eigen::MatrixXd& sigma = problem.cov.matrix;
    Eigen::VectorXd lower =
        problem.lower.size() ? problem.lower : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd upper =
        problem.upper.size() ? problem.upper : Eigen::VectorXd::Ones(n);

    const Eigen::VectorXd* mu_ptr = nullptr;
    double target = 0.0;
    if (problem.target_return) {
        target = *problem.target_return;
        auto [r_min, r_max] = feasible_return_range(problem.mu, lower, upper);
        if (target < r_min - 1e-9 || target > r_max + 1e-9) {
            throw Infeasible("target return " + format_double(target) +
                             " outside feasible range [" + format_double(r_min) +
                             ", " + format_double(r_max) + "]");
        }
        mu_ptr = &problem.mu;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    const double lambda_max = std::max(0.0, eig.eigenvalues().maxCoeff());
    const double step = 1.0 / (2.0 * lambda_max + 1e-12);

    auto project = [&](const Eigen::VectorXd& x) {
        return project_feasible(x, lower, upper, mu_ptr, target);
    };

    Eigen::VectorXd w = project(Eigen::VectorXd::Constant(n, 1.0 / n));
    int iterations = 0;
    bool converged = false;
    for (; iterations < opts.max_iterations; ++iterations) {
        Eigen::VectorXd w_next = project(w - step * (2.0 * (sigma * w)));
        double delta = (w_next - w).lpNorm<Eigen::Infinity>();
        w = std::move(w_next);
        if (delta < opts.iterate_tol) {
            converged = true;
            ++iterations;
            break;
        }
    }

    const double residual =
        (w - project(w - step * (2.0 * (sigma * w)))).lpNorm<Eigen::Infinity>();
    if (!converged || residual > opts.kkt_tol) {
        throw NotConverged("solver stopped after " + std::to_string(iterations) +
                               " iterations with residual " +
                               format_double(residual),
                           residual);
    }

    // Exact-constraint polish; Dykstra leaves violations near 1e-14.
    w = project(w);
    if (std::abs(w.sum() - 1.0) > opts.constraint_tol ||
        (w.array() < lower.array() - opts.constraint_tol).any() ||
        (w.array() > upper.array() + opts.constraint_tol).any() ||
        (mu_ptr && std::abs(mu_ptr->dot(w) - target) > opts.constraint_tol)) {
        throw NotConverged("constraint violation above tolerance", residual);
    }

    MvoSolution sol;
    sol.weights.weights = std::move(w);
    sol.weights.tickers = problem.cov.tickers;
    sol.objective = sol.weights.weights.dot(sigma * sol.weights.weights);
    sol.kkt_residual = residual;
    sol.iterations = iterations;
    return sol;
}

MvoSolution solve_mvo_cardinality(const MvoProblem& problem,
                                  const SolverOptions& opts) {
    problem.validate();
    const Eigen::Index n = problem.mu.size();
    const int cap = problem.max_assets.value_or(static_cast<int>(n));
    if (cap >= n) return solve_mvo(problem, opts);

    Eigen::VectorXd upper =
        problem.upper.size() ? problem.upper : Eigen::VectorXd::Ones(n);

    auto ticker_of = [&](int i) {
        return problem.cov.tickers.empty()
                   ? std::to_string(i)
                   : problem.cov.tickers[static_cast<std::size_t>(i)];
    };

    std::vector<int> keep(static_cast<std::size_t>(n));
    std::iota(keep.begin(), keep.end(), 0);

    MvoSolution sub_sol = solve_mvo(subproblem(problem, keep), opts);
    while (static_cast<int>(keep.size()) > cap) {
        // Choose the prune victim: smallest weight, then larger variance,
        // then later ticker order. Skip a victim whose removal would leave
        // the budget unreachable.
        std::vector<std::size_t> order(keep.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double wa = sub_sol.weights.weights(static_cast<Eigen::Index>(a));
            const double wb = sub_sol.weights.weights(static_cast<Eigen::Index>(b));
            if (std::abs(wa - wb) > 1e-12) return wa < wb;
            const double va = problem.cov.matrix(keep[a], keep[a]);
            const double vb = problem.cov.matrix(keep[b], keep[b]);
            if (va != vb) return va > vb;
            return ticker_of(keep[a]) > ticker_of(keep[b]);
        });

        bool pruned = false;
        for (std::size_t cand : order) {
            double remaining_upper = 0.0;
            for (std::size_t i = 0; i < keep.size(); ++i) {
                if (i != cand) remaining_upper += upper(keep[i]);
            }
            if (remaining_upper < 1.0 - kBudgetTol) continue;
            keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(cand));
            pruned = true;
            break;
        }
        if (!pruned) {
            throw Infeasible("bounds cannot sum to 1 on any support of size " +
                             std::to_string(cap));
        }
        sub_sol = solve_mvo(subproblem(problem, keep), opts);
    }

    auto expand = [&](const MvoSolution& sub, const std::vector<int>& support) {
        MvoSolution full;
        full.weights.weights = Eigen::VectorXd::Zero(n);
        for (std::size_t a = 0; a < support.size(); ++a) {
            full.weights.weights(support[a]) =
                sub.weights.weights(static_cast<Eigen::Index>(a));
        }
        full.weights.tickers = problem.cov.tickers;
        full.objective = sub.objective;
        full.kkt_residual = sub.kkt_residual;
        full.iterations = sub.iterations;
        return full;
    };

    MvoSolution best = expand(sub_sol, keep);

    // Pruning can strand the portfolio on a poor support; a feasible single
    // asset is always within the cardinality cap, so never return worse.
    if (!problem.target_return) {
        Eigen::VectorXd lower =
            problem.lower.size() ? problem.lower : Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
            if (lower(i) <= 1.0 && upper(i) >= 1.0 &&
                problem.cov.matrix(i, i) < best.objective) {
                MvoSolution single;
                single.weights.weights = Eigen::VectorXd::Zero(n);
                single.weights.weights(i) = 1.0;
                single.weights.tickers = problem.cov.tickers;
                single.objective = problem.cov.matrix(i, i);
                single.kkt_residual = 0.0;
                single.iterations = 0;
                best = std::move(single);
            }
        }
    }
    return best;
}

FrontierResult efficient_frontier(const Eigen::VectorXd& mu,
                                  const CovarianceEstimate& cov, int n_points,
                                  const Eigen::VectorXd& lower,
                                  const Eigen::VectorXd& upper,
                                  const SolverOptions& opts) {
    if (n_points < 2) throw EmptyInput("frontier needs at least 2 points");
    auto [r_min, r_max] = feasible_return_range(mu, lower, upper);

    FrontierResult result;
    for (int k = 0; k < n_points; ++k) {
        double t = static_cast<double>(k) / (n_points - 1);
        double target = r_min + t * (r_max - r_min);
        MvoProblem p;
        p.mu = mu;
        p.cov = cov;
        p.lower = lower;
        p.upper = upper;
        p.target_return = target;
        try {
            MvoSolution sol = solve_mvo(p, opts);
            result.points.push_back(
                {target, sol.objective, std::move(sol.weights)});
        } catch (const Error& e) {
            result.warnings.push_back("target " + format_double(target) + ": " +
                                      e.what());
        }
    }
    return result;
}

std::string frontier_to_csv(const FrontierResult& frontier,
                            const std::vector<std::string>& tickers) {
    std::ostringstream out;
    out << "target_return,variance";
    for (const auto& t : tickers) out << ",w_" << t;
    out << '\n';
    for (const auto& pt : frontier.points) {
        out << format_double(pt.target_return) << ','
            << format_double(pt.variance);
        for (Eigen::Index i = 0; i < pt.weights.size(); ++i) {
            out << ',' << format_double(pt.weights.weights(i));
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace simreal::mpt
