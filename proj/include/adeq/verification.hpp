#pragma once

#include <Eigen/Dense>

#include "adeq/market.hpp"
#include "adeq/program.hpp"

namespace adeq {

struct EquilibriumCertificate {
  Eigen::VectorXd prices;
  Eigen::MatrixXd allocation;  ///< dense, agents x goods
  double clearance_residual = 0.0;
  double budget_residual = 0.0;
  double optimality_gap = 0.0;
  double objective_value = 0.0;
  double epsilon = 0.0;
  bool cap_binding = false;
  bool passed = false;
};

inline constexpr double kDefaultSupportThreshold = 1e-8;

/// x_ij = b_ij / p_j on every edge. Throws ZeroPrice if money is spent on a
/// good with nonpositive price.
Eigen::VectorXd allocations(const BijectiveMarket& m, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& p);

/// Edge allocations scattered into an n x n matrix.
Eigen::MatrixXd dense_allocation(const BijectiveMarket& m, const Eigen::VectorXd& x);

/// max_j |sum_i x_ij - 1|.
double check_clearance(const Eigen::MatrixXd& x);

/// max_i |income_i - sum_j x_ij p_j| / income_i.
double check_budget_balance(const Eigen::MatrixXd& x, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& income);

/// Bijective markets: income is the agent's own price.
inline double check_budget_balance(const Eigen::MatrixXd& x, const Eigen::VectorXd& p) {
  return check_budget_balance(x, p, p);
}

/// Worst relative shortfall (best - u_ij/p_j) / best over goods an agent
/// actually buys (x_ij > support), where best = max_k u_ik / p_k. Agents
/// buying nothing contribute 0.
double check_buyer_optimality(const Eigen::MatrixXd& x, const Eigen::VectorXd& p,
                              const Eigen::MatrixXd& u,
                              double support = kDefaultSupportThreshold);

/// Certificate for a spending state of a bijective market, with the
/// objective evaluated at beta = best_beta(p). Throws ShapeMismatch when the
/// state does not fit the market.
EquilibriumCertificate certify(const SpendState& state, const BijectiveMarket& m, double eps,
                               double support = kDefaultSupportThreshold);

/// Certificate in the original market's agents and goods. Goods nobody is
/// endowed with are left out of the price-based checks.
EquilibriumCertificate certify_exchange(const ExchangeSolution& sol, const MarketInstance& market,
                                        double objective_value, double eps,
                                        double support = kDefaultSupportThreshold);

}  // namespace adeq
