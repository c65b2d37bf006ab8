#pragma once

#include <Eigen/Dense>

namespace adeq {

/// Linear Fisher market: buyers with fixed budgets, goods with unit supply.
/// Spending matrices are dense, buyers x goods, zero off the support of u.
struct FisherMarket {
  Eigen::VectorXd budgets;
  Eigen::MatrixXd utilities;

  int num_buyers() const { return static_cast<int>(utilities.rows()); }
  int num_goods() const { return static_cast<int>(utilities.cols()); }
};

/// Throws InputError for a nonpositive budget, NegativeValue for a negative
/// utility, NoDesiredGood for a buyer without positive utility.
void validate_fisher(const FisherMarket& m);

/// sum_ij b_ij log(p_j / u_ij), 0 log 0 = 0.
double fisher_objective(const FisherMarket& m, const Eigen::MatrixXd& b);

/// 1 - log(u_ij / p_j) on the support of u, 0 elsewhere.
Eigen::MatrixXd fisher_gradient(const FisherMarket& m, const Eigen::MatrixXd& b);

/// Proportional response: b'_ij = b_ij (u_ij / p_j) / Z_i, rows renormalized
/// to the budgets. Throws DegenerateRow.
Eigen::MatrixXd pr_update(const FisherMarket& m, const Eigen::MatrixXd& b);

struct FisherSolution {
  Eigen::VectorXd prices;
  Eigen::MatrixXd allocation;
  Eigen::MatrixXd spending;
  int iterations = 0;
};

/// Budget split evenly over each buyer's desired goods.
Eigen::MatrixXd fisher_initial_spending(const FisherMarket& m);

/// Runs PR until the l-infinity price change is at most tol. Throws
/// NoConvergence.
FisherSolution fisher_solve(const FisherMarket& m, double tol = 1e-12, int max_iters = 1'000'000);

}  // namespace adeq
