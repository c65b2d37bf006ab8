#include "adeq/fisher.hpp"

#include <cmath>

#include "adeq/errors.hpp"

namespace adeq {

void validate_fisher(const FisherMarket& m) {
  if (m.budgets.size() != m.utilities.rows())
    throw ShapeMismatch("budgets and utility rows differ in length");
  if (m.num_buyers() == 0 || m.num_goods() == 0)
    throw InputError("market must have at least one buyer and one good");
  for (int i = 0; i < m.num_buyers(); ++i) {
    if (!(m.budgets[i] > 0.0))
      throw InputError("buyer " + std::to_string(i) + " has a nonpositive budget");
    for (int j = 0; j < m.num_goods(); ++j)
      if (!(m.utilities(i, j) >= 0.0)) throw NegativeValue("utilities", i, j);
    if (!(m.utilities.row(i).maxCoeff() > 0.0)) throw NoDesiredGood(i);
  }
}

double fisher_objective(const FisherMarket& m, const Eigen::MatrixXd& b) {
  const Eigen::RowVectorXd p = b.colwise().sum();
  double total = 0.0;
  for (int i = 0; i < m.num_buyers(); ++i)
    for (int j = 0; j < m.num_goods(); ++j)
      if (b(i, j) != 0.0) total += b(i, j) * std::log(p[j] / m.utilities(i, j));
  return total;
}

Eigen::MatrixXd fisher_gradient(const FisherMarket& m, const Eigen::MatrixXd& b) {
  const Eigen::RowVectorXd p = b.colwise().sum();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(b.rows(), b.cols());
  for (int i = 0; i < m.num_buyers(); ++i)
    for (int j = 0; j < m.num_goods(); ++j)
      if (m.utilities(i, j) > 0.0) {
        if (!(p[j] > 0.0)) throw ZeroPrice(j);
        g(i, j) = 1.0 - std::log(m.utilities(i, j) / p[j]);
      }
  return g;
}

Eigen::MatrixXd pr_update(const FisherMarket& m, const Eigen::MatrixXd& b) {
  const Eigen::RowVectorXd p = b.colwise().sum();
  Eigen::MatrixXd next = Eigen::MatrixXd::Zero(b.rows(), b.cols());
  for (int i = 0; i < m.num_buyers(); ++i) {
    for (int j = 0; j < m.num_goods(); ++j)
      if (b(i, j) > 0.0) next(i, j) = b(i, j) * m.utilities(i, j) / p[j];
    const double z = next.row(i).sum();
    if (!(z > 0.0)) throw DegenerateRow(i);
    next.row(i) *= m.budgets[i] / z;
  }
  return next;
}

Eigen::MatrixXd fisher_initial_spending(const FisherMarket& m) {
  Eigen::MatrixXd b = (m.utilities.array() > 0.0).cast<double>().matrix();
  for (int i = 0; i < m.num_buyers(); ++i) b.row(i) *= m.budgets[i] / b.row(i).sum();
  return b;
}

FisherSolution fisher_solve(const FisherMarket& m, double tol, int max_iters) {
  validate_fisher(m);
  Eigen::MatrixXd b = fisher_initial_spending(m);
  Eigen::RowVectorXd p = b.colwise().sum();
  double change = 0.0;

  for (int t = 1; t <= max_iters; ++t) {
    b = pr_update(m, b);
    const Eigen::RowVectorXd next = b.colwise().sum();
    change = (next - p).lpNorm<Eigen::Infinity>();
    p = next;
    if (change <= tol) {
      FisherSolution sol;
      sol.prices = p.transpose();
      sol.spending = b;
      sol.allocation = Eigen::MatrixXd::Zero(b.rows(), b.cols());
      for (int j = 0; j < m.num_goods(); ++j)
        if (p[j] > 0.0) sol.allocation.col(j) = b.col(j) / p[j];
      sol.iterations = t;
      return sol;
    }
  }
  throw NoConvergence("proportional response did not converge", change);
}

}  // namespace adeq
