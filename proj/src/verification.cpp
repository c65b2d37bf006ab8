#include "adeq/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "adeq/errors.hpp"

namespace adeq {

Eigen::VectorXd allocations(const BijectiveMarket& m, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& p) {
  if (b.size() != m.num_edges() || p.size() != m.size())
    throw ShapeMismatch("spending or prices do not match the market");
  const auto edges = m.edges();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m.num_edges());
  for (Eigen::Index k = 0; k < m.num_edges(); ++k) {
    if (b[k] == 0.0) continue;
    const int j = edges[k].good;
    if (!(p[j] > 0.0)) throw ZeroPrice(j);
    x[k] = b[k] / p[j];
  }
  return x;
}

Eigen::MatrixXd dense_allocation(const BijectiveMarket& m, const Eigen::VectorXd& x) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.size(), m.size());
  const auto edges = m.edges();
  for (Eigen::Index k = 0; k < m.num_edges(); ++k) out(edges[k].agent, edges[k].good) = x[k];
  return out;
}

double check_clearance(const Eigen::MatrixXd& x) {
  if (x.cols() == 0) return 0.0;
  return (x.colwise().sum().array() - 1.0).abs().maxCoeff();
}

double check_budget_balance(const Eigen::MatrixXd& x, const Eigen::VectorXd& p,
                            const Eigen::VectorXd& income) {
  const Eigen::VectorXd spent = x * p;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    worst = std::max(worst, std::abs(income[i] - spent[i]) / income[i]);
  return worst;
}

double check_buyer_optimality(const Eigen::MatrixXd& x, const Eigen::VectorXd& p,
                              const Eigen::MatrixXd& u, double support) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double best = 0.0;
    for (Eigen::Index k = 0; k < x.cols(); ++k)
      if (p[k] > 0.0) best = std::max(best, u(i, k) / p[k]);
    if (best <= 0.0) continue;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (!(x(i, j) > support) || !(p[j] > 0.0)) continue;
      worst = std::max(worst, (best - u(i, j) / p[j]) / best);
    }
  }
  return worst;
}

namespace {

void finish(EquilibriumCertificate& cert, double eps) {
  cert.epsilon = eps;
  cert.passed = cert.clearance_residual <= eps && cert.budget_residual <= eps &&
                cert.optimality_gap <= eps && cert.objective_value <= eps;
}

}  // namespace

EquilibriumCertificate certify(const SpendState& state, const BijectiveMarket& m, double eps,
                               double support) {
  if (state.b.size() != m.num_edges() || state.beta.size() != m.size())
    throw ShapeMismatch("state does not match the market");

  EquilibriumCertificate cert;
  cert.prices = prices(m, state.b);
  if ((cert.prices.array() <= 0.0).any()) {
    // An unpriced good cannot be part of an equilibrium.
    cert.clearance_residual = 1.0;
    cert.budget_residual = 1.0;
    cert.optimality_gap = 1.0;
    cert.objective_value = std::numeric_limits<double>::infinity();
    cert.allocation = Eigen::MatrixXd::Zero(m.size(), m.size());
    finish(cert, eps);
    return cert;
  }
  cert.allocation = dense_allocation(m, allocations(m, state.b, cert.prices));
  cert.clearance_residual = check_clearance(cert.allocation);
  cert.budget_residual = check_budget_balance(cert.allocation, cert.prices);
  cert.optimality_gap =
      check_buyer_optimality(cert.allocation, cert.prices, m.dense_utilities(), support);
  cert.objective_value = objective(m, state.b, best_beta(m, cert.prices));
  finish(cert, eps);
  return cert;
}

EquilibriumCertificate certify_exchange(const ExchangeSolution& sol, const MarketInstance& market,
                                        double objective_value, double eps, double support) {
  if (sol.allocation.rows() != market.num_agents() || sol.allocation.cols() != market.num_goods())
    throw ShapeMismatch("solution does not match the market");

  std::vector<Eigen::Index> supplied;
  const Eigen::RowVectorXd supply = market.endowments.colwise().sum();
  for (Eigen::Index j = 0; j < market.num_goods(); ++j)
    if (supply[j] > 0.0) supplied.push_back(j);
  const auto n_sup = static_cast<Eigen::Index>(supplied.size());

  Eigen::MatrixXd x(market.num_agents(), n_sup), u(market.num_agents(), n_sup);
  Eigen::VectorXd p(n_sup);
  for (Eigen::Index s = 0; s < n_sup; ++s) {
    x.col(s) = sol.allocation.col(supplied[s]) / supply[supplied[s]];
    u.col(s) = market.utilities.col(supplied[s]);
    p[s] = sol.prices[supplied[s]];
  }

  EquilibriumCertificate cert;
  cert.prices = sol.prices;
  cert.allocation = sol.allocation;
  cert.clearance_residual = check_clearance(x);
  cert.budget_residual = check_budget_balance(sol.allocation, sol.prices, sol.income);
  cert.optimality_gap = check_buyer_optimality(x, p, u, support);
  cert.objective_value = objective_value;
  finish(cert, eps);
  return cert;
}

}  // namespace adeq
