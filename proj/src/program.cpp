#include "adeq/program.hpp"

#include <algorithm>
#include <cmath>

namespace adeq {

Eigen::VectorXd column_floors(const BijectiveMarket& m, const Eigen::VectorXd& beta) {
  Eigen::VectorXd floors = Eigen::VectorXd::Zero(m.size());
  const auto edges = m.edges();
  for (int j = 0; j < m.size(); ++j) {
    if (m.edges_into(j).empty()) continue;
    double c = 1.0;
    for (int k : m.edges_into(j)) c = std::max(c, beta[edges[k].agent] * m.utility()[k]);
    floors[j] = c;
  }
  return floors;
}

double FeasibilityResiduals::max() const {
  return std::max({nonnegativity, row_floor, row_cap, column_floor, balance});
}

FeasibilityResiduals constraint_residuals(const BijectiveMarket& m, const Eigen::VectorXd& b,
                                          const Eigen::VectorXd& floors, double row_cap,
                                          bool balanced) {
  FeasibilityResiduals res;
  if (b.size() > 0) res.nonnegativity = std::max(0.0, -b.minCoeff());
  const Eigen::VectorXd r = row_sums(m, b);
  const Eigen::VectorXd p = prices(m, b);
  for (int i = 0; i < m.size(); ++i) {
    res.row_floor = std::max(res.row_floor, 1.0 - r[i]);
    res.row_cap = std::max(res.row_cap, r[i] - row_cap);
    if (!m.edges_into(i).empty())
      res.column_floor = std::max(res.column_floor, floors[i] - p[i]);
    if (balanced) res.balance = std::max(res.balance, std::abs(r[i] - p[i]));
  }
  return res;
}

double default_row_cap(const BijectiveMarket& m) {
  const double n = m.size();
  const double ratio = m.utility().maxCoeff() / m.utility().minCoeff();
  return n * n * std::max(1.0, ratio);
}

ProgramConstants estimate_constants(const BijectiveMarket& m, double row_cap) {
  const double n = m.size();
  const double u_max = m.utility().maxCoeff();
  const double u_min = m.utility().minCoeff();
  const double p_lo = 1.0, p_hi = n * row_cap;
  const double beta_lo = u_min / (n * row_cap * u_max);
  const double beta_hi = n * row_cap / u_min;

  // 1 + log(p / (beta u)) is monotone in its argument, so the envelope
  // extremes sit at the corners.
  double worst = 0.0;
  for (Eigen::Index k = 0; k < m.num_edges(); ++k) {
    const double u = m.utility()[k];
    worst = std::max({worst, std::abs(std::log(p_hi / (beta_lo * u))),
                      std::abs(std::log(p_lo / (beta_hi * u)))});
  }

  ProgramConstants c;
  c.lambda = n;
  c.diameter = row_cap * std::sqrt(2.0 * n);
  c.gamma = std::sqrt(static_cast<double>(m.num_edges())) * (1.0 + worst);
  c.row_cap = row_cap;
  return c;
}

}  // namespace adeq
