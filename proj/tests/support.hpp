#pragma once

#include <queue>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "adeq/market.hpp"
#include "adeq/program.hpp"
#include "adeq/projection.hpp"

namespace adeq::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Eigen::MatrixXd dense(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

/// Utilities with support density `density` and values in [0.5, 2]; every
/// row has at least one positive entry.
inline Eigen::MatrixXd random_utilities(Rng& rng, int n, double density = 0.5) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    while (u.row(i).maxCoeff() <= 0.0)
      for (int j = 0; j < n; ++j)
        u(i, j) = uniform(rng, 0.0, 1.0) < density ? uniform(rng, 0.5, 2.0) : 0.0;
  }
  return u;
}

/// A random bijective market with 1 <= n <= max_n, optionally filtered on
/// condition (*).
inline BijectiveMarket random_market(Rng& rng, int max_n, bool require_star = true,
                                     double density = 0.5) {
  for (;;) {
    const int n = uniform_int(rng, 1, max_n);
    BijectiveMarket m = BijectiveMarket::from_dense(random_utilities(rng, n, density));
    if (!require_star || check_condition_star(m).satisfied) return m;
  }
}

/// Positive spending with every row and column sum at least one. Not balanced.
inline Eigen::VectorXd random_spending(Rng& rng, const BijectiveMarket& m) {
  Eigen::VectorXd b(m.num_edges());
  for (Eigen::Index k = 0; k < b.size(); ++k) b[k] = uniform(rng, 0.05, 2.0);
  const Eigen::VectorXd p = prices(m, b), r = row_sums(m, b);
  double low = r.minCoeff();
  for (int j = 0; j < m.size(); ++j)
    if (!m.edges_into(j).empty()) low = std::min(low, p[j]);
  if (low < 1.0) b /= low;
  return b;
}

/// A state with p >= 1 and beta_i u_ij <= p_j, beta at most best_beta.
inline SpendState random_feasible_state(Rng& rng, const BijectiveMarket& m) {
  SpendState s;
  s.b = random_spending(rng, m);
  s.beta = best_beta(m, prices(m, s.b));
  for (Eigen::Index i = 0; i < s.beta.size(); ++i) s.beta[i] *= uniform(rng, 0.5, 1.0);
  return s;
}

/// Edge indices of a shortest cycle through node v, or empty if none.
inline std::vector<Eigen::Index> cycle_through(const BijectiveMarket& m, int v) {
  std::vector<Eigen::Index> via(m.size(), -1);
  std::vector<bool> seen(m.size(), false);
  std::queue<int> queue;
  queue.push(v);
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop();
    for (Eigen::Index k = m.agent_begin(i); k < m.agent_end(i); ++k) {
      const int j = m.edges()[k].good;
      if (j == v) {
        std::vector<Eigen::Index> cycle{k};
        for (int at = i; at != v; at = m.edges()[via[at]].agent) cycle.push_back(via[at]);
        return cycle;
      }
      if (!seen[j]) {
        seen[j] = true;
        via[j] = k;
        queue.push(j);
      }
    }
  }
  return {};
}

/// A balanced spending vector with every row sum at least one, built from
/// random multiples of cycles. Needs condition (*).
inline Eigen::VectorXd random_circulation(Rng& rng, const BijectiveMarket& m) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m.num_edges());
  for (int v = 0; v < m.size(); ++v) {
    const double w = uniform(rng, 0.2, 1.0);
    for (Eigen::Index k : cycle_through(m, v)) z[k] += w;
  }
  const double low = row_sums(m, z).minCoeff();
  return z / std::min(low, 1.0);
}

struct Problem {
  BijectiveMarket market;
  FeasibleSetSpec spec;
  Eigen::VectorXd anchor;  // a point of the set
};

// Floors sit below the prices of a random circulation, so the set is never
// empty.
inline Problem random_problem(Rng& rng, int max_n, bool balanced) {
  BijectiveMarket m = random_market(rng, max_n, true, 0.6);
  const Eigen::VectorXd z = random_circulation(rng, m) * uniform(rng, 1.0, 2.0);
  Eigen::VectorXd beta = best_beta(m, prices(m, z));
  for (Eigen::Index i = 0; i < beta.size(); ++i) beta[i] *= uniform(rng, 0.5, 1.0);
  const double cap = row_sums(m, z).maxCoeff() * uniform(rng, 1.0, 1.5);
  FeasibleSetSpec spec = FeasibleSetSpec::from_beta(m, beta, cap, balanced);
  return {std::move(m), std::move(spec), z};
}

inline Eigen::VectorXd random_point(Rng& rng, Eigen::Index dim, double scale) {
  Eigen::VectorXd x(dim);
  for (Eigen::Index k = 0; k < dim; ++k) x[k] = uniform(rng, -scale, scale);
  return x;
}

// A random feasible point: a scaled circulation when it fits, else a point on
// the segment to the anchor.
inline Eigen::VectorXd random_member(Rng& rng, const Problem& pr) {
  const BijectiveMarket& m = pr.market;
  Eigen::VectorXd z = random_circulation(rng, m);
  const Eigen::VectorXd p = prices(m, z);
  double scale = 1.0;
  for (int j = 0; j < m.size(); ++j)
    if (!m.edges_into(j).empty()) scale = std::max(scale, pr.spec.floors[j] / p[j]);
  z *= scale * uniform(rng, 1.0, 1.2);
  const double t = uniform(rng, 0.0, 1.0);
  if (row_sums(m, z).maxCoeff() > pr.spec.row_cap) z = pr.anchor;
  return t * z + (1 - t) * pr.anchor;
}

inline double residual(const Problem& pr, const Eigen::VectorXd& x) {
  return constraint_residuals(pr.market, x, pr.spec.floors, pr.spec.row_cap, pr.spec.balanced)
      .max();
}

}  // namespace adeq::testing
