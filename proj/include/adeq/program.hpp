#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "adeq/errors.hpp"
#include "adeq/market.hpp"

namespace adeq {

// The convex program over spending b (one entry per edge) and inverse best
// bang-per-buck beta (one entry per agent):
//
//   Phi(b, beta) = sum_j p_j log p_j - sum_i r_i log beta_i - sum_E b_ij log u_ij
//                = sum_E b_ij log(p_j / (beta_i u_ij)),
//
// with column sums p and row sums r, and 0 log 0 = 0. On balanced points
// (r = p) this is the Devanur et al. objective.

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Money spent by agent i and beta_i.
struct SpendState {
  Eigen::VectorXd b;
  Eigen::VectorXd beta;
};

/// Column sums p_j = sum_i b_ij.
template <typename Derived>
VectorX<typename Derived::Scalar> prices(const BijectiveMarket& m,
                                         const Eigen::MatrixBase<Derived>& b) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> p = VectorX<Scalar>::Zero(m.size());
  const auto edges = m.edges();
  for (Eigen::Index k = 0; k < m.num_edges(); ++k) p[edges[k].good] += b[k];
  return p;
}

/// Row sums r_i = sum_j b_ij.
template <typename Derived>
VectorX<typename Derived::Scalar> row_sums(const BijectiveMarket& m,
                                           const Eigen::MatrixBase<Derived>& b) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> r = VectorX<Scalar>::Zero(m.size());
  const auto edges = m.edges();
  for (Eigen::Index k = 0; k < m.num_edges(); ++k) r[edges[k].agent] += b[k];
  return r;
}

template <typename DerivedB, typename DerivedBeta>
typename DerivedB::Scalar objective(const BijectiveMarket& m, const Eigen::MatrixBase<DerivedB>& b,
                                    const Eigen::MatrixBase<DerivedBeta>& beta) {
  using Scalar = typename DerivedB::Scalar;
  using std::log;
  const VectorX<Scalar> p = prices(m, b);
  const auto edges = m.edges();
  Scalar total(0);
  for (Eigen::Index k = 0; k < m.num_edges(); ++k) {
    if (b[k] == Scalar(0)) continue;
    const Edge e = edges[k];
    total += b[k] * log(p[e.good] / (Scalar(beta[e.agent]) * Scalar(m.utility()[k])));
  }
  return total;
}

/// d Phi / d b_ij = 1 - log(beta_i u_ij / p_j). Throws ZeroPrice.
template <typename DerivedB, typename DerivedBeta>
VectorX<typename DerivedB::Scalar> gradient(const BijectiveMarket& m,
                                            const Eigen::MatrixBase<DerivedB>& b,
                                            const Eigen::MatrixBase<DerivedBeta>& beta) {
  using Scalar = typename DerivedB::Scalar;
  using std::log;
  const VectorX<Scalar> p = prices(m, b);
  const auto edges = m.edges();
  VectorX<Scalar> g(m.num_edges());
  for (Eigen::Index k = 0; k < m.num_edges(); ++k) {
    const Edge e = edges[k];
    if (!(p[e.good] > Scalar(0))) throw ZeroPrice(e.good);
    g[k] = Scalar(1) - log(Scalar(beta[e.agent]) * Scalar(m.utility()[k]) / p[e.good]);
  }
  return g;
}

/// z^T H z for the Hessian of Phi(., beta) at b: sum_j (sum_i z_ij)^2 / p_j.
template <typename DerivedB, typename DerivedZ>
typename DerivedB::Scalar hessian_quadratic_form(const BijectiveMarket& m,
                                                 const Eigen::MatrixBase<DerivedB>& b,
                                                 const Eigen::MatrixBase<DerivedZ>& z) {
  using Scalar = typename DerivedB::Scalar;
  const VectorX<Scalar> p = prices(m, b);
  const VectorX<Scalar> zp = prices(m, z.template cast<Scalar>());
  Scalar total(0);
  for (int j = 0; j < m.size(); ++j) {
    if (m.edges_into(j).empty()) continue;
    if (!(p[j] > Scalar(0))) throw ZeroPrice(j);
    total += zp[j] * zp[j] / p[j];
  }
  return total;
}

/// beta_i = min over agent i's edges of p_j / u_ij.
template <typename Derived>
VectorX<typename Derived::Scalar> best_beta(const BijectiveMarket& m,
                                            const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  const auto edges = m.edges();
  VectorX<Scalar> beta(m.size());
  for (int i = 0; i < m.size(); ++i) {
    Scalar best = p[edges[m.agent_begin(i)].good] / Scalar(m.utility()[m.agent_begin(i)]);
    for (Eigen::Index k = m.agent_begin(i) + 1; k < m.agent_end(i); ++k)
      best = std::min(best, Scalar(p[edges[k].good] / Scalar(m.utility()[k])));
    beta[i] = best;
  }
  return beta;
}

/// Lower bounds on column sums implied by beta: max(1, max_i beta_i u_ij).
/// Goods nobody desires get 0; they carry no variables.
Eigen::VectorXd column_floors(const BijectiveMarket& m, const Eigen::VectorXd& beta);

/// Largest violation of each constraint family of the projection set.
struct FeasibilityResiduals {
  double nonnegativity = 0.0;
  double row_floor = 0.0;
  double row_cap = 0.0;
  double column_floor = 0.0;
  double balance = 0.0;

  double max() const;
  bool feasible(double tol) const { return max() <= tol; }
};

FeasibilityResiduals constraint_residuals(const BijectiveMarket& m, const Eigen::VectorXd& b,
                                          const Eigen::VectorXd& floors, double row_cap,
                                          bool balanced);

inline FeasibilityResiduals feasibility_residuals(const BijectiveMarket& m,
                                                  const Eigen::VectorXd& b,
                                                  const Eigen::VectorXd& beta, double row_cap,
                                                  bool balanced) {
  return constraint_residuals(m, b, column_floors(m, beta), row_cap, balanced);
}

/// Constants of the descent analysis. `gamma` and `diameter` are
/// conservative envelopes over the capped feasible set, not tight values.
struct ProgramConstants {
  double lambda = 0.0;
  double gamma = 0.0;
  double diameter = 0.0;
  double row_cap = 0.0;
};

/// n^2 * max(1, u_max / u_min).
double default_row_cap(const BijectiveMarket& m);

/// lambda = n; diameter = row_cap * sqrt(2n); gamma bounds ||grad||_2 for
/// p_j in [1, n row_cap] and beta_i in [u_min / (n row_cap u_max), n row_cap / u_min].
ProgramConstants estimate_constants(const BijectiveMarket& m, double row_cap);

}  // namespace adeq
