#include "adeq/projection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <optional>
#include <string>
#include <vector>

#include "adeq/errors.hpp"

namespace adeq {

namespace {

void check_capacity(const BijectiveMarket& m, const FeasibleSetSpec& spec) {
  if (spec.row_cap < 1.0) throw EmptyFeasibleSet("row cap below the unit row floor");
  for (int j = 0; j < m.size(); ++j) {
    const double reach = spec.balanced ? spec.row_cap
                                       : spec.row_cap * static_cast<double>(m.edges_into(j).size());
    // Floors rebuilt from prices sitting at the cap can overshoot it by a
    // rounding error.
    if (spec.floors[j] > reach * (1.0 + 1e-9))
      throw EmptyFeasibleSet("column floor of good " + std::to_string(j) + " exceeds the row cap");
  }
}

// The inequalities of the set as rows of G x >= h: orthant, row floors and
// caps, column floors.
struct Inequalities {
  Eigen::MatrixXd g;
  Eigen::VectorXd h;
};

Inequalities inequalities(const BijectiveMarket& m, const FeasibleSetSpec& spec) {
  const Eigen::Index dim = m.num_edges();
  Eigen::Index count = dim + 2 * m.size();
  for (int j = 0; j < m.size(); ++j)
    if (!m.edges_into(j).empty()) ++count;
  Inequalities in{Eigen::MatrixXd::Zero(count, dim), Eigen::VectorXd::Zero(count)};
  Eigen::Index s = 0;
  for (Eigen::Index k = 0; k < dim; ++k) in.g(s++, k) = 1.0;
  for (int i = 0; i < m.size(); ++i) {
    const Eigen::Index first = m.agent_begin(i), deg = m.agent_end(i) - first;
    in.g.row(s).segment(first, deg).setOnes();
    in.h[s++] = 1.0;
    in.g.row(s).segment(first, deg).setConstant(-1.0);
    in.h[s++] = -spec.row_cap;
  }
  for (int j = 0; j < m.size(); ++j) {
    if (m.edges_into(j).empty()) continue;
    for (int k : m.edges_into(j)) in.g(s, k) = 1.0;
    in.h[s++] = spec.floors[j];
  }
  return in;
}

}  // namespace

FeasibleSetSpec FeasibleSetSpec::from_beta(const BijectiveMarket& m, const Eigen::VectorXd& beta,
                                           double row_cap, bool balanced) {
  FeasibleSetSpec spec{column_floors(m, beta), row_cap, balanced};
  check_capacity(m, spec);
  return spec;
}

FeasibleSetSpec FeasibleSetSpec::unit(const BijectiveMarket& m, double row_cap, bool balanced) {
  FeasibleSetSpec spec{Eigen::VectorXd::Zero(m.size()), row_cap, balanced};
  for (int j = 0; j < m.size(); ++j)
    if (!m.edges_into(j).empty()) spec.floors[j] = 1.0;
  check_capacity(m, spec);
  return spec;
}

Eigen::VectorXd project_halfspace(const Eigen::VectorXd& x, const Eigen::VectorXd& a, double rhs,
                                  Sense sense) {
  const double norm2 = a.squaredNorm();
  if (norm2 == 0.0) throw ZeroNormal();
  const double value = a.dot(x);
  const bool holds = sense == Sense::LessEqual ? value <= rhs : value >= rhs;
  if (holds) return x;
  return x - ((value - rhs) / norm2) * a;
}

Projector::Projector(const BijectiveMarket& m)
    : market_(m), balance_(Eigen::MatrixXd::Zero(m.size(), m.num_edges())) {
  const auto edges = m.edges();
  for (Eigen::Index k = 0; k < m.num_edges(); ++k) {
    balance_(edges[k].agent, k) += 1.0;
    balance_(edges[k].good, k) -= 1.0;
  }
  gram_.compute(balance_ * balance_.transpose());
}

Eigen::VectorXd Projector::project_balance(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd imbalance = balance_ * x;
  return x - balance_.transpose() * gram_.solve(imbalance);
}

void Projector::project_rows(Eigen::VectorXd& x, double row_cap) const {
  for (int i = 0; i < market_.size(); ++i) {
    const Eigen::Index first = market_.agent_begin(i);
    const Eigen::Index deg = market_.agent_end(i) - first;
    const double r = x.segment(first, deg).sum();
    double target = r;
    if (r < 1.0)
      target = 1.0;
    else if (r > row_cap)
      target = row_cap;
    if (target != r) x.segment(first, deg).array() += (target - r) / static_cast<double>(deg);
  }
}

void Projector::project_columns(Eigen::VectorXd& x, const Eigen::VectorXd& floors) const {
  for (int j = 0; j < market_.size(); ++j) {
    const auto into = market_.edges_into(j);
    if (into.empty()) continue;
    double p = 0.0;
    for (int k : into) p += x[k];
    if (p >= floors[j]) continue;
    const double shift = (floors[j] - p) / static_cast<double>(into.size());
    for (int k : into) x[k] += shift;
  }
}

Eigen::VectorXd Projector::project(const Eigen::VectorXd& raw, const FeasibleSetSpec& spec,
                                   const ProjectionOptions& opts) const {
  const Eigen::Index dim = market_.num_edges();
  if (raw.size() != dim) throw ShapeMismatch("projection input does not match the edge set");

  // Dykstra increments, one per member set.
  Eigen::VectorXd q_bal = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd q_row = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd q_col = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd q_pos = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd x = raw, y(dim), start(dim);
  int next_polish = 0;

  for (int cycle = 1; cycle <= opts.max_cycles; ++cycle) {
    start = x;
    double moved = 0.0;  // largest change of any increment this cycle
    const auto settle = [&](Eigen::VectorXd& q) {
      const Eigen::VectorXd next = y - x;
      moved = std::max(moved, (next - q).lpNorm<Eigen::Infinity>());
      q = next;
    };
    if (spec.balanced) {
      y = x + q_bal;
      x = project_balance(y);
      settle(q_bal);
    }
    y = x + q_row;
    x = y;
    project_rows(x, spec.row_cap);
    settle(q_row);

    y = x + q_pos;
    x = y.cwiseMax(0.0);
    settle(q_pos);

    y = x + q_col;
    x = y;
    project_columns(x, spec.floors);
    settle(q_col);

    // The iterate can sit still for many cycles while the increments are
    // still shifting, and can creep along a face while violating the other
    // sets; both must have settled.
    const double change = std::max((x - start).lpNorm<Eigen::Infinity>(), moved);
    if (change <= opts.tol || cycle % opts.polish_every == 0) {
      const double residual =
          constraint_residuals(market_, x, spec.floors, spec.row_cap, spec.balanced).max();
      if (change <= opts.tol && residual <= 10.0 * opts.tol) {
        last_cycles_ = cycle;
        return x;
      }
      // Stuck short of the set: the iterate no longer moves by a full ulp per
      // cycle. Finish with an exact active-set solve.
      if (cycle >= next_polish) {
        next_polish = cycle + opts.polish_every;
        if (auto exact = active_set_projection(market_, raw, spec, opts.tol)) {
          last_cycles_ = cycle;
          return *exact;
        }
      }
    }
  }
  last_cycles_ = opts.max_cycles;
  throw NoConvergence("Dykstra projection did not converge",
                      constraint_residuals(market_, x, spec.floors, spec.row_cap, spec.balanced)
                          .max());
}

std::optional<Eigen::VectorXd> active_set_projection(const BijectiveMarket& m,
                                                     const Eigen::VectorXd& raw,
                                                     const FeasibleSetSpec& spec, double tol) {
  const Eigen::Index dim = m.num_edges();
  if (raw.size() != dim) throw ShapeMismatch("projection input does not match the edge set");
  const Inequalities in = inequalities(m, spec);

  // Orthonormal basis of the balance equations.
  Eigen::MatrixXd eq(dim, 0);
  if (spec.balanced) {
    Eigen::MatrixXd balance = Eigen::MatrixXd::Zero(dim, m.size());
    const auto edges = m.edges();
    for (Eigen::Index k = 0; k < dim; ++k) {
      balance(k, edges[k].agent) += 1.0;
      balance(k, edges[k].good) -= 1.0;
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(balance);
    const Eigen::MatrixXd q = qr.householderQ();
    eq = q.leftCols(qr.rank());
  }
  const Eigen::Index neq = eq.cols();

  Eigen::VectorXd x = raw - eq * (eq.transpose() * raw);
  std::vector<Eigen::Index> active;
  std::vector<double> mult;

  const Eigen::Index limit = 10 * (in.g.rows() + 10);
  for (Eigen::Index iter = 0; iter < limit; ++iter) {
    Eigen::Index add;
    if ((in.g * x - in.h).minCoeff(&add) >= -tol) return x;
    const Eigen::VectorXd n = in.g.row(add).transpose();
    double added = 0.0;

    for (;;) {
      Eigen::MatrixXd normals(dim, neq + static_cast<Eigen::Index>(active.size()));
      normals.leftCols(neq) = eq;
      for (std::size_t a = 0; a < active.size(); ++a)
        normals.col(neq + static_cast<Eigen::Index>(a)) = in.g.row(active[a]).transpose();
      const Eigen::VectorXd r = normals.cols() > 0 ? Eigen::VectorXd(normals.colPivHouseholderQr().solve(n))
                                                   : Eigen::VectorXd();
      const Eigen::VectorXd z = n - normals * r;

      // Largest dual step before an active multiplier hits zero.
      double partial = std::numeric_limits<double>::infinity();
      std::size_t block = active.size();
      for (std::size_t a = 0; a < active.size(); ++a) {
        const double ra = r[neq + static_cast<Eigen::Index>(a)];
        if (ra > 1e-14 && mult[a] / ra < partial) {
          partial = mult[a] / ra;
          block = a;
        }
      }

      const bool dependent = z.norm() <= 1e-12 * n.norm();
      if (dependent && block == active.size()) return std::nullopt;
      const double full =
          dependent ? std::numeric_limits<double>::infinity() : -(n.dot(x) - in.h[add]) / z.dot(n);
      const double t = std::min(partial, full);

      if (!dependent) x += t * z;
      for (std::size_t a = 0; a < active.size(); ++a)
        mult[a] -= t * r[neq + static_cast<Eigen::Index>(a)];
      added += t;

      if (full <= partial) {
        active.push_back(add);
        mult.push_back(added);
        break;
      }
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(block));
      mult.erase(mult.begin() + static_cast<std::ptrdiff_t>(block));
    }
  }
  return std::nullopt;
}

Eigen::VectorXd exact_projection_oracle(const BijectiveMarket& m, const Eigen::VectorXd& raw,
                                        const FeasibleSetSpec& spec) {
  const Eigen::Index dim = m.num_edges();
  if (dim > 16) throw TooLarge("exact projection oracle supports at most 16 edges");
  if (raw.size() != dim) throw ShapeMismatch("projection input does not match the edge set");
  const auto edges = m.edges();

  // Inequalities as rows of G x >= h.
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (Eigen::Index k = 0; k < dim; ++k) {
    rows.push_back(Eigen::VectorXd::Unit(dim, k));
    rhs.push_back(0.0);
  }
  for (int i = 0; i < m.size(); ++i) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
    a.segment(m.agent_begin(i), m.agent_end(i) - m.agent_begin(i)).setOnes();
    rows.push_back(a);
    rhs.push_back(1.0);
    rows.push_back(-a);
    rhs.push_back(-spec.row_cap);
  }
  for (int j = 0; j < m.size(); ++j) {
    if (m.edges_into(j).empty()) continue;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
    for (int k : m.edges_into(j)) a[k] = 1.0;
    rows.push_back(a);
    rhs.push_back(spec.floors[j]);
  }
  const int num_ineq = static_cast<int>(rows.size());

  // A linearly independent subset of the balance equations.
  std::vector<Eigen::VectorXd> eq_rows;
  if (spec.balanced) {
    for (int i = 0; i < m.size(); ++i) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
      for (Eigen::Index k = 0; k < dim; ++k) {
        if (edges[k].agent == i) a[k] += 1.0;
        if (edges[k].good == i) a[k] -= 1.0;
      }
      Eigen::MatrixXd trial(static_cast<Eigen::Index>(eq_rows.size()) + 1, dim);
      for (std::size_t r = 0; r < eq_rows.size(); ++r) trial.row(r) = eq_rows[r].transpose();
      trial.row(trial.rows() - 1) = a.transpose();
      if (Eigen::FullPivLU<Eigen::MatrixXd>(trial).rank() == trial.rows()) eq_rows.push_back(a);
    }
  }
  const int num_eq = static_cast<int>(eq_rows.size());
  const double feas_tol = 1e-9 * (1.0 + spec.row_cap);

  std::vector<int> active;
  Eigen::VectorXd found;
  bool done = false;

  auto try_active = [&]() {
    const Eigen::Index rows_c = static_cast<Eigen::Index>(active.size()) + num_eq;
    Eigen::VectorXd x = raw;
    if (rows_c > 0) {
      Eigen::MatrixXd c(rows_c, dim);
      Eigen::VectorXd d(rows_c);
      for (std::size_t s = 0; s < active.size(); ++s) {
        c.row(s) = rows[active[s]].transpose();
        d[s] = rhs[active[s]];
      }
      for (int e = 0; e < num_eq; ++e) {
        c.row(static_cast<Eigen::Index>(active.size()) + e) = eq_rows[e].transpose();
        d[static_cast<Eigen::Index>(active.size()) + e] = 0.0;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(c);
      if (lu.rank() < rows_c) return;
      // x = raw + C^T mu with C x = d.
      const Eigen::VectorXd mu = (c * c.transpose()).ldlt().solve(d - c * raw);
      for (std::size_t s = 0; s < active.size(); ++s)
        if (mu[static_cast<Eigen::Index>(s)] < -1e-10) return;
      x = raw + c.transpose() * mu;
    }
    for (int s = 0; s < num_ineq; ++s)
      if (rows[s].dot(x) < rhs[s] - feas_tol) return;
    found = x;
    done = true;
  };

  std::function<void(int, int)> choose = [&](int next, int remaining) {
    if (done) return;
    if (remaining == 0) {
      try_active();
      return;
    }
    for (int s = next; s <= num_ineq - remaining && !done; ++s) {
      active.push_back(s);
      choose(s + 1, remaining - 1);
      active.pop_back();
    }
  };

  const int max_active = static_cast<int>(dim) - num_eq;
  for (int size = 0; size <= max_active && !done; ++size) choose(0, size);
  if (!done) throw EmptyFeasibleSet("no active set satisfies the optimality conditions");
  return found;
}

}  // namespace adeq
