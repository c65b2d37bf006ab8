#include "adeq/market.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "adeq/errors.hpp"
#include "adeq/scc.hpp"

namespace adeq {

BijectiveMarket::BijectiveMarket(int n, std::vector<Edge> edges, const Eigen::VectorXd& utility,
                                 std::optional<OriginMap> origin)
    : n_(n), origin_(std::move(origin)) {
  if (n <= 0) throw InputError("market must have at least one agent");
  if (static_cast<Eigen::Index>(edges.size()) != utility.size())
    throw ShapeMismatch("edge list and utility vector differ in length");
  if (origin_ && static_cast<int>(origin_->copies.size()) != n)
    throw ShapeMismatch("origin map must list one entry per agent");

  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(edges[a].agent, edges[a].good) < std::pair(edges[b].agent, edges[b].good);
  });

  edges_.reserve(edges.size());
  utility_.resize(utility.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Edge e = edges[order[k]];
    const double u = utility[static_cast<Eigen::Index>(order[k])];
    if (e.agent < 0 || e.agent >= n || e.good < 0 || e.good >= n)
      throw InputError("edge (" + std::to_string(e.agent) + ", " + std::to_string(e.good) +
                       ") out of range");
    if (!(u > 0.0)) throw InputError("edge utilities must be positive");
    if (!edges_.empty() && edges_.back() == e)
      throw InputError("duplicate edge (" + std::to_string(e.agent) + ", " +
                       std::to_string(e.good) + ")");
    utility_[static_cast<Eigen::Index>(edges_.size())] = u;
    edges_.push_back(e);
  }

  agent_ptr_.assign(n + 1, 0);
  for (const Edge& e : edges_) ++agent_ptr_[e.agent + 1];
  for (int i = 0; i < n; ++i) agent_ptr_[i + 1] += agent_ptr_[i];
  for (int i = 0; i < n; ++i)
    if (agent_ptr_[i + 1] == agent_ptr_[i]) throw NoDesiredGood(i);

  good_edges_.assign(n, {});
  for (std::size_t k = 0; k < edges_.size(); ++k)
    good_edges_[edges_[k].good].push_back(static_cast<int>(k));
}

BijectiveMarket BijectiveMarket::from_dense(const Eigen::MatrixXd& utilities,
                                            std::optional<OriginMap> origin) {
  if (utilities.rows() != utilities.cols())
    throw ShapeMismatch("bijective utility matrix must be square");
  std::vector<Edge> edges;
  std::vector<double> values;
  for (int i = 0; i < utilities.rows(); ++i)
    for (int j = 0; j < utilities.cols(); ++j) {
      if (utilities(i, j) < 0.0) throw NegativeValue("utilities", i, j);
      if (utilities(i, j) > 0.0) {
        edges.push_back({i, j});
        values.push_back(utilities(i, j));
      }
    }
  return BijectiveMarket(static_cast<int>(utilities.rows()), std::move(edges),
                         Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                           static_cast<Eigen::Index>(values.size())),
                         std::move(origin));
}

Eigen::MatrixXd BijectiveMarket::dense_utilities() const {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n_, n_);
  for (Eigen::Index k = 0; k < num_edges(); ++k) u(edges_[k].agent, edges_[k].good) = utility_[k];
  return u;
}

MarketInstance validate_instance(MarketInstance m) {
  if (m.utilities.rows() != m.endowments.rows() || m.utilities.cols() != m.endowments.cols())
    throw ShapeMismatch("utilities and endowments must have the same shape");
  if (m.num_agents() == 0 || m.num_goods() == 0)
    throw InputError("market must have at least one agent and one good");

  for (int i = 0; i < m.num_agents(); ++i)
    for (int j = 0; j < m.num_goods(); ++j) {
      if (!(m.utilities(i, j) >= 0.0)) throw NegativeValue("utilities", i, j);
      if (!(m.endowments(i, j) >= 0.0)) throw NegativeValue("endowments", i, j);
    }
  for (int i = 0; i < m.num_agents(); ++i) {
    if (!(m.endowments.row(i).maxCoeff() > 0.0)) throw EmptyEndowment(i);
    if (!(m.utilities.row(i).maxCoeff() > 0.0)) throw NoDesiredGood(i);
  }

  const Eigen::RowVectorXd supply = m.endowments.colwise().sum();
  for (int j = 0; j < m.num_goods(); ++j)
    if (supply[j] > 0.0) m.endowments.col(j) /= supply[j];
  return m;
}

BijectiveMarket reduce_to_bijective(const MarketInstance& m) {
  OriginMap origin{m.num_agents(), m.num_goods(), {}};
  for (int a = 0; a < m.num_agents(); ++a)
    for (int g = 0; g < m.num_goods(); ++g)
      if (m.endowments(a, g) > 0.0) origin.copies.push_back({a, g, m.endowments(a, g)});

  const int n = static_cast<int>(origin.copies.size());
  std::vector<Edge> edges;
  std::vector<double> values;
  for (int k = 0; k < n; ++k) {
    const int agent = origin.copies[k].agent;
    bool any = false;
    for (int l = 0; l < n; ++l) {
      const double u = m.utilities(agent, origin.copies[l].good) * origin.copies[l].amount;
      if (u > 0.0) {
        edges.push_back({k, l});
        values.push_back(u);
        any = true;
      }
    }
    if (!any) throw NoDesiredGood(agent);
  }
  return BijectiveMarket(
      n, std::move(edges),
      Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())),
      std::move(origin));
}

ConditionStarReport check_condition_star(const BijectiveMarket& market) {
  std::vector<std::vector<int>> adjacency(market.size());
  std::vector<char> self_loop(market.size(), 0);
  for (const Edge& e : market.edges()) {
    adjacency[e.agent].push_back(e.good);
    if (e.agent == e.good) self_loop[e.agent] = 1;
  }

  ConditionStarReport report;
  report.components = strongly_connected_components(adjacency);
  for (const auto& comp : report.components)
    if (comp.size() == 1 && !self_loop[comp.front()])
      report.violating_components.push_back(comp.front());
  report.satisfied = report.violating_components.empty();
  return report;
}

ExchangeSolution lift_solution(const BijectiveMarket& market, const BijectiveSolution& sol) {
  if (!market.origin()) throw MissingOriginMap();
  if (sol.prices.size() != market.size() || sol.allocation.size() != market.num_edges())
    throw ShapeMismatch("solution does not match the market");
  const OriginMap& origin = *market.origin();

  ExchangeSolution out;
  out.prices = Eigen::VectorXd::Zero(origin.num_goods);
  out.allocation = Eigen::MatrixXd::Zero(origin.num_agents, origin.num_goods);
  out.income = Eigen::VectorXd::Zero(origin.num_agents);
  out.spending = Eigen::VectorXd::Zero(origin.num_agents);

  // Copies of one good have amounts summing to one, so the copies' prices
  // add up to the unit price.
  for (int l = 0; l < market.size(); ++l) {
    out.prices[origin.copies[l].good] += sol.prices[l];
    out.income[origin.copies[l].agent] += sol.prices[l];
  }
  const auto edges = market.edges();
  for (Eigen::Index k = 0; k < market.num_edges(); ++k) {
    const Origin& buyer = origin.copies[edges[k].agent];
    const Origin& seller = origin.copies[edges[k].good];
    out.allocation(buyer.agent, seller.good) += sol.allocation[k] * seller.amount;
    out.spending[buyer.agent] += sol.allocation[k] * sol.prices[edges[k].good];
  }
  return out;
}

}  // namespace adeq
