#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace adeq {

/// A linear Arrow-Debreu exchange market. Row i of both matrices belongs to
/// agent i; column j to good j.
struct MarketInstance {
  Eigen::MatrixXd utilities;
  Eigen::MatrixXd endowments;

  int num_agents() const { return static_cast<int>(utilities.rows()); }
  int num_goods() const { return static_cast<int>(utilities.cols()); }
};

struct Edge {
  int agent;
  int good;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// One bijective agent: `amount` units of `good`, owned by original `agent`.
struct Origin {
  int agent;
  int good;
  double amount;
};

struct OriginMap {
  int num_agents = 0;
  int num_goods = 0;
  std::vector<Origin> copies;
};

/// Exchange market in which agent k owns exactly one unit of good k.
///
/// Only pairs with positive utility are stored. Edges are kept sorted by
/// (agent, good), so each agent's edges form a contiguous range; every vector
/// "over E" in this library is indexed in that order.
class BijectiveMarket {
 public:
  /// Throws NoDesiredGood for an agent without edges, InputError for
  /// out-of-range, duplicate or non-positive entries.
  BijectiveMarket(int n, std::vector<Edge> edges, const Eigen::VectorXd& utility,
                  std::optional<OriginMap> origin = std::nullopt);

  /// Builds the edge set from the positive entries of a square matrix.
  static BijectiveMarket from_dense(const Eigen::MatrixXd& utilities,
                                    std::optional<OriginMap> origin = std::nullopt);

  int size() const { return n_; }
  Eigen::Index num_edges() const { return static_cast<Eigen::Index>(edges_.size()); }
  std::span<const Edge> edges() const { return edges_; }
  const Eigen::VectorXd& utility() const { return utility_; }

  /// Edge indices [first, last) of agent i.
  Eigen::Index agent_begin(int i) const { return agent_ptr_[i]; }
  Eigen::Index agent_end(int i) const { return agent_ptr_[i + 1]; }
  int out_degree(int i) const { return static_cast<int>(agent_ptr_[i + 1] - agent_ptr_[i]); }

  /// Indices of the edges pointing at good j, ascending.
  std::span<const int> edges_into(int j) const { return good_edges_[j]; }

  const std::optional<OriginMap>& origin() const { return origin_; }

  Eigen::MatrixXd dense_utilities() const;

 private:
  int n_;
  std::vector<Edge> edges_;
  Eigen::VectorXd utility_;
  std::vector<Eigen::Index> agent_ptr_;
  std::vector<std::vector<int>> good_edges_;
  std::optional<OriginMap> origin_;
};

/// Returns `m` with every supplied good's endowment column rescaled to sum
/// to one. Throws NegativeValue, EmptyEndowment or NoDesiredGood.
MarketInstance validate_instance(MarketInstance m);

/// Splits every agent into one copy per positive endowment entry. Copy l of
/// good g holding w units is a new good; an agent's utility for it is u_ag * w
/// so that copies of the same good trade at the same unit price.
BijectiveMarket reduce_to_bijective(const MarketInstance& validated);

struct ConditionStarReport {
  bool satisfied = true;
  /// Nodes forming loop-free singleton components, ascending.
  std::vector<int> violating_components;
  /// All strongly connected components, ordered by smallest member.
  std::vector<std::vector<int>> components;
};

ConditionStarReport check_condition_star(const BijectiveMarket& market);

/// Prices and per-edge allocations of a bijective market.
struct BijectiveSolution {
  Eigen::VectorXd prices;
  Eigen::VectorXd allocation;
};

/// Solution expressed in the original agents and goods.
struct ExchangeSolution {
  Eigen::VectorXd prices;      ///< unit price per original good
  Eigen::MatrixXd allocation;  ///< units of good j held by agent i
  Eigen::VectorXd income;      ///< value of each agent's endowment
  Eigen::VectorXd spending;    ///< money each agent spends
};

/// Throws MissingOriginMap when `market` was not built by reduce_to_bijective.
ExchangeSolution lift_solution(const BijectiveMarket& market, const BijectiveSolution& sol);

}  // namespace adeq
