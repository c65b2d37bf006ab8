#include <algorithm>
#include <optional>

#include "doctest.h"

#include "adeq/errors.hpp"
#include "adeq/market.hpp"
#include "adeq/scc.hpp"
#include "support.hpp"

using namespace adeq;
using adeq::testing::dense;

namespace {

// Condition (*) by transitive closure: a node violates it when no cycle
// passes through it, i.e. it cannot reach itself.
std::vector<int> closure_violations(const Eigen::MatrixX<bool>& adj) {
  const Eigen::Index n = adj.rows();
  Eigen::MatrixX<bool> reach = adj;
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      if (reach(i, k))
        for (Eigen::Index j = 0; j < n; ++j) reach(i, j) = reach(i, j) || reach(k, j);
  std::vector<int> bad;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!reach(i, i)) bad.push_back(static_cast<int>(i));
  return bad;
}

std::vector<std::vector<int>> closure_components(const Eigen::MatrixX<bool>& adj) {
  const Eigen::Index n = adj.rows();
  Eigen::MatrixX<bool> reach = adj;
  for (Eigen::Index i = 0; i < n; ++i) reach(i, i) = true;
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      if (reach(i, k))
        for (Eigen::Index j = 0; j < n; ++j) reach(i, j) = reach(i, j) || reach(k, j);
  std::vector<std::vector<int>> comps;
  std::vector<bool> done(n, false);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (done[i]) continue;
    std::vector<int> c;
    for (Eigen::Index j = i; j < n; ++j)
      if (reach(i, j) && reach(j, i)) {
        c.push_back(static_cast<int>(j));
        done[j] = true;
      }
    comps.push_back(c);
  }
  return comps;
}

std::vector<std::vector<int>> adjacency_lists(const Eigen::MatrixX<bool>& adj) {
  std::vector<std::vector<int>> out(adj.rows());
  for (Eigen::Index i = 0; i < adj.rows(); ++i)
    for (Eigen::Index j = 0; j < adj.cols(); ++j)
      if (adj(i, j)) out[i].push_back(static_cast<int>(j));
  return out;
}

}  // namespace

TEST_CASE("validate_instance accepts a bijective swap market unchanged") {
  const MarketInstance in{dense({{0, 1}, {1, 0}}), Eigen::MatrixXd::Identity(2, 2)};
  const MarketInstance out = validate_instance(in);
  CHECK(out.utilities == in.utilities);
  CHECK(out.endowments == in.endowments);
}

TEST_CASE("validate_instance rejects an agent without endowment") {
  const MarketInstance in{dense({{0, 1}, {1, 0}}), dense({{1, 1}, {0, 0}})};
  try {
    validate_instance(in);
    FAIL("expected EmptyEndowment");
  } catch (const EmptyEndowment& e) {
    CHECK(e.agent() == 1);
  }
}

TEST_CASE("validate_instance normalizes endowment columns") {
  const MarketInstance in{dense({{0, 1}, {1, 0}}), dense({{1.5, 0}, {0.5, 1}})};
  const MarketInstance out = validate_instance(in);
  CHECK(out.endowments.colwise().sum().isApprox(Eigen::RowVector2d(1, 1)));
  CHECK(out.endowments(0, 0) == doctest::Approx(0.75));
  CHECK(out.endowments(1, 0) == doctest::Approx(0.25));
}

TEST_CASE("validate_instance rejects negative entries and empty utility rows") {
  CHECK_THROWS_AS(validate_instance({dense({{0, -1}, {1, 0}}), Eigen::MatrixXd::Identity(2, 2)}),
                  NegativeValue);
  CHECK_THROWS_AS(validate_instance({dense({{0, 1}, {1, 0}}), dense({{1, 0}, {-1, 1}})}),
                  NegativeValue);
  try {
    validate_instance({dense({{0, 1}, {0, 0}}), Eigen::MatrixXd::Identity(2, 2)});
    FAIL("expected NoDesiredGood");
  } catch (const NoDesiredGood& e) {
    CHECK(e.agent() == 1);
  }
}

TEST_CASE("BijectiveMarket rejects malformed edge sets") {
  CHECK_THROWS_AS(BijectiveMarket(2, {{0, 1}}, Eigen::VectorXd::Ones(1)), NoDesiredGood);
  CHECK_THROWS_AS(BijectiveMarket(2, {{0, 2}, {1, 0}}, Eigen::VectorXd::Ones(2)), InputError);
  CHECK_THROWS_AS(BijectiveMarket(2, {{0, 1}, {0, 1}, {1, 0}}, Eigen::VectorXd::Ones(3)),
                  InputError);
  CHECK_THROWS_AS(BijectiveMarket(2, {{0, 1}, {1, 0}}, Eigen::Vector2d(1, 0)), InputError);
}

TEST_CASE("BijectiveMarket sorts edges and indexes columns") {
  const BijectiveMarket m(3, {{2, 0}, {0, 1}, {1, 0}, {0, 2}}, Eigen::Vector4d(4, 1, 3, 2));
  const std::vector<Edge> expected{{0, 1}, {0, 2}, {1, 0}, {2, 0}};
  CHECK(std::equal(m.edges().begin(), m.edges().end(), expected.begin(), expected.end()));
  CHECK(m.utility() == Eigen::Vector4d(1, 2, 3, 4));
  CHECK(m.out_degree(0) == 2);
  CHECK(std::vector<int>(m.edges_into(0).begin(), m.edges_into(0).end()) ==
        std::vector<int>{2, 3});
  CHECK(m.dense_utilities() == dense({{0, 1, 2}, {3, 0, 0}, {4, 0, 0}}));
}

TEST_CASE("reduce_to_bijective splits an agent with two goods") {
  const MarketInstance in{dense({{0, 0, 1}, {1, 2, 0}}), dense({{1, 1, 0}, {0, 0, 1}})};
  const BijectiveMarket m = reduce_to_bijective(validate_instance(in));
  REQUIRE(m.size() == 3);
  REQUIRE(m.origin());
  const auto& copies = m.origin()->copies;
  CHECK(copies[0].agent == 0);
  CHECK(copies[1].agent == 0);
  CHECK(copies[2].agent == 1);
  // Both copies of agent 0 want only good 2, held by copy 2.
  CHECK(m.dense_utilities() == dense({{0, 0, 1}, {0, 0, 1}, {1, 2, 0}}));
}

TEST_CASE("reduce_to_bijective keeps identity instances") {
  const Eigen::MatrixXd u = dense({{0, 2, 1}, {1, 0, 0}, {0, 3, 1}});
  const BijectiveMarket m =
      reduce_to_bijective(validate_instance({u, Eigen::MatrixXd::Identity(3, 3)}));
  CHECK(m.size() == 3);
  CHECK(m.dense_utilities() == u);
  for (int k = 0; k < 3; ++k) {
    CHECK(m.origin()->copies[k].agent == k);
    CHECK(m.origin()->copies[k].good == k);
  }
}

TEST_CASE("reduce_to_bijective on one agent owning one good") {
  const BijectiveMarket m = reduce_to_bijective(validate_instance({dense({{2}}), dense({{5}})}));
  CHECK(m.size() == 1);
  CHECK(m.utility()[0] == 2.0);
}

TEST_CASE("reduction size and edges match the source instance") {
  testing::Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int agents = testing::uniform_int(rng, 1, 4), goods = testing::uniform_int(rng, 1, 4);
    Eigen::MatrixXd u(agents, goods), w(agents, goods);
    for (int i = 0; i < agents; ++i) {
      do {
        for (int j = 0; j < goods; ++j)
          u(i, j) = testing::uniform(rng, 0, 1) < 0.5 ? testing::uniform(rng, 0.5, 2) : 0.0;
      } while (u.row(i).maxCoeff() <= 0.0);
      do {
        for (int j = 0; j < goods; ++j)
          w(i, j) = testing::uniform(rng, 0, 1) < 0.5 ? testing::uniform(rng, 0.1, 1) : 0.0;
      } while (w.row(i).maxCoeff() <= 0.0);
    }
    const MarketInstance v = validate_instance({u, w});
    std::optional<BijectiveMarket> m;
    try {
      m.emplace(reduce_to_bijective(v));
    } catch (const NoDesiredGood&) {
      continue;  // every desired good happens to be unendowed
    }
    CHECK(m->size() == (v.endowments.array() > 0).count());
    const auto& copies = m->origin()->copies;
    for (const Edge& e : m->edges())
      CHECK(u(copies[e.agent].agent, copies[e.good].good) > 0.0);
  }
}

TEST_CASE("check_condition_star examples") {
  const auto swap = check_condition_star(BijectiveMarket::from_dense(dense({{0, 1}, {1, 0}})));
  CHECK(swap.satisfied);
  CHECK(swap.components.size() == 1);
  CHECK(swap.violating_components.empty());

  const BijectiveMarket lone(1, {{0, 0}}, Eigen::VectorXd::Ones(1));
  CHECK(check_condition_star(lone).satisfied);
}

TEST_CASE("check_condition_star flags a loopless singleton") {
  // A single agent without a self-loop has no edge at all, so it cannot be a
  // valid market; the smallest case is a tail hanging off a 2-cycle.
  const auto report =
      check_condition_star(BijectiveMarket::from_dense(dense({{0, 1, 0}, {1, 0, 0}, {1, 0, 0}})));
  CHECK_FALSE(report.satisfied);
  CHECK(report.violating_components == std::vector<int>{2});
}

TEST_CASE("strongly connected components are deterministic and ordered") {
  const std::vector<std::vector<int>> adj{{1}, {2}, {0}, {4}, {3}, {5}, {}};
  const auto comps = strongly_connected_components(adj);
  CHECK(comps == std::vector<std::vector<int>>{{0, 1, 2}, {3, 4}, {5}, {6}});
}

TEST_CASE("strongly connected components match transitive closure on random digraphs") {
  testing::Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = testing::uniform_int(rng, 1, 6);
    Eigen::MatrixX<bool> adj(n, n);
    const double density = testing::uniform(rng, 0.1, 0.6);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) adj(i, j) = testing::uniform(rng, 0, 1) < density;
    CHECK(strongly_connected_components(adjacency_lists(adj)) == closure_components(adj));
  }
}

TEST_CASE("check_condition_star matches transitive closure exhaustively for n <= 3") {
  for (int n = 1; n <= 3; ++n) {
    for (unsigned mask = 0; mask < (1u << (n * n)); ++mask) {
      Eigen::MatrixX<bool> adj(n, n);
      Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
      for (int c = 0; c < n * n; ++c) {
        adj(c / n, c % n) = (mask >> c) & 1u;
        u(c / n, c % n) = adj(c / n, c % n) ? 1.0 : 0.0;
      }
      bool valid = true;
      for (int i = 0; i < n; ++i) valid = valid && adj.row(i).any();
      if (!valid) continue;
      const auto report = check_condition_star(BijectiveMarket::from_dense(u));
      const auto expected = closure_violations(adj);
      CHECK(report.violating_components == expected);
      CHECK(report.satisfied == expected.empty());
    }
  }
}

TEST_CASE("lift_solution requires an origin map") {
  const BijectiveMarket m = BijectiveMarket::from_dense(dense({{0, 1}, {1, 0}}));
  CHECK_THROWS_AS(lift_solution(m, {Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1)}),
                  MissingOriginMap);
}

TEST_CASE("lift_solution with an identity origin map returns the same solution") {
  const BijectiveMarket m = reduce_to_bijective(
      validate_instance({dense({{0, 2}, {1, 0}}), Eigen::MatrixXd::Identity(2, 2)}));
  const ExchangeSolution out = lift_solution(m, {Eigen::Vector2d(1.5, 2.5), Eigen::Vector2d(1, 1)});
  CHECK(out.prices == Eigen::Vector2d(1.5, 2.5));
  CHECK(out.allocation == dense({{0, 1}, {1, 0}}));
  CHECK(out.income == Eigen::Vector2d(1.5, 2.5));
  CHECK(out.spending == Eigen::Vector2d(2.5, 1.5));
}

TEST_CASE("lift_solution sums the copies of an agent") {
  // Agent 0 owns goods 0 and 1 in full, agent 1 owns good 2.
  const BijectiveMarket m = reduce_to_bijective(
      validate_instance({dense({{0, 0, 1}, {1, 1, 0}}), dense({{1, 1, 0}, {0, 0, 1}})}));
  // Copies 0 and 1 are priced 1 and 2 and both buy good 2.
  const Eigen::Vector3d p(1, 2, 3);
  Eigen::VectorXd x(m.num_edges());
  for (Eigen::Index k = 0; k < m.num_edges(); ++k) {
    const Edge e = m.edges()[k];
    x[k] = e.good == 2 ? (e.agent == 0 ? 1.0 / 3 : 2.0 / 3) : 1.0;
  }
  const ExchangeSolution out = lift_solution(m, {p, x});
  CHECK(out.income[0] == doctest::Approx(3.0));
  CHECK(out.allocation(0, 2) == doctest::Approx(1.0));

  // Utility is additive across copies.
  const Eigen::MatrixXd u = dense({{0, 0, 1}, {1, 1, 0}});
  double copy_utility = 0.0;
  const auto& copies = m.origin()->copies;
  for (Eigen::Index k = 0; k < m.num_edges(); ++k) {
    const Edge e = m.edges()[k];
    if (copies[e.agent].agent == 0) copy_utility += m.utility()[k] * x[k];
  }
  CHECK(copy_utility == doctest::Approx(u.row(0).dot(out.allocation.row(0))));
}

TEST_CASE("lift_solution preserves total income and spending") {
  testing::Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int agents = testing::uniform_int(rng, 1, 4), goods = testing::uniform_int(rng, 1, 4);
    Eigen::MatrixXd u = Eigen::MatrixXd::Constant(agents, goods, 1.0), w(agents, goods);
    for (int i = 0; i < agents; ++i) {
      do {
        for (int j = 0; j < goods; ++j)
          w(i, j) = testing::uniform(rng, 0, 1) < 0.5 ? testing::uniform(rng, 0.1, 1) : 0.0;
      } while (w.row(i).maxCoeff() <= 0.0);
    }
    const BijectiveMarket m = reduce_to_bijective(validate_instance({u, w}));
    Eigen::VectorXd b(m.num_edges());
    for (Eigen::Index k = 0; k < b.size(); ++k) b[k] = testing::uniform(rng, 0.1, 1.0);
    const Eigen::VectorXd p = prices(m, b);
    Eigen::VectorXd x(m.num_edges());
    for (Eigen::Index k = 0; k < b.size(); ++k) x[k] = b[k] / p[m.edges()[k].good];
    const ExchangeSolution out = lift_solution(m, {p, x});
    CHECK(std::abs(out.income.sum() - p.sum()) <= 1e-12 * p.sum());
    CHECK(std::abs(out.spending.sum() - b.sum()) <= 1e-12 * b.sum());
  }
}
