#pragma once

#include <optional>

#include <Eigen/Dense>

#include "adeq/market.hpp"
#include "adeq/program.hpp"

namespace adeq {

/// The polyhedron b is projected onto:
///   b >= 0,  1 <= r_i <= row_cap,  p_j >= floors_j,  and r = p if balanced.
struct FeasibleSetSpec {
  Eigen::VectorXd floors;
  double row_cap = 0.0;
  bool balanced = true;

  /// Floors from beta via column_floors(). Throws EmptyFeasibleSet when the
  /// cap cannot accommodate some floor.
  static FeasibleSetSpec from_beta(const BijectiveMarket& m, const Eigen::VectorXd& beta,
                                   double row_cap, bool balanced);
  /// Unit floors on every good with an incoming edge.
  static FeasibleSetSpec unit(const BijectiveMarket& m, double row_cap, bool balanced);
};

struct ProjectionOptions {
  double tol = 1e-12;
  int max_cycles = 100'000;
  /// Cycles between attempts at an exact active-set solve while Dykstra has
  /// not converged.
  int polish_every = 500;
};

enum class Sense { LessEqual, GreaterEqual };

/// Projection onto {x : <a, x> (sense) rhs}. Throws ZeroNormal.
Eigen::VectorXd project_halfspace(const Eigen::VectorXd& x, const Eigen::VectorXd& a, double rhs,
                                  Sense sense);

/// Euclidean projection onto a FeasibleSetSpec by Dykstra's algorithm.
///
/// The cycle visits four sets whose projections are closed form: the balance
/// subspace, the row slabs, the orthant and the column halfspaces, so the
/// column floors hold exactly on return. Near-degenerate intersections can
/// leave Dykstra moving by less than an ulp per cycle; every
/// ProjectionOptions::polish_every cycles without convergence it hands the
/// problem to active_set_projection(). Holds a
/// factorization of the balance operator, so build one per market and reuse.
class Projector {
 public:
  explicit Projector(const BijectiveMarket& m);

  /// Throws NoConvergence after opts.max_cycles cycles.
  Eigen::VectorXd project(const Eigen::VectorXd& raw, const FeasibleSetSpec& spec,
                          const ProjectionOptions& opts = {}) const;

  /// Cycles used by the most recent project() call.
  int last_cycles() const { return last_cycles_; }

  /// Nearest point with r = p.
  Eigen::VectorXd project_balance(const Eigen::VectorXd& x) const;

 private:
  void project_rows(Eigen::VectorXd& x, double row_cap) const;
  void project_columns(Eigen::VectorXd& x, const Eigen::VectorXd& floors) const;

  const BijectiveMarket& market_;
  Eigen::MatrixXd balance_;  // n x |E|, row k = [agent == k] - [good == k]
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> gram_;
  mutable int last_cycles_ = 0;
};

/// Exact projection by the dual active-set method of Goldfarb and Idnani,
/// to within tol on every inequality. Returns nothing when the set is empty
/// or the method fails to finish. Dense, so meant for small edge sets.
std::optional<Eigen::VectorXd> active_set_projection(const BijectiveMarket& m,
                                                     const Eigen::VectorXd& raw,
                                                     const FeasibleSetSpec& spec, double tol);

inline Eigen::VectorXd project(const BijectiveMarket& m, const Eigen::VectorXd& raw,
                               const FeasibleSetSpec& spec, const ProjectionOptions& opts = {}) {
  return Projector(m).project(raw, spec, opts);
}

/// Exact projection by enumerating linearly independent active sets and
/// checking the KKT conditions of each candidate. Exponential; for test
/// instances only. Throws TooLarge when |E| > 16, EmptyFeasibleSet when no
/// active set qualifies.
Eigen::VectorXd exact_projection_oracle(const BijectiveMarket& m, const Eigen::VectorXd& raw,
                                        const FeasibleSetSpec& spec);

}  // namespace adeq
