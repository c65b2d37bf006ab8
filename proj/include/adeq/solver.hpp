#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adeq/market.hpp"
#include "adeq/program.hpp"
#include "adeq/projection.hpp"
#include "adeq/verification.hpp"

namespace adeq {

enum class EtaPolicy { PaperBound, Smoothness, Fixed };

struct SolverConfig {
  double eta = 0.1;  ///< used by EtaPolicy::Fixed
  EtaPolicy eta_policy = EtaPolicy::Smoothness;
  int max_iters = 50'000;
  double objective_tol = 1e-8;
  double stall_tol = 1e-12;  ///< relative decrease counted as no progress
  int stall_window = 50;
  std::optional<double> row_cap;  ///< default_row_cap() when unset
  ProjectionOptions projection;
  bool balanced = true;
  double certificate_eps = 1e-4;
  std::uint64_t seed = 0;  ///< nonzero: scale the start by random factors in [1, 3]
};

/// The sufficient-decrease audit only runs under EtaPolicy::PaperBound.
enum class AuditStatus { NotApplicable, Inactive, Pass, Fail };

struct IterationRecord {
  int iter = 0;
  double obj_pre = 0.0;        ///< Phi(b_t, beta_t)
  double obj_post_grad = 0.0;  ///< Phi(b_{t+1}, beta_t)
  double obj_post_beta = 0.0;  ///< Phi(b_{t+1}, beta_{t+1})
  double grad_norm = 0.0;
  double step_norm = 0.0;
  double grad_dot_step = 0.0;  ///< <grad, b_{t+1} - b_t>
  double max_residual = 0.0;
  int projection_cycles = 0;
  bool cap_binding = false;
  AuditStatus audit = AuditStatus::NotApplicable;
};

struct IterationTrace {
  ProgramConstants constants;
  double eta = 0.0;
  EtaPolicy policy = EtaPolicy::Smoothness;
  double audit_threshold = 0.0;  ///< d gamma sqrt(6 lambda eta)
  double audit_decrease = 0.0;   ///< 3/2 lambda eta^2 gamma^2
  double initial_objective = 0.0;
  std::vector<IterationRecord> records;
};

enum class Termination { ObjectiveReached, Stalled, MaxIterations };

std::string to_string(Termination t);
std::string to_string(EtaPolicy p);
std::optional<EtaPolicy> parse_eta_policy(const std::string& s);

struct SolveResult {
  SpendState state;
  EquilibriumCertificate certificate;
  IterationTrace trace;
  Termination termination = Termination::MaxIterations;
  bool cap_binding = false;
  std::vector<std::string> warnings;
};

/// lambda d^2 / gamma^2.
double paper_eta_bound(const ProgramConstants& c);

/// Step size for the configured policy. Throws NonPositiveEta.
double eta_from_policy(const ProgramConstants& c, const SolverConfig& config);

double row_cap_for(const BijectiveMarket& m, const SolverConfig& config);

/// Start: b_ij = c / deg(i) with c large enough that every column sum is at
/// least one, perturbed when config.seed is nonzero, projected onto the set
/// with unit column floors (balanced or not, per config), then
/// beta = best_beta(p).
/// Throws ConditionStarViolated.
SpendState initialize(const BijectiveMarket& m, const SolverConfig& config);

/// The set the gradient step from `state` projects onto.
FeasibleSetSpec step_set(const BijectiveMarket& m, const SpendState& state, double row_cap,
                         const SolverConfig& config);

/// b_{t+1} = Proj_{S(beta_t)}(b_t - eta grad). beta is left unchanged.
Eigen::VectorXd step_gradient(const BijectiveMarket& m, const Projector& projector,
                              const SpendState& state, double eta, const SolverConfig& config);

/// beta_{t+1} = best_beta(p(b_{t+1})).
inline Eigen::VectorXd step_beta(const BijectiveMarket& m, const Eigen::VectorXd& b) {
  return best_beta(m, prices(m, b));
}

/// Alternates step_gradient and step_beta until Phi <= objective_tol, the
/// relative decrease stays below stall_tol for stall_window iterations, or
/// max_iters is reached.
SolveResult solve(const BijectiveMarket& m, const SolverConfig& config = {});

}  // namespace adeq
