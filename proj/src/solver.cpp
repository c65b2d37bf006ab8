#include "adeq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "adeq/errors.hpp"

namespace adeq {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::ObjectiveReached: return "objective_reached";
    case Termination::Stalled: return "stalled";
    case Termination::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

std::string to_string(EtaPolicy p) {
  switch (p) {
    case EtaPolicy::PaperBound: return "paper_bound";
    case EtaPolicy::Smoothness: return "smoothness";
    case EtaPolicy::Fixed: return "fixed";
  }
  return "unknown";
}

std::optional<EtaPolicy> parse_eta_policy(const std::string& s) {
  if (s == "paper_bound") return EtaPolicy::PaperBound;
  if (s == "smoothness") return EtaPolicy::Smoothness;
  if (s == "fixed") return EtaPolicy::Fixed;
  return std::nullopt;
}

double paper_eta_bound(const ProgramConstants& c) {
  return c.lambda * c.diameter * c.diameter / (c.gamma * c.gamma);
}

double eta_from_policy(const ProgramConstants& c, const SolverConfig& config) {
  double eta = 0.0;
  switch (config.eta_policy) {
    case EtaPolicy::PaperBound: eta = paper_eta_bound(c); break;
    case EtaPolicy::Smoothness: eta = std::min(paper_eta_bound(c), 1.0 / (2.0 * c.lambda)); break;
    case EtaPolicy::Fixed: eta = config.eta; break;
  }
  if (!(eta > 0.0)) throw NonPositiveEta();
  return eta;
}

double row_cap_for(const BijectiveMarket& m, const SolverConfig& config) {
  return config.row_cap.value_or(default_row_cap(m));
}

SpendState initialize(const BijectiveMarket& m, const SolverConfig& config) {
  if (!check_condition_star(m).satisfied) throw ConditionStarViolated();

  const auto edges = m.edges();
  double scale = 1.0;
  for (int j = 0; j < m.size(); ++j) {
    double inflow = 0.0;
    for (int k : m.edges_into(j)) inflow += 1.0 / m.out_degree(edges[k].agent);
    if (inflow > 0.0) scale = std::max(scale, 1.0 / inflow);
  }

  SpendState s;
  s.b.resize(m.num_edges());
  for (Eigen::Index k = 0; k < m.num_edges(); ++k) s.b[k] = scale / m.out_degree(edges[k].agent);
  if (config.seed != 0) {
    // Factors >= 1 keep every row and column sum at least one.
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> factor(1.0, 3.0);
    for (Eigen::Index k = 0; k < m.num_edges(); ++k) s.b[k] *= factor(rng);
  }
  const FeasibleSetSpec spec = FeasibleSetSpec::unit(m, row_cap_for(m, config), config.balanced);
  s.b = Projector(m).project(s.b, spec, config.projection);
  s.beta = best_beta(m, prices(m, s.b));
  return s;
}

FeasibleSetSpec step_set(const BijectiveMarket& m, const SpendState& state, double row_cap,
                         const SolverConfig& config) {
  return FeasibleSetSpec::from_beta(m, state.beta, row_cap, config.balanced);
}

Eigen::VectorXd step_gradient(const BijectiveMarket& m, const Projector& projector,
                              const SpendState& state, double eta, const SolverConfig& config) {
  const FeasibleSetSpec spec = step_set(m, state, row_cap_for(m, config), config);
  return projector.project(state.b - eta * gradient(m, state.b, state.beta), spec,
                           config.projection);
}

namespace {

bool near_cap(const BijectiveMarket& m, const Eigen::VectorXd& b, double cap, double tol) {
  return row_sums(m, b).maxCoeff() >= cap - std::max(10.0 * tol, 1e-9 * cap);
}

}  // namespace

SolveResult solve(const BijectiveMarket& m, const SolverConfig& config) {
  const double cap = row_cap_for(m, config);
  SolveResult result;
  IterationTrace& trace = result.trace;
  trace.constants = estimate_constants(m, cap);
  trace.policy = config.eta_policy;
  trace.eta = eta_from_policy(trace.constants, config);
  const ProgramConstants& c = trace.constants;
  trace.audit_threshold = c.diameter * c.gamma * std::sqrt(6.0 * c.lambda * trace.eta);
  trace.audit_decrease = 1.5 * c.lambda * trace.eta * trace.eta * c.gamma * c.gamma;
  if (config.eta_policy == EtaPolicy::Fixed && trace.eta > paper_eta_bound(c))
    result.warnings.push_back("fixed step size exceeds lambda d^2 / gamma^2");

  const Projector projector(m);
  SpendState state = initialize(m, config);
  double phi = objective(m, state.b, state.beta);
  trace.initial_objective = phi;

  result.termination = Termination::MaxIterations;
  int stalled_for = 0;
  if (phi <= config.objective_tol) result.termination = Termination::ObjectiveReached;

  for (int t = 0; t < config.max_iters && phi > config.objective_tol; ++t) {
    IterationRecord rec;
    rec.iter = t;
    rec.obj_pre = phi;

    const Eigen::VectorXd g = gradient(m, state.b, state.beta);
    const FeasibleSetSpec spec = step_set(m, state, cap, config);
    Eigen::VectorXd next = projector.project(state.b - trace.eta * g, spec, config.projection);
    rec.projection_cycles = projector.last_cycles();
    rec.obj_post_grad = objective(m, next, state.beta);
    rec.max_residual =
        constraint_residuals(m, next, spec.floors, cap, config.balanced).max();

    const Eigen::VectorXd step = next - state.b;
    rec.grad_norm = g.norm();
    rec.step_norm = step.norm();
    rec.grad_dot_step = g.dot(step);

    state.b = std::move(next);
    state.beta = step_beta(m, state.b);
    rec.obj_post_beta = objective(m, state.b, state.beta);
    rec.cap_binding = near_cap(m, state.b, cap, config.projection.tol);

    if (config.eta_policy == EtaPolicy::PaperBound) {
      if (rec.obj_pre < trace.audit_threshold)
        rec.audit = AuditStatus::Inactive;
      else
        rec.audit = rec.obj_pre - rec.obj_post_grad >= trace.audit_decrease * (1.0 - 1e-6)
                        ? AuditStatus::Pass
                        : AuditStatus::Fail;
    }

    const double relative =
        (phi - rec.obj_post_beta) / std::max(std::abs(phi), std::numeric_limits<double>::min());
    phi = rec.obj_post_beta;
    trace.records.push_back(rec);

    if (phi <= config.objective_tol) {
      result.termination = Termination::ObjectiveReached;
      break;
    }
    stalled_for = relative < config.stall_tol ? stalled_for + 1 : 0;
    if (stalled_for >= config.stall_window) {
      result.termination = Termination::Stalled;
      break;
    }
  }

  result.cap_binding = near_cap(m, state.b, cap, config.projection.tol);
  if (result.cap_binding) result.warnings.push_back("row sum at the cap; raise --bmax");
  result.certificate = certify(state, m, config.certificate_eps);
  result.certificate.cap_binding = result.cap_binding;
  result.state = std::move(state);
  return result;
}

}  // namespace adeq
