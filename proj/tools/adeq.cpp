#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "adeq/errors.hpp"
#include "adeq/fisher.hpp"
#include "adeq/io.hpp"
#include "adeq/market.hpp"
#include "adeq/solver.hpp"
#include "adeq/verification.hpp"

namespace {

enum Exit : int { kOk = 0, kInput = 1, kConditionStar = 2, kSolver = 3 };

struct Loaded {
  adeq::MarketInstance source;  // validated, in the original agents and goods
  adeq::BijectiveMarket market;
};

// A file carrying an origin map was written by `reduce`; rebuild its source
// instance so the lifted certificate can be checked against it.
adeq::MarketInstance source_of(const adeq::BijectiveMarket& m) {
  const adeq::OriginMap& origin = *m.origin();
  adeq::MarketInstance src{Eigen::MatrixXd::Zero(origin.num_agents, origin.num_goods),
                           Eigen::MatrixXd::Zero(origin.num_agents, origin.num_goods)};
  for (const adeq::Origin& o : origin.copies) src.endowments(o.agent, o.good) += o.amount;
  const auto edges = m.edges();
  for (Eigen::Index k = 0; k < m.num_edges(); ++k) {
    const adeq::Origin& buyer = origin.copies[edges[k].agent];
    const adeq::Origin& item = origin.copies[edges[k].good];
    src.utilities(buyer.agent, item.good) = m.utility()[k] / item.amount;
  }
  return src;
}

Loaded load(const std::string& path) {
  adeq::MarketFile file = adeq::read_market_file(path);
  if (file.origin) {
    if (!file.market.endowments.isIdentity(0.0))
      throw adeq::ParseError("a reduced instance must not carry endowments");
    adeq::BijectiveMarket m = adeq::BijectiveMarket::from_dense(file.market.utilities, file.origin);
    adeq::MarketInstance src = source_of(m);
    return {std::move(src), std::move(m)};
  }
  adeq::MarketInstance src = adeq::validate_instance(std::move(file.market));
  adeq::BijectiveMarket m = adeq::reduce_to_bijective(src);
  return {std::move(src), std::move(m)};
}

void write_json(const std::string& path, const adeq::json& doc) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw adeq::ParseError("cannot write " + path);
  out << doc.dump(2) << '\n';
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

int cmd_check(const std::string& path) {
  const Loaded in = load(path);
  const adeq::ConditionStarReport report = adeq::check_condition_star(in.market);
  std::cout << "agents=" << in.market.size() << " edges=" << in.market.num_edges()
            << " components=" << report.components.size()
            << " satisfied=" << (report.satisfied ? "true" : "false") << '\n';
  for (const auto& comp : report.components) std::cout << "component " << join(comp) << '\n';
  if (!report.satisfied) {
    std::cout << "violating " << join(report.violating_components) << '\n';
    return kConditionStar;
  }
  return kOk;
}

struct SolveFlags {
  adeq::SolverConfig config;
  std::string policy = "smoothness";
  bool policy_given = false;
  std::string mode = "balanced";
  std::optional<double> eta;
  std::optional<double> bmax;
  std::string trace_path, cert_path;
};

int cmd_solve(const std::string& path, SolveFlags flags) {
  const Loaded in = load(path);
  adeq::SolverConfig& config = flags.config;
  config.eta_policy = *adeq::parse_eta_policy(flags.policy);
  if (flags.eta) {
    config.eta = *flags.eta;
    if (!flags.policy_given) config.eta_policy = adeq::EtaPolicy::Fixed;
  }
  config.balanced = flags.mode == "balanced";
  config.row_cap = flags.bmax;

  const adeq::SolveResult result = adeq::solve(in.market, config);
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << '\n';

  adeq::json doc;
  doc["termination"] = adeq::to_string(result.termination);
  doc["iterations"] = result.trace.records.size();
  doc["eta"] = result.trace.eta;
  doc["eta_policy"] = adeq::to_string(result.trace.policy);
  doc["warnings"] = result.warnings;
  doc["bijective"] = adeq::to_json(result.certificate);
  bool passed = result.certificate.passed;

  const Eigen::VectorXd p = adeq::prices(in.market, result.state.b);
  if ((p.array() > 0.0).all()) {
    const adeq::BijectiveSolution sol{p, adeq::allocations(in.market, result.state.b, p)};
    const adeq::EquilibriumCertificate exchange =
        adeq::certify_exchange(adeq::lift_solution(in.market, sol), in.source,
                               result.certificate.objective_value, config.certificate_eps);
    doc["exchange"] = adeq::to_json(exchange);
    passed = passed && exchange.passed;
  } else {
    passed = false;
  }
  doc["passed"] = passed;

  if (!flags.cert_path.empty()) write_json(flags.cert_path, doc);
  if (!flags.trace_path.empty()) {
    std::ofstream out(flags.trace_path);
    if (!out) throw adeq::ParseError("cannot write " + flags.trace_path);
    adeq::write_trace_csv(out, result.trace);
  }
  std::cout << "iters=" << result.trace.records.size()
            << " obj=" << adeq::format_number(result.certificate.objective_value)
            << " passed=" << (passed ? "true" : "false") << '\n';
  return passed ? kOk : kSolver;
}

int cmd_fisher(const std::string& path, double tol, int max_iters, const std::string& out) {
  const adeq::FisherMarket m = adeq::read_fisher_file(path);
  adeq::validate_fisher(m);
  const adeq::FisherSolution sol = adeq::fisher_solve(m, tol, max_iters);
  std::cout << "iters=" << sol.iterations << " prices=";
  for (Eigen::Index j = 0; j < sol.prices.size(); ++j)
    std::cout << (j ? "," : "") << adeq::format_number(sol.prices[j]);
  std::cout << '\n';
  if (!out.empty()) write_json(out, adeq::to_json(sol));
  return kOk;
}

int cmd_reduce(const std::string& path, const std::string& out) {
  adeq::MarketFile file = adeq::read_market_file(path);
  if (file.origin) throw adeq::ParseError("instance is already reduced");
  const adeq::BijectiveMarket m =
      adeq::reduce_to_bijective(adeq::validate_instance(std::move(file.market)));
  write_json(out, adeq::to_json(m));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear exchange market equilibria by alternating projected gradient descent"};
  app.require_subcommand(1);

  std::string path;
  std::string out;

  auto* check = app.add_subcommand("check", "Report strongly connected components and condition (*)");
  check->add_option("instance", path, "Instance JSON")->required();

  SolveFlags flags;
  auto* solve = app.add_subcommand("solve", "Solve for an equilibrium and certify it");
  solve->add_option("instance", path, "Instance JSON")->required();
  solve->add_option("--max-iters", flags.config.max_iters, "Iteration limit")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  solve->add_option("--eta", flags.eta, "Step size; implies --eta-policy fixed unless one is given");
  auto* policy = solve->add_option("--eta-policy", flags.policy, "Step size rule")
                     ->capture_default_str()
                     ->check(CLI::IsMember({"paper_bound", "smoothness", "fixed"}));
  solve->add_option("--obj-tol", flags.config.objective_tol, "Stop once the objective is this small")
      ->capture_default_str();
  solve->add_option("--bmax", flags.bmax, "Row sum cap (default n^2 max(1, u_max/u_min))")
      ->check(CLI::PositiveNumber);
  solve->add_option("--mode", flags.mode, "Feasible set")
      ->capture_default_str()
      ->check(CLI::IsMember({"balanced", "relaxed"}));
  solve->add_option("--eps", flags.config.certificate_eps, "Certificate tolerance")
      ->capture_default_str();
  solve->add_option("--seed", flags.config.seed, "Nonzero: randomly perturbed start")
      ->capture_default_str();
  solve->add_option("--trace", flags.trace_path, "Write the iteration trace as CSV");
  solve->add_option("--cert", flags.cert_path, "Write the certificate as JSON ('-' for stdout)");

  double fisher_tol = 1e-12;
  int fisher_iters = 1'000'000;
  auto* fisher = app.add_subcommand("fisher", "Run proportional response on a Fisher market");
  fisher->add_option("instance", path, "Fisher instance JSON")->required();
  fisher->add_option("--tol", fisher_tol, "Stop once prices move less than this")
      ->capture_default_str();
  fisher->add_option("--max-iters", fisher_iters, "Iteration limit")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fisher->add_option("--out", out, "Write prices and allocations as JSON");

  auto* reduce = app.add_subcommand("reduce", "Write the equivalent one-good-per-agent instance");
  reduce->add_option("instance", path, "Instance JSON")->required();
  reduce->add_option("--out", out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }
  flags.policy_given = policy->count() > 0;

  try {
    if (*check) return cmd_check(path);
    if (*solve) return cmd_solve(path, flags);
    if (*fisher) return cmd_fisher(path, fisher_tol, fisher_iters, out);
    return cmd_reduce(path, out);
  } catch (const adeq::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const adeq::ConditionStarViolated& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConditionStar;
  } catch (const adeq::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
}
