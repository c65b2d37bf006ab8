#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

#include "adeq/fisher.hpp"
#include "adeq/market.hpp"
#include "adeq/solver.hpp"
#include "adeq/verification.hpp"

namespace adeq {

using json = nlohmann::json;

/// A market instance as read from disk. `origin` is set for files written by
/// the reduce command.
struct MarketFile {
  MarketInstance market;
  std::optional<OriginMap> origin;
};

/// Instance format: {"n_agents", "n_goods", "utilities": [[i, j, u]],
/// "endowments": [[i, j, w]]}, 0-based. Without "endowments" the market
/// must be square and every agent owns its own good. Throws ParseError.
MarketFile parse_market(const json& doc);
MarketFile read_market_file(const std::string& path);

/// The reduced market, optionally with "origin_map": [[agent, good, amount]]
/// and the original "n_source_agents", "n_source_goods".
json to_json(const BijectiveMarket& m);

/// Fisher format: {"budgets": [B_i], "utilities": [[i, j, u]]}, with
/// optional "n_goods" (defaults to the largest good index + 1).
FisherMarket parse_fisher(const json& doc);
FisherMarket read_fisher_file(const std::string& path);

json to_json(const EquilibriumCertificate& cert);
json to_json(const FisherSolution& sol);

/// Header iter,obj_pre,obj_post_grad,obj_post_beta,grad_norm,step_norm,
/// max_residual,cap_binding; a trailing "audit" column is added under the
/// paper_bound policy.
void write_trace_csv(std::ostream& os, const IterationTrace& trace);

/// %.17g.
std::string format_number(double v);

json read_json_file(const std::string& path);

}  // namespace adeq
