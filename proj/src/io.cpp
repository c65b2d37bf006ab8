#include "adeq/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "adeq/errors.hpp"

namespace adeq {

namespace {

int require_count(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number_integer())
    throw ParseError(std::string("missing integer field \"") + key + "\"");
  const auto v = doc[key].get<long long>();
  if (v <= 0) throw ParseError(std::string("\"") + key + "\" must be positive");
  return static_cast<int>(v);
}

// Fills `out` from [[i, j, value]] triplets; repeated entries are rejected.
void read_triplets(const json& doc, const char* key, Eigen::MatrixXd& out) {
  if (!doc.contains(key) || !doc[key].is_array())
    throw ParseError(std::string("missing array field \"") + key + "\"");
  Eigen::MatrixX<bool> seen = Eigen::MatrixX<bool>::Constant(out.rows(), out.cols(), false);
  for (const json& t : doc[key]) {
    if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() ||
        !t[1].is_number_integer() || !t[2].is_number())
      throw ParseError(std::string("\"") + key + "\" entries must be [i, j, value]");
    const auto i = t[0].get<long long>(), j = t[1].get<long long>();
    if (i < 0 || i >= out.rows() || j < 0 || j >= out.cols())
      throw ParseError(std::string("index out of range in \"") + key + "\"");
    if (seen(i, j)) throw ParseError(std::string("repeated entry in \"") + key + "\"");
    seen(i, j) = true;
    out(i, j) = t[2].get<double>();
  }
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

MarketFile parse_market(const json& doc) {
  if (!doc.is_object()) throw ParseError("instance must be a JSON object");
  const int n_agents = require_count(doc, "n_agents");
  const int n_goods = require_count(doc, "n_goods");

  MarketFile file;
  file.market.utilities = Eigen::MatrixXd::Zero(n_agents, n_goods);
  read_triplets(doc, "utilities", file.market.utilities);
  if (doc.contains("endowments")) {
    file.market.endowments = Eigen::MatrixXd::Zero(n_agents, n_goods);
    read_triplets(doc, "endowments", file.market.endowments);
  } else {
    if (n_agents != n_goods)
      throw ParseError("\"endowments\" may only be omitted when n_goods equals n_agents");
    file.market.endowments = Eigen::MatrixXd::Identity(n_agents, n_goods);
  }

  if (doc.contains("origin_map")) {
    if (n_agents != n_goods) throw ParseError("\"origin_map\" requires a bijective instance");
    OriginMap origin;
    origin.num_agents = require_count(doc, "n_source_agents");
    origin.num_goods = require_count(doc, "n_source_goods");
    for (const json& t : doc["origin_map"]) {
      if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() ||
          !t[1].is_number_integer() || !t[2].is_number())
        throw ParseError("\"origin_map\" entries must be [agent, good, amount]");
      Origin o{t[0].get<int>(), t[1].get<int>(), t[2].get<double>()};
      if (o.agent < 0 || o.agent >= origin.num_agents || o.good < 0 ||
          o.good >= origin.num_goods || !(o.amount > 0.0))
        throw ParseError("invalid \"origin_map\" entry");
      origin.copies.push_back(o);
    }
    if (static_cast<int>(origin.copies.size()) != n_agents)
      throw ParseError("\"origin_map\" must have one entry per agent");
    file.origin = std::move(origin);
  }
  return file;
}

MarketFile read_market_file(const std::string& path) { return parse_market(read_json_file(path)); }

json to_json(const BijectiveMarket& m) {
  json doc;
  doc["n_agents"] = m.size();
  doc["n_goods"] = m.size();
  json utilities = json::array();
  const auto edges = m.edges();
  for (Eigen::Index k = 0; k < m.num_edges(); ++k)
    utilities.push_back({edges[k].agent, edges[k].good, m.utility()[k]});
  doc["utilities"] = std::move(utilities);
  if (m.origin()) {
    doc["n_source_agents"] = m.origin()->num_agents;
    doc["n_source_goods"] = m.origin()->num_goods;
    json origin = json::array();
    for (const Origin& o : m.origin()->copies) origin.push_back({o.agent, o.good, o.amount});
    doc["origin_map"] = std::move(origin);
  }
  return doc;
}

FisherMarket parse_fisher(const json& doc) {
  if (!doc.is_object()) throw ParseError("instance must be a JSON object");
  if (!doc.contains("budgets") || !doc["budgets"].is_array() || doc["budgets"].empty())
    throw ParseError("missing array field \"budgets\"");
  if (!doc.contains("utilities") || !doc["utilities"].is_array())
    throw ParseError("missing array field \"utilities\"");

  FisherMarket m;
  m.budgets.resize(static_cast<Eigen::Index>(doc["budgets"].size()));
  for (std::size_t i = 0; i < doc["budgets"].size(); ++i) {
    if (!doc["budgets"][i].is_number()) throw ParseError("budgets must be numbers");
    m.budgets[static_cast<Eigen::Index>(i)] = doc["budgets"][i].get<double>();
  }
  long long n_goods = 0;
  if (doc.contains("n_goods")) {
    n_goods = require_count(doc, "n_goods");
  } else {
    for (const json& t : doc["utilities"])
      if (t.is_array() && t.size() == 3 && t[1].is_number_integer())
        n_goods = std::max(n_goods, t[1].get<long long>() + 1);
  }
  if (n_goods <= 0) throw ParseError("market has no goods");
  m.utilities = Eigen::MatrixXd::Zero(m.budgets.size(), n_goods);
  read_triplets(doc, "utilities", m.utilities);
  return m;
}

FisherMarket read_fisher_file(const std::string& path) { return parse_fisher(read_json_file(path)); }

json to_json(const EquilibriumCertificate& cert) {
  json doc;
  doc["passed"] = cert.passed;
  doc["epsilon"] = cert.epsilon;
  doc["clearance_residual"] = cert.clearance_residual;
  doc["budget_residual"] = cert.budget_residual;
  doc["optimality_gap"] = cert.optimality_gap;
  doc["objective_value"] = cert.objective_value;
  doc["cap_binding"] = cert.cap_binding;
  doc["prices"] = std::vector<double>(cert.prices.data(), cert.prices.data() + cert.prices.size());
  json alloc = json::array();
  for (Eigen::Index i = 0; i < cert.allocation.rows(); ++i)
    for (Eigen::Index j = 0; j < cert.allocation.cols(); ++j)
      if (cert.allocation(i, j) != 0.0) alloc.push_back({i, j, cert.allocation(i, j)});
  doc["allocations"] = std::move(alloc);
  return doc;
}

json to_json(const FisherSolution& sol) {
  json doc;
  doc["iterations"] = sol.iterations;
  doc["prices"] = std::vector<double>(sol.prices.data(), sol.prices.data() + sol.prices.size());
  json alloc = json::array();
  for (Eigen::Index i = 0; i < sol.allocation.rows(); ++i)
    for (Eigen::Index j = 0; j < sol.allocation.cols(); ++j)
      if (sol.allocation(i, j) != 0.0) alloc.push_back({i, j, sol.allocation(i, j)});
  doc["allocations"] = std::move(alloc);
  return doc;
}

void write_trace_csv(std::ostream& os, const IterationTrace& trace) {
  const bool audit = trace.policy == EtaPolicy::PaperBound;
  os << "iter,obj_pre,obj_post_grad,obj_post_beta,grad_norm,step_norm,max_residual,cap_binding";
  if (audit) os << ",audit";
  os << '\n';
  for (const IterationRecord& r : trace.records) {
    os << r.iter << ',' << format_number(r.obj_pre) << ',' << format_number(r.obj_post_grad) << ','
       << format_number(r.obj_post_beta) << ',' << format_number(r.grad_norm) << ','
       << format_number(r.step_norm) << ',' << format_number(r.max_residual) << ','
       << (r.cap_binding ? 1 : 0);
    if (audit) {
      switch (r.audit) {
        case AuditStatus::Inactive: os << ",inactive"; break;
        case AuditStatus::Pass: os << ",pass"; break;
        case AuditStatus::Fail: os << ",fail"; break;
        case AuditStatus::NotApplicable: os << ",n/a"; break;
      }
    }
    os << '\n';
  }
}

}  // namespace adeq
