#include "icr/ica.hpp"

#include "icr/error.hpp"

#include <json.hpp>

#include <algorithm>

namespace icr {

size_t ConflictPool::clause_count() const {
  size_t n = 0;
  for (const auto& [id, cs] : clauses) n += cs.size();
  return n;
}

std::optional<QueryId> ConflictPool::max_id() const {
  if (clauses.empty()) return std::nullopt;
  return clauses.rbegin()->first;
}

std::string save_pool(const ConflictPool& pool) {
  using nlohmann::json;
  json queries = json::object();
  for (const auto& [id, cs] : pool.clauses) {
    json list = json::array();
    for (const Clause& c : cs) {
      json lits = json::array();
      for (const PhaseLiteral& l : c.literals())
        lits.push_back({{"layer", l.neuron.layer}, {"neuron", l.neuron.neuron}, {"phase", l.active ? "active" : "inactive"}});
      list.push_back(std::move(lits));
    }
    queries[std::to_string(id)] = std::move(list);
  }
  return json{{"queries", std::move(queries)}}.dump();
}

ConflictPool load_pool(std::string_view text) {
  using nlohmann::json;
  ConflictPool pool;
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return pool;
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw Error(ErrorKind::Parse, "pool document must be an object");
    if (!doc.contains("queries")) return pool;
    for (const auto& [key, list] : doc.at("queries").items()) {
      size_t used = 0;
      const QueryId id = std::stoull(key, &used);
      if (used != key.size()) throw Error(ErrorKind::Parse, "query id '" + key + "' is not an integer");
      auto& target = pool.clauses[id];
      for (const json& c : list) {
        std::vector<PhaseLiteral> lits;
        for (const json& l : c) {
          const std::string phase = l.at("phase").get<std::string>();
          if (phase != "active" && phase != "inactive") throw Error(ErrorKind::Parse, "phase must be active|inactive");
          lits.push_back({{l.at("layer").get<int>(), l.at("neuron").get<int>()}, phase == "active"});
        }
        target.emplace_back(std::move(lits));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  } catch (const std::logic_error& e) {  // stoull
    throw Error(ErrorKind::Parse, e.what());
  }
  return pool;
}

void ICAState::begin_query(const std::set<QueryId>& inherit) {
  sat_.reset();
  inherit_ = inherit;
  missing_.clear();
  inherited_clauses_ = 0;
  prunes_ = 0;
  propagations_ = 0;
  for (QueryId id : inherit) {
    const auto it = pool_.clauses.find(id);
    if (it == pool_.clauses.end()) {
      missing_.push_back(id);
      continue;
    }
    for (const Clause& c : it->second) sat_.add_clause(c);
    inherited_clauses_ += it->second.size();
  }
}

IcaStatus ICAState::propagate(BoundsState& bounds, PhaseAssignment& assignment) {
  std::vector<PhaseLiteral> alpha = assignment.fixed();
  if (sat_.solve_under_assumptions(alpha) == SatResult::Unsat) {
    ++prunes_;
    if (observer_) observer_({IcaEvent::Kind::Prune, alpha, {}});
    return IcaStatus::Unsat;
  }
  const std::vector<PhaseLiteral> implied = sat_.implied_literals();
  if (observer_)
    for (const PhaseLiteral& l : implied) observer_({IcaEvent::Kind::Implied, alpha, l});
  const ApplyOutcome applied = apply_implied_literals(bounds, assignment, implied);
  propagations_ += applied.applied;
  if (applied.contradiction) {
    ++prunes_;
    return IcaStatus::Unsat;
  }
  return IcaStatus::Consistent;
}

RecordOutcome ICAState::record_conflict(QueryId id, const Clause& conflict) {
  auto& existing = pool_.clauses[id];
  const bool subsumed =
      std::any_of(existing.begin(), existing.end(), [&](const Clause& c) { return c.subset_of(conflict); });
  if (subsumed) return {false, conflict.empty()};
  existing.push_back(conflict);
  sat_.add_clause(conflict);
  return {true, conflict.empty()};
}

}  // namespace icr
