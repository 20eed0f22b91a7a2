#pragma once

#include "icr/propagation.hpp"
#include "icr/query.hpp"
#include "icr/satcore.hpp"

#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace icr {

/// Conflicts recorded per query id.
struct ConflictPool {
  std::map<QueryId, std::vector<Clause>> clauses;

  size_t clause_count() const;
  bool contains(QueryId id) const { return clauses.count(id) != 0; }
  /// Largest id present, or nullopt for an empty pool.
  std::optional<QueryId> max_id() const;

  bool operator==(const ConflictPool&) const = default;
};

std::string save_pool(const ConflictPool& pool);
ConflictPool load_pool(std::string_view text);

enum class IcaStatus { Unsat, Consistent };

/// What ica_propagate concluded at a node; observers use it to audit
/// pruning and implications against an oracle.
struct IcaEvent {
  enum class Kind { Prune, Implied } kind;
  std::vector<PhaseLiteral> assumptions;
  PhaseLiteral literal{};  // Implied only
};

struct RecordOutcome {
  bool added = false;
  bool query_unsat = false;  // the empty clause was recorded
};

/// Conflict pool plus one SAT instance holding the clauses active for the
/// current query. One instance is shared by every query of a task run.
class ICAState {
 public:
  /// Resets the SAT instance and loads every clause recorded for the ids in
  /// `inherit`. Unknown ids load nothing and are reported by missing_ids().
  void begin_query(const std::set<QueryId>& inherit);

  /// SAT check of the node's fixed phases against the active clauses, then
  /// application of unit-implied phases to the bounds.
  IcaStatus propagate(BoundsState& bounds, PhaseAssignment& assignment);

  RecordOutcome record_conflict(QueryId id, const Clause& conflict);

  const ConflictPool& pool() const { return pool_; }
  void set_pool(ConflictPool pool) { pool_ = std::move(pool); }
  const SatState& sat() const { return sat_; }
  void set_full_search(bool full) { sat_.set_full_search(full); }

  const std::set<QueryId>& inherited() const { return inherit_; }
  const std::vector<QueryId>& missing_ids() const { return missing_; }
  size_t inherited_clauses() const { return inherited_clauses_; }
  long prunes() const { return prunes_; }
  long propagations() const { return propagations_; }

  void set_observer(std::function<void(const IcaEvent&)> observer) { observer_ = std::move(observer); }

 private:
  ConflictPool pool_;
  SatState sat_;
  std::set<QueryId> inherit_;
  std::vector<QueryId> missing_;
  size_t inherited_clauses_ = 0;
  long prunes_ = 0;
  long propagations_ = 0;
  std::function<void(const IcaEvent&)> observer_;
};

}  // namespace icr
