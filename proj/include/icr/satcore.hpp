#pragma once

#include "icr/model.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace icr {

/// A fixed ReLU phase: active (pre-activation >= 0) or inactive (<= 0).
struct PhaseLiteral {
  NeuronId neuron;
  bool active = true;

  PhaseLiteral negated() const { return {neuron, !active}; }
  auto operator<=>(const PhaseLiteral&) const = default;
};

/// A conflict: a set of phase literals whose conjunction is infeasible.
/// Added to a SAT database as the CNF clause of their negations.
/// Literals are kept sorted and unique.
class Clause {
 public:
  Clause() = default;
  explicit Clause(std::vector<PhaseLiteral> literals);

  const std::vector<PhaseLiteral>& literals() const { return literals_; }
  size_t size() const { return literals_.size(); }
  bool empty() const { return literals_.empty(); }
  bool subset_of(const Clause& other) const;

  bool operator==(const Clause&) const = default;

 private:
  std::vector<PhaseLiteral> literals_;
};

enum class SatResult { Unsat, Consistent };

/// Clause database over phase variables with DPLL search under assumptions.
/// Branching is on ascending variable index, inactive first; backtracking is
/// chronological.
class SatState {
 public:
  void reset();
  void add_clause(const Clause& conflict);
  SatResult solve_under_assumptions(const std::vector<PhaseLiteral>& assumptions);

  /// Literals forced by unit propagation from the assumptions and the database
  /// in the last CONSISTENT solve, excluding the assumptions themselves.
  std::vector<PhaseLiteral> implied_literals() const;

  size_t clause_count() const { return clauses_.size() + units_.size() + (has_empty_ ? 1 : 0); }
  int variable_count() const { return static_cast<int>(neurons_.size()); }
  const std::string& diagnostic() const { return diagnostic_; }

  /// DIMACS-style dump; variable i is written as i + 1, inactive is negative.
  std::string dimacs() const;

  /// When false, solve only runs root-level unit propagation (sound but incomplete).
  void set_full_search(bool full) { full_search_ = full; }

 private:
  using Lit = int;  // 2 * var + (inactive ? 1 : 0)

  int var_of(const NeuronId& n);
  Lit encode(const PhaseLiteral& l) { return 2 * var_of(l.neuron) + (l.active ? 0 : 1); }
  PhaseLiteral decode(Lit l) const { return {neurons_[static_cast<size_t>(l >> 1)], (l & 1) == 0}; }

  std::int8_t value(Lit l) const;
  void assign(Lit l);
  bool propagate();
  void backtrack_to(size_t trail_size);
  bool search();

  std::map<NeuronId, int> vars_;
  std::vector<NeuronId> neurons_;
  std::vector<std::vector<Lit>> clauses_;  // size >= 2, first two are watched
  std::vector<Lit> units_;
  bool has_empty_ = false;
  std::vector<std::vector<int>> watches_;  // per literal: clauses watching it

  std::vector<std::int8_t> assigns_;  // per var: -1 unassigned, 0 inactive, 1 active
  std::vector<Lit> trail_;
  size_t propagated_ = 0;

  bool last_consistent_ = false;
  std::vector<PhaseLiteral> implied_;
  std::string diagnostic_;
  bool full_search_ = true;
};

}  // namespace icr
