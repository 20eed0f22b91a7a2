#include "icr/satcore.hpp"

#include "icr/error.hpp"

#include <algorithm>
#include <sstream>

namespace icr {

Clause::Clause(std::vector<PhaseLiteral> literals) : literals_(std::move(literals)) {
  std::sort(literals_.begin(), literals_.end());
  literals_.erase(std::unique(literals_.begin(), literals_.end()), literals_.end());
  for (size_t i = 1; i < literals_.size(); ++i)
    if (literals_[i].neuron == literals_[i - 1].neuron)
      throw Error(ErrorKind::InvalidArgument, "clause mentions both phases of (" +
                                                  std::to_string(literals_[i].neuron.layer) + "," +
                                                  std::to_string(literals_[i].neuron.neuron) + ")");
}

bool Clause::subset_of(const Clause& other) const {
  return std::includes(other.literals_.begin(), other.literals_.end(), literals_.begin(), literals_.end());
}

void SatState::reset() {
  vars_.clear();
  neurons_.clear();
  clauses_.clear();
  units_.clear();
  has_empty_ = false;
  watches_.clear();
  assigns_.clear();
  trail_.clear();
  propagated_ = 0;
  last_consistent_ = false;
  implied_.clear();
  diagnostic_.clear();
}

int SatState::var_of(const NeuronId& n) {
  auto [it, inserted] = vars_.try_emplace(n, static_cast<int>(neurons_.size()));
  if (inserted) {
    neurons_.push_back(n);
    assigns_.push_back(-1);
    watches_.resize(2 * neurons_.size());
  }
  return it->second;
}

std::int8_t SatState::value(Lit l) const {
  const std::int8_t a = assigns_[static_cast<size_t>(l >> 1)];
  if (a < 0) return -1;
  const bool lit_active = (l & 1) == 0;
  return static_cast<std::int8_t>((a == 1) == lit_active ? 1 : 0);
}

void SatState::assign(Lit l) {
  assigns_[static_cast<size_t>(l >> 1)] = static_cast<std::int8_t>((l & 1) == 0 ? 1 : 0);
  trail_.push_back(l);
}

void SatState::backtrack_to(size_t trail_size) {
  while (trail_.size() > trail_size) {
    assigns_[static_cast<size_t>(trail_.back() >> 1)] = -1;
    trail_.pop_back();
  }
  propagated_ = std::min(propagated_, trail_size);
}

void SatState::add_clause(const Clause& conflict) {
  if (conflict.empty()) {
    has_empty_ = true;
    return;
  }
  std::vector<Lit> cnf;
  cnf.reserve(conflict.size());
  for (const PhaseLiteral& l : conflict.literals()) cnf.push_back(encode(l.negated()));
  if (cnf.size() == 1) {
    units_.push_back(cnf.front());
    return;
  }
  const int index = static_cast<int>(clauses_.size());
  watches_[static_cast<size_t>(cnf[0])].push_back(index);
  watches_[static_cast<size_t>(cnf[1])].push_back(index);
  clauses_.push_back(std::move(cnf));
}

// Two-watched-literal unit propagation. Returns false on conflict.
bool SatState::propagate() {
  while (propagated_ < trail_.size()) {
    const Lit falsified = trail_[propagated_++] ^ 1;
    std::vector<int>& ws = watches_[static_cast<size_t>(falsified)];
    size_t keep = 0;
    bool conflict = false;
    for (size_t i = 0; i < ws.size(); ++i) {
      const int ci = ws[i];
      if (conflict) {
        ws[keep++] = ci;
        continue;
      }
      std::vector<Lit>& c = clauses_[static_cast<size_t>(ci)];
      if (c[0] == falsified) std::swap(c[0], c[1]);
      if (value(c[0]) == 1) {
        ws[keep++] = ci;
        continue;
      }
      bool moved = false;
      for (size_t k = 2; k < c.size(); ++k) {
        if (value(c[k]) != 0) {
          std::swap(c[1], c[k]);
          watches_[static_cast<size_t>(c[1])].push_back(ci);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[keep++] = ci;
      if (value(c[0]) == 0)
        conflict = true;
      else
        assign(c[0]);
    }
    ws.resize(keep);
    if (conflict) return false;
  }
  return true;
}

bool SatState::search() {
  struct Decision {
    size_t trail_pos;
    Lit lit;
    bool flipped;
  };
  std::vector<Decision> decisions;
  for (;;) {
    const auto next = std::find(assigns_.begin(), assigns_.end(), std::int8_t{-1});
    if (next == assigns_.end()) return true;
    const Lit lit = 2 * static_cast<int>(next - assigns_.begin()) + 1;
    decisions.push_back({trail_.size(), lit, false});
    assign(lit);
    while (!propagate()) {
      while (!decisions.empty() && decisions.back().flipped) {
        backtrack_to(decisions.back().trail_pos);
        decisions.pop_back();
      }
      if (decisions.empty()) return false;
      Decision& d = decisions.back();
      backtrack_to(d.trail_pos);
      d.flipped = true;
      d.lit ^= 1;
      assign(d.lit);
    }
  }
}

SatResult SatState::solve_under_assumptions(const std::vector<PhaseLiteral>& assumptions) {
  last_consistent_ = false;
  implied_.clear();
  diagnostic_.clear();
  backtrack_to(0);
  if (has_empty_) {
    diagnostic_ = "database contains the empty clause";
    return SatResult::Unsat;
  }

  for (const PhaseLiteral& a : assumptions) {
    const Lit l = encode(a);
    const std::int8_t v = value(l);
    if (v == 0) {
      diagnostic_ = "complementary assumptions on (" + std::to_string(a.neuron.layer) + "," +
                    std::to_string(a.neuron.neuron) + ")";
      backtrack_to(0);
      return SatResult::Unsat;
    }
    if (v < 0) assign(l);
  }
  const size_t assumed = trail_.size();
  bool ok = true;
  for (Lit u : units_) {
    const std::int8_t v = value(u);
    if (v == 0) {
      ok = false;
      break;
    }
    if (v < 0) assign(u);
  }
  if (!ok || !propagate()) {
    backtrack_to(0);
    return SatResult::Unsat;
  }
  std::vector<PhaseLiteral> implied;
  for (size_t i = assumed; i < trail_.size(); ++i) implied.push_back(decode(trail_[i]));

  if (full_search_ && !search()) {
    backtrack_to(0);
    return SatResult::Unsat;
  }
  backtrack_to(0);
  implied_ = std::move(implied);
  last_consistent_ = true;
  return SatResult::Consistent;
}

std::vector<PhaseLiteral> SatState::implied_literals() const {
  if (!last_consistent_) throw Error(ErrorKind::InvalidArgument, "implied literals requested after an UNSAT solve");
  return implied_;
}

std::string SatState::dimacs() const {
  std::ostringstream out;
  out << "p cnf " << neurons_.size() << ' ' << clause_count() << '\n';
  auto dimacs_lit = [](Lit l) { return ((l & 1) ? -1 : 1) * ((l >> 1) + 1); };
  if (has_empty_) out << "0\n";
  for (Lit u : units_) out << dimacs_lit(u) << " 0\n";
  for (const auto& c : clauses_) {
    std::vector<Lit> sorted = c;
    std::sort(sorted.begin(), sorted.end());
    for (Lit l : sorted) out << dimacs_lit(l) << ' ';
    out << "0\n";
  }
  return out.str();
}

}  // namespace icr
