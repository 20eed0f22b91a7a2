#pragma once

#include "icr/model.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace icr {

using QueryId = std::uint64_t;

struct Box {
  Vector lower;
  Vector upper;

  Box() = default;
  Box(Vector lo, Vector hi);

  Eigen::Index dim() const { return lower.size(); }
  Vector center() const { return 0.5 * (lower + upper); }
  bool contains(const Vector& x, double tol = 0.0) const;
  /// True when this box lies inside `outer` per dimension, up to `tol`.
  bool inside(const Box& outer, double tol = 1e-9) const;
  Box clamp_to(const Box& outer) const;

  bool operator==(const Box& other) const;
};

enum class Relation { LE, GE };

/// coeffs · v  (<= | >=)  rhs
struct LinearConstraint {
  Vector coeffs;
  Relation relation = Relation::LE;
  double rhs = 0.0;

  /// Signed violation: positive when the constraint does not hold.
  double violation(const Vector& v) const;
  bool holds(const Vector& v, double tol = 0.0) const { return violation(v) <= tol; }
  bool operator==(const LinearConstraint& other) const;
};

/// Conjunction of output constraints over an input box. The query is SAT iff
/// some input in the box satisfies every output constraint.
struct VerificationQuery {
  std::shared_ptr<const Network> network;
  Box input;
  std::vector<LinearConstraint> output;
  QueryId id = 0;

  void validate() const;
  /// True when x is in the box and f(x) satisfies all output constraints.
  bool is_witness(const Vector& x, double tol = 1e-7) const;
};

enum class Refinement { Refines, NotRefines, Unknown };
const char* to_string(Refinement r);

/// Decides whether `refined` imposes stricter constraints than `base`.
/// Output containment is checked syntactically only.
Refinement check_refinement(const VerificationQuery& refined, const VerificationQuery& base);

struct BoundUpdate {
  Eigen::Index dim = 0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Push/pop frames of input tightenings and extra output constraints over a
/// fixed base query. The network encoding is shared, never rebuilt.
class ConstraintStack {
 public:
  explicit ConstraintStack(VerificationQuery base);

  const VerificationQuery& active() const { return active_; }
  const VerificationQuery& base() const { return base_; }
  size_t depth() const { return frames_.size(); }

  const VerificationQuery& push_frame(const std::vector<BoundUpdate>& tightenings,
                                      const std::vector<LinearConstraint>& added = {});
  const VerificationQuery& pop_frame();

 private:
  struct Frame {
    Box saved_input;
    size_t saved_output_count;
  };

  VerificationQuery base_;
  VerificationQuery active_;
  std::vector<Frame> frames_;
};

VerificationQuery load_query(std::string_view text, std::shared_ptr<const Network> net);
std::string dump_query(const VerificationQuery& q);

}  // namespace icr
