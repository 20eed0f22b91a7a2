#pragma once

#include "icr/bab.hpp"
#include "icr/ica.hpp"
#include "icr/query.hpp"

#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace icr {

/// An earlier query, possibly from another run, whose conflicts may be
/// reused by any issued query that refines it.
struct Ancestor {
  QueryId id = 0;
  VerificationQuery query;
};

struct TaskOptions {
  bool incremental = true;
  /// Inherit driver-built chains without checking them; checks still run and
  /// are counted. External ancestors are always checked.
  bool trusted_refinement = false;
  QueryId first_id = 0;
  std::vector<Ancestor> ancestors;
};

struct RefinementLog {
  long refines = 0;
  long not_refines = 0;
  long unknown = 0;
};

struct IssuedQuery {
  QueryId id = 0;
  VerificationQuery query;
  std::set<QueryId> inherit;
  Verdict verdict = Verdict::Timeout;
};

struct TaskSummary {
  SolveStats stats;
  RefinementLog refinement;
  std::vector<IssuedQuery> issued;
};

/// y_j - y_c >= 0: class j scores at least as high as class c.
LinearConstraint misclassification_constraint(Eigen::Index outputs, Eigen::Index target, Eigen::Index competitor);

// ---------------------------------------------------------------- radius

struct RadiusTask {
  std::shared_ptr<const Network> network;
  Vector x0;
  Eigen::Index target_class = 0;
  double eps_min = 0.0;
  double eps_max = 1.0;
  double delta = 0.001;
  double budget_s = 60.0;
  double query_timeout_s = 10.0;
  bool check_bracket = true;
};

struct RadiusResult {
  double eps_lower = 0.0;
  double eps_upper = 0.0;
  long verify_calls = 0;
  bool completed = false;  // width <= delta reached within the budget
  TaskSummary summary;
};

/// Brackets the local robustness radius at x0 under the L-infinity norm by
/// an adaptive search over radii, reusing conflicts of earlier queries at
/// larger radii for the same competing class.
RadiusResult robustness_radius(const RadiusTask& task, ICAState& ica, const TaskOptions& options = {});

// ---------------------------------------------------------- input split

struct SplitTask {
  VerificationQuery base;
  double initial_timeout_s = 5.0;
  double growth = 1.5;
  double global_timeout_s = 600.0;
};

struct SplitEvent {
  Box parent;
  Box left;
  Box right;
  Eigen::Index dim = 0;
};

struct SplitResult {
  SolveResult result;
  long verify_calls = 0;
  std::vector<SplitEvent> splits;
  TaskSummary summary;
};

/// Timeout for a query at recursion depth `depth`.
double split_timeout(double initial, double growth, int depth);

SplitResult input_split_verify(const SplitTask& task, ICAState& ica, const TaskOptions& options = {});

// ----------------------------------------------------------------- msfs

enum class FeatureOrdering { Sensitivity, Index };

struct MsfsTask {
  std::shared_ptr<const Network> network;
  Vector x0;
  Box domain;
  double query_timeout_s = 10.0;
  double budget_s = 600.0;
  FeatureOrdering ordering = FeatureOrdering::Sensitivity;
};

struct SingletonDecision {
  Eigen::Index feature = 0;
  std::vector<Eigen::Index> freed_before;
  bool fixed = false;
};

struct MsfsResult {
  std::vector<Eigen::Index> fixed;
  std::vector<Eigen::Index> freed;
  long verify_calls = 0;
  bool completed = false;
  std::vector<std::pair<double, size_t>> trace;  // (elapsed s, |fixed|)
  std::vector<SingletonDecision> singletons;
  TaskSummary summary;
};

/// Features in ascending importance: width of the class-margin interval when
/// only that feature ranges over the domain. Ties keep index order.
std::vector<Eigen::Index> feature_order(const Network& net, const Vector& x0, const Box& domain,
                                        FeatureOrdering ordering);

/// Input box with the `freed` features over the domain and the others at x0.
Box freed_box(const Vector& x0, const Box& domain, const std::vector<Eigen::Index>& freed);

MsfsResult msfs_extract(const MsfsTask& task, ICAState& ica, const TaskOptions& options = {});

std::string radius_json(const RadiusResult& r);
std::string split_json(const SplitResult& r);
std::string msfs_json(const MsfsResult& r);

}  // namespace icr
