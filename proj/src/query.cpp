#include "icr/query.hpp"

#include "icr/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace icr {

Box::Box(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) throw Error(ErrorKind::DimensionMismatch, "box bounds differ in length");
  if (!lower.allFinite() || !upper.allFinite()) throw Error(ErrorKind::NonFinite, "box bound");
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    if (lower(i) > upper(i))
      throw Error(ErrorKind::InvalidArgument, "box dimension " + std::to_string(i) + " has lower > upper");
}

bool Box::contains(const Vector& x, double tol) const {
  if (x.size() != dim()) return false;
  for (Eigen::Index i = 0; i < dim(); ++i)
    if (x(i) < lower(i) - tol || x(i) > upper(i) + tol) return false;
  return true;
}

bool Box::inside(const Box& outer, double tol) const {
  if (outer.dim() != dim()) return false;
  for (Eigen::Index i = 0; i < dim(); ++i)
    if (lower(i) < outer.lower(i) - tol || upper(i) > outer.upper(i) + tol) return false;
  return true;
}

Box Box::clamp_to(const Box& outer) const {
  Box out = *this;
  out.lower = lower.cwiseMax(outer.lower).cwiseMin(outer.upper);
  out.upper = upper.cwiseMin(outer.upper).cwiseMax(outer.lower);
  return out;
}

bool Box::operator==(const Box& other) const {
  return dim() == other.dim() && lower == other.lower && upper == other.upper;
}

double LinearConstraint::violation(const Vector& v) const {
  const double lhs = coeffs.dot(v);
  return relation == Relation::LE ? lhs - rhs : rhs - lhs;
}

bool LinearConstraint::operator==(const LinearConstraint& other) const {
  return relation == other.relation && rhs == other.rhs && coeffs == other.coeffs;
}

void VerificationQuery::validate() const {
  if (!network) throw Error(ErrorKind::InvalidArgument, "query without network");
  if (input.dim() != network->input_dim())
    throw Error(ErrorKind::DimensionMismatch, "query box has " + std::to_string(input.dim()) +
                                                  " dimensions, network expects " +
                                                  std::to_string(network->input_dim()));
  for (const LinearConstraint& c : output) {
    if (c.coeffs.size() != network->output_dim())
      throw Error(ErrorKind::DimensionMismatch, "output constraint length " + std::to_string(c.coeffs.size()));
    if (!c.coeffs.allFinite() || !std::isfinite(c.rhs)) throw Error(ErrorKind::NonFinite, "output constraint");
  }
}

bool VerificationQuery::is_witness(const Vector& x, double tol) const {
  if (!input.contains(x, tol)) return false;
  const Vector y = evaluate(*network, x);
  return std::all_of(output.begin(), output.end(), [&](const LinearConstraint& c) { return c.holds(y, tol); });
}

const char* to_string(Refinement r) {
  switch (r) {
    case Refinement::Refines: return "refines";
    case Refinement::NotRefines: return "not_refines";
    case Refinement::Unknown: return "unknown";
  }
  return "unknown";
}

namespace {

bool same_constraint(const LinearConstraint& a, const LinearConstraint& b) {
  constexpr double kCoeffTol = 1e-12;
  if (a.relation != b.relation || a.coeffs.size() != b.coeffs.size()) return false;
  if (std::abs(a.rhs - b.rhs) > kCoeffTol) return false;
  return (a.coeffs - b.coeffs).cwiseAbs().maxCoeff() <= kCoeffTol;
}

}  // namespace

Refinement check_refinement(const VerificationQuery& refined, const VerificationQuery& base) {
  if (refined.network != base.network)
    throw Error(ErrorKind::DifferentNetwork, "refinement is only defined over one network");
  if (!refined.input.inside(base.input, 1e-9)) return Refinement::NotRefines;
  for (const LinearConstraint& c : base.output) {
    const bool found = std::any_of(refined.output.begin(), refined.output.end(),
                                   [&](const LinearConstraint& d) { return same_constraint(c, d); });
    if (!found) return Refinement::Unknown;
  }
  return Refinement::Refines;
}

ConstraintStack::ConstraintStack(VerificationQuery base) : base_(std::move(base)), active_(base_) {}

const VerificationQuery& ConstraintStack::push_frame(const std::vector<BoundUpdate>& tightenings,
                                                     const std::vector<LinearConstraint>& added) {
  Box next = active_.input;
  for (const BoundUpdate& t : tightenings) {
    if (t.dim < 0 || t.dim >= next.dim())
      throw Error(ErrorKind::DimensionMismatch, "tightening on dimension " + std::to_string(t.dim));
    if (t.lower < next.lower(t.dim) || t.upper > next.upper(t.dim))
      throw Error(ErrorKind::Widening, "dimension " + std::to_string(t.dim));
    if (t.lower > t.upper) throw Error(ErrorKind::InvalidArgument, "tightening produces an empty interval");
    next.lower(t.dim) = t.lower;
    next.upper(t.dim) = t.upper;
  }
  for (const LinearConstraint& c : added)
    if (c.coeffs.size() != active_.network->output_dim())
      throw Error(ErrorKind::DimensionMismatch, "added output constraint");

  frames_.push_back({active_.input, active_.output.size()});
  active_.input = std::move(next);
  active_.output.insert(active_.output.end(), added.begin(), added.end());
  return active_;
}

const VerificationQuery& ConstraintStack::pop_frame() {
  if (frames_.empty()) throw Error(ErrorKind::EmptyStack, "pop without matching push");
  Frame frame = std::move(frames_.back());
  frames_.pop_back();
  active_.input = std::move(frame.saved_input);
  active_.output.resize(frame.saved_output_count);
  return active_;
}

namespace {

using nlohmann::json;

Vector parse_vector(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorKind::Parse, std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::Parse, std::string(what) + " entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

VerificationQuery load_query(std::string_view text, std::shared_ptr<const Network> net) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  if (!doc.is_object() || !doc.contains("input_lower") || !doc.contains("input_upper"))
    throw Error(ErrorKind::Parse, "query needs input_lower and input_upper");
  VerificationQuery q;
  q.network = std::move(net);
  try {
  q.input = Box(parse_vector(doc["input_lower"], "input_lower"), parse_vector(doc["input_upper"], "input_upper"));
  if (doc.contains("output_constraints")) {
    for (const json& c : doc["output_constraints"]) {
      LinearConstraint lc;
      lc.coeffs = parse_vector(c.at("coeffs"), "coeffs");
      const std::string rel = c.at("relation").get<std::string>();
      if (rel == "<=")
        lc.relation = Relation::LE;
      else if (rel == ">=")
        lc.relation = Relation::GE;
      else
        throw Error(ErrorKind::Parse, "relation must be <= or >=");
      if (!c.at("rhs").is_number()) throw Error(ErrorKind::Parse, "rhs must be a number");
      lc.rhs = c.at("rhs").get<double>();
      q.output.push_back(std::move(lc));
    }
  }
  if (doc.contains("id")) q.id = doc["id"].get<QueryId>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  q.validate();
  return q;
}

std::string dump_query(const VerificationQuery& q) {
  json out = json::array();
  for (const LinearConstraint& c : q.output)
    out.push_back({{"coeffs", vector_json(c.coeffs)},
                   {"relation", c.relation == Relation::LE ? "<=" : ">="},
                   {"rhs", c.rhs}});
  return json{{"input_lower", vector_json(q.input.lower)},
              {"input_upper", vector_json(q.input.upper)},
              {"output_constraints", std::move(out)}}
      .dump();
}

}  // namespace icr
