#include "icr/lp.hpp"

#include "icr/error.hpp"

#include <cmath>
#include <limits>

namespace icr {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kRowZeroTol = 1e-14;

}  // namespace

// Variables are shifted to s = x - lower >= 0, so every constraint becomes
// a · s <= r. Box upper bounds add rows s_i <= upper_i - lower_i. Each row
// gets a slack; rows with r < 0 are negated and get an artificial variable.
// Phase 1 minimises the sum of artificials.
LPResult lp_feasible(const LPProblem& problem) {
  const Box& box = problem.bounds;
  const Eigen::Index n = box.dim();
  for (const LinearConstraint& c : problem.constraints) {
    if (c.coeffs.size() != n) throw Error(ErrorKind::DimensionMismatch, "LP constraint length");
    if (!c.coeffs.allFinite() || !std::isfinite(c.rhs)) throw Error(ErrorKind::NonFinite, "LP constraint");
  }

  std::vector<Vector> rows;
  std::vector<double> rhs;
  rows.reserve(problem.constraints.size() + static_cast<size_t>(n));
  for (const LinearConstraint& c : problem.constraints) {
    const double sign = c.relation == Relation::LE ? 1.0 : -1.0;
    Vector a = sign * c.coeffs;
    double r = sign * c.rhs - a.dot(box.lower);
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale <= kRowZeroTol) {
      if (r < -kLpFeasibilityTol) return {};
      continue;
    }
    rows.push_back(a / scale);
    rhs.push_back(r / scale);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector a = Vector::Zero(n);
    a(i) = 1.0;
    rows.push_back(std::move(a));
    rhs.push_back(box.upper(i) - box.lower(i));
  }

  const auto m = static_cast<Eigen::Index>(rows.size());
  std::vector<Eigen::Index> art_rows;
  for (Eigen::Index i = 0; i < m; ++i)
    if (rhs[static_cast<size_t>(i)] < 0) art_rows.push_back(i);
  const auto n_art = static_cast<Eigen::Index>(art_rows.size());

  // Columns: [s (n) | slack (m) | artificial (n_art) | rhs]
  const Eigen::Index cols = n + m + n_art;
  Matrix tab = Matrix::Zero(m + 1, cols + 1);
  std::vector<Eigen::Index> basis(static_cast<size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    tab.row(i).head(n) = rows[static_cast<size_t>(i)].transpose();
    tab(i, n + i) = 1.0;
    tab(i, cols) = rhs[static_cast<size_t>(i)];
    basis[static_cast<size_t>(i)] = n + i;
  }
  for (Eigen::Index k = 0; k < n_art; ++k) {
    const Eigen::Index i = art_rows[static_cast<size_t>(k)];
    tab.row(i) *= -1.0;
    tab(i, n + m + k) = 1.0;
    basis[static_cast<size_t>(i)] = n + m + k;
  }
  // Objective row holds reduced costs of min sum(artificials), expressed in
  // the non-basic variables: subtract artificial rows.
  for (Eigen::Index i : art_rows) tab.row(m) -= tab.row(i);
  for (Eigen::Index k = 0; k < n_art; ++k) tab(m, n + m + k) = 0.0;

  LPResult result;
  for (;;) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (tab(m, j) < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = tab(i, enter);
      if (a <= kPivotTol) continue;
      const double ratio = tab(i, cols) / a;
      if (ratio < best - kPivotTol ||
          (std::abs(ratio - best) <= kPivotTol && basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)])) {
        best = ratio;
        leave = i;
      }
    }
    // Phase-1 objective is bounded below by 0, so an entering column always has a pivot row.
    if (leave < 0) throw Error(ErrorKind::Numerical, "phase-1 simplex found an unbounded direction");

    tab.row(leave) /= tab(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = tab(i, enter);
      if (f != 0.0) tab.row(i) -= f * tab.row(leave);
    }
    basis[static_cast<size_t>(leave)] = enter;
    if (++result.pivots > kLpIterationCap) throw Error(ErrorKind::Numerical, "simplex iteration cap exceeded");
  }

  // -objective row rhs equals the current sum of artificials.
  const double infeasibility = -tab(m, cols);
  if (infeasibility > kLpArtificialTol) return result;

  Vector s = Vector::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index b = basis[static_cast<size_t>(i)];
    if (b < n) s(b) = tab(i, cols);
  }
  Vector x = (box.lower + s).cwiseMax(box.lower).cwiseMin(box.upper);
  for (const LinearConstraint& c : problem.constraints) {
    if (c.violation(x) > kLpFeasibilityTol)
      throw Error(ErrorKind::Numerical, "feasible basis fails witness re-check (violation " +
                                            std::to_string(c.violation(x)) + ")");
  }
  result.feasible = true;
  result.witness = std::move(x);
  return result;
}

}  // namespace icr
