#ifndef OLAC_SIMPLEX_HPP
#define OLAC_SIMPLEX_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "olac/types.hpp"

namespace olac {

/// minimize objective' x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
/// Either constraint block may be empty (zero rows).
template <typename Scalar>
struct LinearProgram {
  Vector<Scalar> objective;
  Matrix<Scalar> A_ub;
  Vector<Scalar> b_ub;
  Matrix<Scalar> A_eq;
  Vector<Scalar> b_eq;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

inline const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterationLimit: return "iteration limit";
  }
  return "?";
}

template <typename Scalar>
struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  Vector<Scalar> x;
  Scalar objective = std::numeric_limits<Scalar>::quiet_NaN();
  int pivots = 0;
};

enum class PivotRule {
  kBland,
  /// Most negative reduced cost, switching to Bland's rule for the rest of
  /// the phase once `degenerate_switch` consecutive degenerate pivots occur.
  kDantzigThenBland,
};

template <typename Scalar>
struct SimplexOptions {
  Scalar tolerance = Eigen::NumTraits<Scalar>::epsilon() * Scalar(1e6);
  int max_pivots = 100000;
  PivotRule rule = PivotRule::kDantzigThenBland;
  int degenerate_switch = 50;
};

namespace detail {

// Dense tableau. Rows 0..m-1 are constraints, row m holds reduced costs with
// the negated objective value in the rhs column.
template <typename Scalar>
class Tableau {
 public:
  Tableau(Eigen::Index rows, Eigen::Index cols) : t_(Matrix<Scalar>::Zero(rows + 1, cols + 1)) {}

  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }
  Scalar& at(Eigen::Index i, Eigen::Index j) { return t_(i, j); }
  Scalar& rhs(Eigen::Index i) { return t_(i, t_.cols() - 1); }
  Scalar& cost(Eigen::Index j) { return t_(rows(), j); }
  Scalar& objective_cell() { return t_(rows(), t_.cols() - 1); }
  auto row(Eigen::Index i) { return t_.row(i); }

  void pivot(Eigen::Index p, Eigen::Index e) {
    t_.row(p) /= t_(p, e);
    Vector<Scalar> column = t_.col(e);
    column(p) = 0;
    t_.noalias() -= column * t_.row(p);
    t_(p, e) = 1;
  }

  // Returns status; `blocked` columns never enter.
  LpStatus run(std::vector<Eigen::Index>& basis, const std::vector<bool>& blocked,
               const SimplexOptions<Scalar>& options, int& pivots) {
    const Scalar tol = options.tolerance;
    bool bland = options.rule == PivotRule::kBland;
    int degenerate_run = 0;
    for (;;) {
      Eigen::Index entering = -1;
      Scalar best = -tol;
      for (Eigen::Index j = 0; j < cols(); ++j) {
        if (blocked[static_cast<std::size_t>(j)]) continue;
        const Scalar d = cost(j);
        if (bland) {
          if (d < -tol) {
            entering = j;
            break;
          }
        } else if (d < best) {
          best = d;
          entering = j;
        }
      }
      if (entering < 0) return LpStatus::kOptimal;
      if (pivots >= options.max_pivots) return LpStatus::kIterationLimit;

      Eigen::Index leaving = -1;
      Scalar best_ratio = std::numeric_limits<Scalar>::infinity();
      for (Eigen::Index i = 0; i < rows(); ++i) {
        const Scalar a = at(i, entering);
        if (a <= tol) continue;
        const Scalar ratio = rhs(i) / a;
        if (ratio < best_ratio - tol ||
            (ratio <= best_ratio + tol && leaving >= 0 &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leaving)])) {
          if (ratio < best_ratio) best_ratio = ratio;
          leaving = i;
        }
      }
      if (leaving < 0) return LpStatus::kUnbounded;

      if (best_ratio <= tol) {
        if (++degenerate_run >= options.degenerate_switch) bland = true;
      } else {
        degenerate_run = 0;
      }
      pivot(leaving, entering);
      basis[static_cast<std::size_t>(leaving)] = entering;
      ++pivots;
    }
  }

 private:
  Matrix<Scalar> t_;
};

}  // namespace detail

/// Two-phase dense tableau simplex. Intended for desk-scale programs (a few
/// hundred variables); every pivot touches the whole tableau.
template <typename Scalar>
LpSolution<Scalar> solve_lp(const LinearProgram<Scalar>& lp,
                            const SimplexOptions<Scalar>& options = {}) {
  const Eigen::Index n = lp.objective.size();
  const Eigen::Index m_ub = lp.A_ub.rows();
  const Eigen::Index m_eq = lp.A_eq.rows();
  if ((m_ub > 0 && (lp.A_ub.cols() != n || lp.b_ub.size() != m_ub)) ||
      (m_eq > 0 && (lp.A_eq.cols() != n || lp.b_eq.size() != m_eq))) {
    throw std::invalid_argument("linear program dimensions are inconsistent");
  }
  const Eigen::Index m = m_ub + m_eq;

  // Column layout: x (n) | slacks (m_ub) | artificials (one per row needing one).
  std::vector<bool> needs_artificial(static_cast<std::size_t>(m), false);
  Eigen::Index artificial_count = 0;
  for (Eigen::Index i = 0; i < m_ub; ++i) {
    if (lp.b_ub(i) < 0) {
      needs_artificial[static_cast<std::size_t>(i)] = true;
      ++artificial_count;
    }
  }
  for (Eigen::Index i = 0; i < m_eq; ++i) {
    needs_artificial[static_cast<std::size_t>(m_ub + i)] = true;
    ++artificial_count;
  }
  const Eigen::Index first_artificial = n + m_ub;
  const Eigen::Index cols = first_artificial + artificial_count;

  detail::Tableau<Scalar> tab(m, cols);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  Eigen::Index next_artificial = first_artificial;
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool is_ub = i < m_ub;
    Scalar sign = 1;
    if (is_ub) {
      sign = lp.b_ub(i) < 0 ? Scalar(-1) : Scalar(1);
      tab.row(i).head(n) = sign * lp.A_ub.row(i);
      tab.at(i, n + i) = sign;
      tab.rhs(i) = sign * lp.b_ub(i);
    } else {
      const Eigen::Index k = i - m_ub;
      sign = lp.b_eq(k) < 0 ? Scalar(-1) : Scalar(1);
      tab.row(i).head(n) = sign * lp.A_eq.row(k);
      tab.rhs(i) = sign * lp.b_eq(k);
    }
    if (needs_artificial[static_cast<std::size_t>(i)]) {
      tab.at(i, next_artificial) = 1;
      basis[static_cast<std::size_t>(i)] = next_artificial++;
    } else {
      basis[static_cast<std::size_t>(i)] = n + i;
    }
  }

  LpSolution<Scalar> solution;
  std::vector<bool> blocked(static_cast<std::size_t>(cols), false);

  if (artificial_count > 0) {
    for (Eigen::Index j = first_artificial; j < cols; ++j) tab.cost(j) = 1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (basis[static_cast<std::size_t>(i)] >= first_artificial) tab.row(m) -= tab.row(i);
    }
    const LpStatus phase1 = tab.run(basis, blocked, options, solution.pivots);
    if (phase1 == LpStatus::kIterationLimit) {
      solution.status = phase1;
      return solution;
    }
    Scalar rhs_scale = 1;
    for (Eigen::Index i = 0; i < m; ++i) rhs_scale = std::max(rhs_scale, std::abs(tab.rhs(i)));
    if (-tab.objective_cell() > options.tolerance * rhs_scale * Scalar(10)) {
      solution.status = LpStatus::kInfeasible;
      return solution;
    }
    // Drive zero-level artificials out of the basis where possible; rows
    // where that fails are redundant and stay inert.
    for (Eigen::Index i = 0; i < m; ++i) {
      if (basis[static_cast<std::size_t>(i)] < first_artificial) continue;
      for (Eigen::Index j = 0; j < first_artificial; ++j) {
        if (std::abs(tab.at(i, j)) > options.tolerance) {
          tab.pivot(i, j);
          basis[static_cast<std::size_t>(i)] = j;
          break;
        }
      }
    }
    for (Eigen::Index j = first_artificial; j < cols; ++j) blocked[static_cast<std::size_t>(j)] = true;
  }

  tab.row(m).setZero();
  for (Eigen::Index j = 0; j < n; ++j) tab.cost(j) = lp.objective(j);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index b = basis[static_cast<std::size_t>(i)];
    const Scalar d = tab.cost(b);
    if (d != 0) tab.row(m) -= d * tab.row(i);
  }
  solution.status = tab.run(basis, blocked, options, solution.pivots);
  if (solution.status != LpStatus::kOptimal) return solution;

  solution.x = Vector<Scalar>::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index b = basis[static_cast<std::size_t>(i)];
    if (b < n) solution.x(b) = std::max(Scalar(0), tab.rhs(i));
  }
  solution.objective = lp.objective.dot(solution.x);
  return solution;
}

}  // namespace olac

#endif  // OLAC_SIMPLEX_HPP
