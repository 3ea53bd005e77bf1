#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "odflow/error.hpp"

namespace odflow::lp {

enum class Relation { LessEq, Eq, GreaterEq };

struct Constraint {
  std::vector<double> coeffs;  // one per variable; missing tail = 0
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
};

// minimize objective . x  subject to constraints and x >= 0
struct Problem {
  std::vector<double> objective;
  std::vector<Constraint> constraints;
  std::vector<std::string> names;  // optional variable names for reporting
};

enum class Status { Optimal, Infeasible, Unbounded, MaxIterations };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
    case Status::MaxIterations: return "MaxIterations";
  }
  return "Unknown";
}

struct Solution {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::map<std::string, double> variables;  // filled when names were given
  int iterations = 0;
};

namespace detail {

constexpr double kEps = 1e-9;
constexpr int kMaxIterations = 200000;

// Dense tableau.  rows[i] has one entry per column plus the rhs at the back;
// cost holds reduced costs with -objective at the back.
struct Tableau {
  std::vector<std::vector<double>> rows;
  std::vector<double> cost;
  std::vector<int> basis;  // basic variable per row
  int iterations = 0;

  std::size_t ncols() const { return cost.size() - 1; }

  void pivot(std::size_t r, std::size_t c) {
    auto& row = rows[r];
    const double inv = 1.0 / row[c];
    for (double& v : row) v *= inv;
    row[c] = 1.0;  // avoid 1-ulp drift on the pivot itself
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c] == 0.0) continue;
      const double f = rows[i][c];
      for (std::size_t j = 0; j < rows[i].size(); ++j)
        rows[i][j] -= f * row[j];
      rows[i][c] = 0.0;
    }
    if (cost[c] != 0.0) {
      const double f = cost[c];
      for (std::size_t j = 0; j < cost.size(); ++j) cost[j] -= f * row[j];
      cost[c] = 0.0;
    }
    basis[r] = static_cast<int>(c);
  }

  // Bland's rule: entering = lowest-index column with negative reduced cost;
  // leaving = min ratio, ties broken by lowest basic variable index.
  Status iterate(std::size_t usable_cols) {
    while (true) {
      if (++iterations > kMaxIterations) return Status::MaxIterations;
      std::size_t enter = usable_cols;
      for (std::size_t j = 0; j < usable_cols; ++j) {
        if (cost[j] < -kEps) {
          enter = j;
          break;
        }
      }
      if (enter == usable_cols) return Status::Optimal;

      const std::size_t rhs = ncols();
      std::size_t leave = rows.size();
      double best = 0.0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i][enter] <= kEps) continue;
        const double ratio = rows[i][rhs] / rows[i][enter];
        if (leave == rows.size() || ratio < best - kEps ||
            (ratio < best + kEps && basis[i] < basis[leave]))
          leave = i, best = ratio;
      }
      if (leave == rows.size()) return Status::Unbounded;
      pivot(leave, enter);
    }
  }
};

}  // namespace detail

inline Solution solve_lp(const Problem& problem) {
  const std::size_t n = problem.objective.size();
  const std::size_t m = problem.constraints.size();
  for (const auto& c : problem.constraints)
    if (c.coeffs.size() > n)
      throw Error(ErrorCode::DomainError,
                  "constraint has more coefficients than variables");

  // Column layout: original | slack/surplus | artificial | rhs.
  std::size_t nslack = 0;
  for (const auto& c : problem.constraints)
    if (c.rel != Relation::Eq) ++nslack;
  const std::size_t nreal = n + nslack;
  const std::size_t total = nreal + m;

  detail::Tableau t;
  t.rows.assign(m, std::vector<double>(total + 1, 0.0));
  t.basis.resize(m);
  std::size_t slack = n;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = problem.constraints[i];
    auto& row = t.rows[i];
    for (std::size_t j = 0; j < c.coeffs.size(); ++j) row[j] = c.coeffs[j];
    row[total] = c.rhs;
    if (c.rel == Relation::LessEq) row[slack++] = 1.0;
    else if (c.rel == Relation::GreaterEq) row[slack++] = -1.0;
    if (row[total] < 0.0)
      for (double& v : row) v = -v;
    row[nreal + i] = 1.0;  // artificial, basic
    t.basis[i] = static_cast<int>(nreal + i);
  }

  // Phase 1: minimize the artificial sum.  Reduced costs start at
  // c - sum(rows), where c is 1 on artificial columns and 0 elsewhere,
  // because every artificial is basic with cost 1.
  t.cost.assign(total + 1, 0.0);
  for (std::size_t j = nreal; j < total; ++j) t.cost[j] = 1.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= total; ++j) t.cost[j] -= t.rows[i][j];

  Status st = t.iterate(total);
  if (st != Status::Optimal) return {st, 0.0, {}, {}, t.iterations};
  if (-t.cost[total] > 1e-7) return {Status::Infeasible, 0.0, {}, {}, t.iterations};

  // Drive any artificial still in the basis out of it; a row with no real
  // column left is redundant and dropped.
  for (std::size_t i = 0; i < t.rows.size();) {
    if (t.basis[i] < static_cast<int>(nreal)) {
      ++i;
      continue;
    }
    std::size_t c = nreal;
    for (std::size_t j = 0; j < nreal; ++j)
      if (std::abs(t.rows[i][j]) > 1e-7) {
        c = j;
        break;
      }
    if (c < nreal) {
      t.pivot(i, c);
      ++i;
    } else {
      t.rows.erase(t.rows.begin() + static_cast<long>(i));
      t.basis.erase(t.basis.begin() + static_cast<long>(i));
    }
  }

  // Phase 2: real objective over the same tableau, artificials barred.
  t.cost.assign(total + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) t.cost[j] = problem.objective[j];
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto b = static_cast<std::size_t>(t.basis[i]);
    if (t.cost[b] == 0.0) continue;
    const double f = t.cost[b];
    for (std::size_t j = 0; j <= total; ++j) t.cost[j] -= f * t.rows[i][j];
  }
  st = t.iterate(nreal);
  if (st != Status::Optimal) return {st, 0.0, {}, {}, t.iterations};

  Solution sol;
  sol.status = Status::Optimal;
  sol.iterations = t.iterations;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    if (t.basis[i] < static_cast<int>(n))
      sol.x[static_cast<std::size_t>(t.basis[i])] = t.rows[i][total];
  for (std::size_t j = 0; j < n; ++j)
    sol.objective += problem.objective[j] * sol.x[j];
  if (!problem.names.empty()) {
    for (std::size_t j = 0; j < n && j < problem.names.size(); ++j)
      sol.variables[problem.names[j]] = sol.x[j];
  }
  return sol;
}

}  // namespace odflow::lp
