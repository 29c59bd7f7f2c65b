// Copyright 2026 The multimatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "multimatch/ip.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "multimatch/errors.hpp"

namespace multimatch {
namespace {

constexpr double kEps = 1e-9;      // pivot and reduced-cost tolerance
constexpr double kFeasTol = 1e-7;  // row feasibility
constexpr double kIntTol = 1e-6;   // integrality
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kRefactorEvery = 128;

// Equality-form program: structural columns first, then one slack per
// inequality row, then artificials appended by the solver as needed.
struct EqForm {
  int n_struct = 0;
  int m = 0;
  std::vector<std::vector<std::pair<int, double>>> cols;  // row, coefficient
  std::vector<double> rhs;
  std::vector<double> lo, up;       // per column
  std::vector<double> obj;          // phase-2 objective per column
  bool constant_infeasible = false; // an empty row contradicts its rhs
};

std::vector<std::pair<int, double>> merged_terms(const LinearConstraint& c, int n_vars) {
  std::vector<std::pair<int, double>> terms = c.terms;
  for (const auto& [var, coef] : terms) {
    if (var < 0 || var >= n_vars)
      throw config_error("constraint '" + c.name + "' references variable " +
                         std::to_string(var) + " outside 0.." + std::to_string(n_vars - 1));
    if (!std::isfinite(coef))
      throw config_error("constraint '" + c.name + "' has a non-finite coefficient");
  }
  std::sort(terms.begin(), terms.end());
  std::vector<std::pair<int, double>> out;
  for (const auto& [var, coef] : terms) {
    if (!out.empty() && out.back().first == var)
      out.back().second += coef;
    else
      out.emplace_back(var, coef);
  }
  std::erase_if(out, [](const auto& t) { return t.second == 0.0; });
  return out;
}

EqForm build_eqform(const IntegerProgram& program) {
  if (static_cast<int>(program.objective.size()) != program.n_vars &&
      !program.objective.empty())
    throw config_error("objective length does not match the variable count");
  EqForm eq;
  eq.n_struct = program.n_vars;
  eq.cols.resize(program.n_vars);
  eq.obj.assign(program.n_vars, 0.0);
  for (int j = 0; j < static_cast<int>(program.objective.size()); ++j) {
    if (!std::isfinite(program.objective[j]))
      throw config_error("objective has a non-finite coefficient");
    eq.obj[j] = program.objective[j];
  }
  eq.lo.assign(program.n_vars, 0.0);
  eq.up.assign(program.n_vars, 1.0);

  for (const auto& con : program.constraints) {
    if (!std::isfinite(con.rhs))
      throw config_error("constraint '" + con.name + "' has a non-finite rhs");
    auto terms = merged_terms(con, program.n_vars);
    if (terms.empty()) {
      bool ok = (con.rel == Relation::le && 0 <= con.rhs + kFeasTol) ||
                (con.rel == Relation::ge && 0 >= con.rhs - kFeasTol) ||
                (con.rel == Relation::eq && std::abs(con.rhs) <= kFeasTol);
      if (!ok) eq.constant_infeasible = true;
      continue;  // presolve: empty rows carry no information beyond this
    }
    int row = eq.m++;
    for (const auto& [var, coef] : terms) eq.cols[var].emplace_back(row, coef);
    eq.rhs.push_back(con.rhs);
    if (con.rel != Relation::eq) {
      eq.cols.push_back({{row, con.rel == Relation::le ? 1.0 : -1.0}});
      eq.lo.push_back(0.0);
      eq.up.push_back(kInf);
      eq.obj.push_back(0.0);
    }
  }
  return eq;
}

enum class VarState : char { at_lower, at_upper, basic };

// Bounded-variable revised simplex over a dense basis inverse. One
// instance solves both phases; bounds may pin structural variables for
// branch-and-bound nodes.
class Simplex {
 public:
  Simplex(const EqForm& eq, const std::vector<double>& struct_lo,
          const std::vector<double>& struct_up)
      : m_(eq.m), cols_(eq.cols), rhs_(eq.rhs), lo_(eq.lo), up_(eq.up) {
    for (int j = 0; j < eq.n_struct; ++j) {
      lo_[j] = struct_lo[j];
      up_[j] = struct_up[j];
    }
    n_ = static_cast<int>(cols_.size());
    state_.assign(n_, VarState::at_lower);
    basis_.assign(m_, -1);

    // Initial point: everything at its lower bound. Rows whose slack can
    // absorb the residual start with the slack basic; the rest get a
    // signed artificial.
    std::vector<double> residual = rhs_;
    for (int j = 0; j < n_; ++j)
      if (lo_[j] != 0.0)
        for (const auto& [row, coef] : cols_[j]) residual[row] -= coef * lo_[j];
    std::vector<int> slack_of(m_, -1);
    for (int j = eq.n_struct; j < n_; ++j) slack_of[cols_[j][0].first] = j;

    x_basic_.assign(m_, 0.0);
    for (int row = 0; row < m_; ++row) {
      int s = slack_of[row];
      double sign = s >= 0 ? cols_[s][0].second : 0.0;
      if (s >= 0 && residual[row] * sign >= 0) {
        basis_[row] = s;
        state_[s] = VarState::basic;
        x_basic_[row] = residual[row] * sign;  // sign is +-1
      } else {
        int art = n_++;
        cols_.push_back({{row, residual[row] >= 0 ? 1.0 : -1.0}});
        lo_.push_back(0.0);
        up_.push_back(kInf);
        state_.push_back(VarState::basic);
        artificials_.push_back(art);
        basis_[row] = art;
        x_basic_[row] = std::abs(residual[row]);
      }
    }
    binv_.assign(static_cast<size_t>(m_) * m_, 0.0);
    refactorize();
  }

  // Returns false when the program is infeasible.
  bool solve(const std::vector<double>& phase2_obj) {
    if (!artificials_.empty()) {
      std::vector<double> phase1(n_, 0.0);
      for (int a : artificials_) phase1[a] = -1.0;
      iterate(phase1);
      double infeas = 0;
      for (int a : artificials_)
        infeas += (state_[a] == VarState::basic) ? basic_value(a) : value_at_bound(a);
      if (infeas > kFeasTol) return false;
      for (int a : artificials_) up_[a] = 0.0;  // never readmitted
    }
    std::vector<double> obj(n_, 0.0);
    std::copy(phase2_obj.begin(), phase2_obj.end(), obj.begin());
    iterate(obj);
    return true;
  }

  double value(int j) const {
    return state_[j] == VarState::basic ? basic_value(j) : value_at_bound(j);
  }

 private:
  double value_at_bound(int j) const {
    return state_[j] == VarState::at_lower ? lo_[j] : up_[j];
  }

  double basic_value(int j) const {
    for (int row = 0; row < m_; ++row)
      if (basis_[row] == j) return x_basic_[row];
    return 0.0;
  }

  void refactorize() {
    // Gauss-Jordan inversion of the basis matrix with partial pivoting.
    std::vector<double> a(static_cast<size_t>(m_) * m_, 0.0);
    std::fill(binv_.begin(), binv_.end(), 0.0);
    for (int i = 0; i < m_; ++i) binv_[static_cast<size_t>(i) * m_ + i] = 1.0;
    for (int p = 0; p < m_; ++p)
      for (const auto& [row, coef] : cols_[basis_[p]])
        a[static_cast<size_t>(row) * m_ + p] = coef;
    for (int col = 0; col < m_; ++col) {
      int piv = col;
      for (int row = col + 1; row < m_; ++row)
        if (std::abs(a[static_cast<size_t>(row) * m_ + col]) >
            std::abs(a[static_cast<size_t>(piv) * m_ + col]))
          piv = row;
      double pval = a[static_cast<size_t>(piv) * m_ + col];
      if (std::abs(pval) < 1e-12) throw std::runtime_error("singular simplex basis");
      if (piv != col) {
        for (int k = 0; k < m_; ++k) {
          std::swap(a[static_cast<size_t>(piv) * m_ + k],
                    a[static_cast<size_t>(col) * m_ + k]);
          std::swap(binv_[static_cast<size_t>(piv) * m_ + k],
                    binv_[static_cast<size_t>(col) * m_ + k]);
        }
      }
      double inv = 1.0 / a[static_cast<size_t>(col) * m_ + col];
      for (int k = 0; k < m_; ++k) {
        a[static_cast<size_t>(col) * m_ + k] *= inv;
        binv_[static_cast<size_t>(col) * m_ + k] *= inv;
      }
      for (int row = 0; row < m_; ++row) {
        if (row == col) continue;
        double f = a[static_cast<size_t>(row) * m_ + col];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          a[static_cast<size_t>(row) * m_ + k] -=
              f * a[static_cast<size_t>(col) * m_ + k];
          binv_[static_cast<size_t>(row) * m_ + k] -=
              f * binv_[static_cast<size_t>(col) * m_ + k];
        }
      }
    }
    recompute_basics();
    pivots_since_refactor_ = 0;
  }

  void recompute_basics() {
    std::vector<double> r = rhs_;
    for (int j = 0; j < n_; ++j) {
      if (state_[j] == VarState::basic) continue;
      double v = value_at_bound(j);
      if (v == 0.0) continue;
      for (const auto& [row, coef] : cols_[j]) r[row] -= coef * v;
    }
    for (int row = 0; row < m_; ++row) {
      double s = 0;
      for (int k = 0; k < m_; ++k) s += binv_[static_cast<size_t>(row) * m_ + k] * r[k];
      x_basic_[row] = s;
    }
  }

  void iterate(const std::vector<double>& obj) {
    std::vector<double> y(m_), w(m_);
    bool bland = false;
    int degenerate_streak = 0;
    long max_iters = 20000 + 200L * (m_ + n_);
    for (long iter = 0; iter < max_iters; ++iter) {
      if (pivots_since_refactor_ >= kRefactorEvery) refactorize();
      // Duals y = c_B B^-1.
      std::fill(y.begin(), y.end(), 0.0);
      for (int row = 0; row < m_; ++row) {
        double cb = obj[basis_[row]];
        if (cb == 0.0) continue;
        const double* brow = &binv_[static_cast<size_t>(row) * m_];
        for (int k = 0; k < m_; ++k) y[k] += cb * brow[k];
      }
      // Pricing: Dantzig by default, Bland under degeneracy.
      int enter = -1;
      double best = kEps;
      for (int j = 0; j < n_; ++j) {
        if (state_[j] == VarState::basic || lo_[j] == up_[j]) continue;
        double d = obj[j];
        for (const auto& [row, coef] : cols_[j]) d -= y[row] * coef;
        double viol = state_[j] == VarState::at_lower ? d : -d;
        if (viol > best) {
          enter = j;
          if (bland) break;
          best = viol;
        }
      }
      if (enter < 0) return;  // optimal for this objective

      // Direction w = B^-1 A_enter; basic values move by -theta*dir*w.
      std::fill(w.begin(), w.end(), 0.0);
      for (const auto& [row, coef] : cols_[enter])
        for (int i = 0; i < m_; ++i)
          w[i] += binv_[static_cast<size_t>(i) * m_ + row] * coef;
      double dir = state_[enter] == VarState::at_lower ? 1.0 : -1.0;

      double theta = up_[enter] - lo_[enter];  // bound-flip limit
      int leave = -1;
      bool leave_to_upper = false;
      double leave_step = 0;
      for (int i = 0; i < m_; ++i) {
        double delta = dir * w[i];
        int bj = basis_[i];
        double lim;
        bool to_upper;
        if (delta > kEps) {
          lim = (x_basic_[i] - lo_[bj]) / delta;
          to_upper = false;
        } else if (delta < -kEps && up_[bj] < kInf) {
          lim = (up_[bj] - x_basic_[i]) / (-delta);
          to_upper = true;
        } else {
          continue;
        }
        if (lim < 0) lim = 0;
        // Tie-break on the largest pivot magnitude for stability.
        if (lim < theta - kEps ||
            (leave >= 0 && lim < theta + kEps && std::abs(delta) > leave_step)) {
          theta = lim;
          leave = i;
          leave_to_upper = to_upper;
          leave_step = std::abs(delta);
        }
      }
      if (theta >= kInf) throw std::runtime_error("simplex direction unbounded");

      if (theta > kEps) {
        degenerate_streak = 0;
        bland = false;
      } else if (++degenerate_streak > 2 * (m_ + 1) + 32) {
        bland = true;
      }

      for (int i = 0; i < m_; ++i) x_basic_[i] -= theta * dir * w[i];
      if (leave < 0) {
        state_[enter] = state_[enter] == VarState::at_lower ? VarState::at_upper
                                                            : VarState::at_lower;
        continue;
      }
      int old = basis_[leave];
      state_[old] = leave_to_upper ? VarState::at_upper : VarState::at_lower;
      basis_[leave] = enter;
      state_[enter] = VarState::basic;
      x_basic_[leave] =
          dir > 0 ? lo_[enter] + theta : up_[enter] - theta;

      double piv = w[leave];
      double* prow = &binv_[static_cast<size_t>(leave) * m_];
      for (int k = 0; k < m_; ++k) prow[k] /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i == leave) continue;
        double f = w[i];
        if (f == 0.0) continue;
        double* irow = &binv_[static_cast<size_t>(i) * m_];
        for (int k = 0; k < m_; ++k) irow[k] -= f * prow[k];
      }
      ++pivots_since_refactor_;
    }
    throw std::runtime_error("simplex iteration limit exceeded");
  }

  int m_, n_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> rhs_, lo_, up_;
  std::vector<VarState> state_;
  std::vector<int> basis_, artificials_;
  std::vector<double> binv_, x_basic_;
  int pivots_since_refactor_ = 0;
};

struct LpOutcome {
  bool feasible = false;
  double objective = 0;
  std::vector<double> x;
};

LpOutcome lp_solve_bounded(const EqForm& eq, const std::vector<double>& lo,
                           const std::vector<double>& up) {
  LpOutcome out;
  for (int j = 0; j < eq.n_struct; ++j)
    if (lo[j] > up[j]) return out;
  if (eq.constant_infeasible) return out;
  Simplex simplex(eq, lo, up);
  std::vector<double> obj(eq.n_struct);
  std::copy(eq.obj.begin(), eq.obj.begin() + eq.n_struct, obj.begin());
  obj.resize(eq.cols.size(), 0.0);
  if (!simplex.solve(obj)) return out;
  out.feasible = true;
  out.x.resize(eq.n_struct);
  for (int j = 0; j < eq.n_struct; ++j) {
    double v = simplex.value(j);
    v = std::min(std::max(v, lo[j]), up[j]);  // shave solver noise
    if (std::abs(v - std::round(v)) < kIntTol) v = std::round(v);
    out.x[j] = v;
    out.objective += eq.obj[j] * v;
  }
  return out;
}

bool integral(const std::vector<double>& x) {
  for (double v : x)
    if (std::abs(v - std::round(v)) > kIntTol) return false;
  return true;
}

std::vector<double> snapped(const std::vector<double>& x) {
  std::vector<double> out(x.size());
  for (size_t j = 0; j < x.size(); ++j) out[j] = std::round(x[j]);
  return out;
}

double objective_of(const IntegerProgram& program, const std::vector<double>& x) {
  double s = 0;
  for (size_t j = 0; j < program.objective.size(); ++j) s += program.objective[j] * x[j];
  return s;
}

// Rounds an LP point to a feasible binary point: integral coordinates are
// kept, fractional ones are zeroed and then tried at 1 in decreasing
// LP-value order. Returns false when no feasible point results.
bool round_point(const IntegerProgram& program, const std::vector<double>& lp_x,
                 std::vector<double>* out) {
  std::vector<double> x = lp_x;
  std::vector<std::pair<double, int>> fractional;
  for (int j = 0; j < program.n_vars; ++j) {
    if (std::abs(x[j] - std::round(x[j])) > kIntTol) {
      fractional.emplace_back(-x[j], j);  // sort descending by LP value
      x[j] = 0.0;
    } else {
      x[j] = std::round(x[j]);
    }
  }
  std::stable_sort(fractional.begin(), fractional.end());
  if (!program.feasible_point(x, kIntTol)) {
    std::fill(x.begin(), x.end(), 0.0);
    if (!program.feasible_point(x, kIntTol)) return false;
  }
  for (const auto& [neg_value, j] : fractional) {
    x[j] = 1.0;
    if (!program.feasible_point(x, kIntTol)) x[j] = 0.0;
  }
  *out = std::move(x);
  return true;
}

}  // namespace

double LinearConstraint::evaluate(const std::vector<double>& x) const {
  double s = 0;
  for (const auto& [var, coef] : terms) s += coef * x[var];
  return s;
}

bool LinearConstraint::satisfied(const std::vector<double>& x, double tol) const {
  double v = evaluate(x);
  switch (rel) {
    case Relation::le: return v <= rhs + tol;
    case Relation::ge: return v >= rhs - tol;
    case Relation::eq: return std::abs(v - rhs) <= tol;
  }
  return false;
}

bool IntegerProgram::feasible_point(const std::vector<double>& x, double tol) const {
  for (const auto& con : constraints)
    if (!con.satisfied(x, tol)) return false;
  return true;
}

Solution solve_lp(const IntegerProgram& program) {
  EqForm eq = build_eqform(program);
  std::vector<double> lo(program.n_vars, 0.0), up(program.n_vars, 1.0);
  LpOutcome lp = lp_solve_bounded(eq, lo, up);
  Solution sol;
  if (!lp.feasible) {
    sol.status = SolveStatus::infeasible;
    return sol;
  }
  sol.values = std::move(lp.x);
  sol.objective_value = lp.objective;
  sol.status = integral(sol.values) ? SolveStatus::optimal : SolveStatus::fractional;
  return sol;
}

Solution relax_and_round(const IntegerProgram& program) {
  Solution lp = solve_lp(program);
  if (lp.status == SolveStatus::infeasible) return lp;

  std::vector<double> x;
  if (!round_point(program, lp.values, &x)) {
    Solution sol;
    sol.status = SolveStatus::infeasible_unproven;
    return sol;
  }
  Solution sol;
  sol.values = x;
  sol.objective_value = objective_of(program, x);
  sol.bound_gap = std::max(0.0, lp.objective_value - sol.objective_value);
  sol.status = sol.bound_gap <= kEps ? SolveStatus::optimal : SolveStatus::feasible;
  return sol;
}

Solution solve_ip(const IntegerProgram& program, const SolveOptions& options) {
  auto start = std::chrono::steady_clock::now();
  auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  EqForm eq = build_eqform(program);

  // An all-integer objective lets LP bounds round down to the nearest
  // integer, which usually closes the gap at the root.
  bool integral_objective = true;
  for (double c : program.objective)
    if (std::abs(c - std::round(c)) > 1e-12) integral_objective = false;
  auto tighten = [integral_objective](double bound) {
    if (!integral_objective || !std::isfinite(bound)) return bound;
    return std::floor(bound + 1e-6);
  };

  struct Node {
    double bound;
    long id;
    std::vector<int8_t> fixed;  // -1 free, 0 or 1 pinned
  };
  // Best bound first; ties go to the newest node so the search dives
  // toward integral points instead of sweeping a degenerate plateau.
  auto worse = [](const Node& a, const Node& b) {
    return a.bound < b.bound || (a.bound == b.bound && a.id < b.id);
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  long next_id = 0;
  open.push({kInf, next_id++, std::vector<int8_t>(program.n_vars, -1)});

  Solution best;
  best.status = SolveStatus::infeasible;
  bool have_incumbent = false;
  double incumbent = -kInf;
  long nodes = 0;
  bool limits_hit = false;

  std::vector<double> lo(program.n_vars), up(program.n_vars);
  while (!open.empty()) {
    if (have_incumbent && open.top().bound <= incumbent + kEps) break;  // tree exhausted
    if (options.time_limit_seconds > 0 && elapsed() > options.time_limit_seconds) {
      limits_hit = true;
      best.timed_out = true;
      break;
    }
    if (options.node_limit > 0 && nodes >= options.node_limit) {
      limits_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    ++nodes;

    for (int j = 0; j < program.n_vars; ++j) {
      lo[j] = node.fixed[j] == 1 ? 1.0 : 0.0;
      up[j] = node.fixed[j] == 0 ? 0.0 : 1.0;
    }
    LpOutcome lp = lp_solve_bounded(eq, lo, up);
    if (!lp.feasible) continue;
    double bound = tighten(lp.objective);
    if (have_incumbent && bound <= incumbent + kEps) continue;

    if (integral(lp.x)) {
      std::vector<double> x = snapped(lp.x);
      if (program.feasible_point(x, kIntTol)) {
        double obj = objective_of(program, x);
        if (!have_incumbent || obj > incumbent) {
          incumbent = obj;
          have_incumbent = true;
          best.values = std::move(x);
          best.objective_value = obj;
        }
        continue;
      }
    } else {
      // Rounding the node relaxation keeps a good incumbent available,
      // so plateaus of equal bounds prune instead of expanding.
      std::vector<double> rounded;
      if (round_point(program, lp.x, &rounded)) {
        double obj = objective_of(program, rounded);
        if (!have_incumbent || obj > incumbent) {
          incumbent = obj;
          have_incumbent = true;
          best.values = std::move(rounded);
          best.objective_value = obj;
        }
        if (have_incumbent && bound <= incumbent + kEps) continue;
      }
    }
    // Branch on the most fractional coordinate.
    int branch = -1;
    double score = kInf;
    for (int j = 0; j < program.n_vars; ++j) {
      if (node.fixed[j] != -1) continue;
      double frac = std::abs(lp.x[j] - std::round(lp.x[j]));
      if (frac <= kIntTol) continue;
      double s = std::abs(lp.x[j] - 0.5);
      if (s < score) {
        score = s;
        branch = j;
      }
    }
    if (branch < 0) {
      // Integral in the free coordinates but rejected by the exact check:
      // fall back to any free variable; with none, the node is a dead end.
      for (int j = 0; j < program.n_vars && branch < 0; ++j)
        if (node.fixed[j] == -1) branch = j;
      if (branch < 0) continue;
    }
    for (int8_t v : {static_cast<int8_t>(1), static_cast<int8_t>(0)}) {
      Node child{bound, next_id++, node.fixed};
      child.fixed[branch] = v;
      open.push(std::move(child));
    }
    if (have_incumbent && options.gap_tolerance > 0 && !open.empty() &&
        open.top().bound - incumbent <= options.gap_tolerance) {
      limits_hit = true;
      break;
    }
  }

  best.nodes = nodes;
  if (!have_incumbent) {
    best.status = limits_hit ? SolveStatus::infeasible_unproven : SolveStatus::infeasible;
    return best;
  }
  double upper = incumbent;
  if (limits_hit && !open.empty()) upper = std::max(upper, open.top().bound);
  best.bound_gap = std::max(0.0, upper - incumbent);
  best.status = (limits_hit && best.bound_gap > kEps) ? SolveStatus::feasible
                                                      : SolveStatus::optimal;
  if (best.status == SolveStatus::optimal) best.bound_gap = 0;
  return best;
}

void write_lp_format(const IntegerProgram& program, std::ostream& out) {
  out << "max:";
  for (int j = 0; j < program.n_vars; ++j) {
    double c = j < static_cast<int>(program.objective.size()) ? program.objective[j] : 0.0;
    if (c == 0.0) continue;
    out << (c > 0 ? " + " : " - ") << std::abs(c) << " x" << j;
  }
  out << "\n";
  int r = 0;
  for (const auto& con : program.constraints) {
    out << (con.name.empty() ? "r" + std::to_string(r) : con.name) << ":";
    for (const auto& [var, coef] : con.terms)
      out << (coef >= 0 ? " + " : " - ") << std::abs(coef) << " x" << var;
    switch (con.rel) {
      case Relation::le: out << " <= "; break;
      case Relation::ge: out << " >= "; break;
      case Relation::eq: out << " = "; break;
    }
    out << con.rhs << "\n";
    ++r;
  }
  out << "binary:";
  for (int j = 0; j < program.n_vars; ++j) out << " x" << j;
  out << "\n";
}

}  // namespace multimatch
