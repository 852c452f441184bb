#include "gbtx/sat_solver.h"

#include <algorithm>

namespace gbtx {

SatSolver::SatSolver(int num_vars)
    : num_vars_(num_vars),
      watches_(2 * static_cast<std::size_t>(num_vars)),
      assigns_(num_vars, -1),
      var_level_(num_vars, 0),
      reason_(num_vars, -1),
      phase_(num_vars, false),
      activity_(num_vars, 0.0),
      seen_(num_vars, false),
      model_(static_cast<std::size_t>(num_vars) + 1, false) {}

int SatSolver::AttachClause(std::vector<int> lits) {
  const int id = static_cast<int>(clauses_.size());
  watches_[Neg(lits[0])].push_back(id);
  watches_[Neg(lits[1])].push_back(id);
  clauses_.push_back(std::move(lits));
  return id;
}

bool SatSolver::AddClause(std::span<const Lit> clause) {
  if (!ok_) return false;
  CancelUntil(0);
  std::vector<int> lits;
  for (Lit lit : clause) lits.push_back(Code(lit));
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  std::vector<int> kept;
  for (std::size_t i = 0; i < lits.size(); ++i) {
    if (i + 1 < lits.size() && lits[i + 1] == Neg(lits[i]) && (lits[i] & 1) == 0)
      return true;  // tautology
    const int value = LitValue(lits[i]);
    if (value == 1) return true;
    if (value == -1) kept.push_back(lits[i]);
  }
  if (kept.empty()) return ok_ = false;
  if (kept.size() == 1) {
    Enqueue(kept[0], -1);
    return ok_ = (Propagate() < 0);
  }
  AttachClause(std::move(kept));
  return true;
}

void SatSolver::Enqueue(int code, int reason) {
  const int v = VarIndex(code);
  assigns_[v] = (code & 1) ? 0 : 1;
  var_level_[v] = level();
  reason_[v] = reason;
  trail_.push_back(code);
}

// Watch lists are keyed by the literal whose becoming true falsifies a
// watched literal, so watches_[p] holds clauses watching Neg(p).
int SatSolver::Propagate() {
  while (qhead_ < trail_.size()) {
    const int p = trail_[qhead_++];
    const int false_lit = Neg(p);
    std::vector<int>& ws = watches_[p];
    std::size_t i = 0;
    std::size_t j = 0;
    int conflict = -1;
    while (i < ws.size()) {
      const int cid = ws[i++];
      std::vector<int>& c = clauses_[cid];
      if (c[0] == false_lit) std::swap(c[0], c[1]);
      if (LitValue(c[0]) == 1) {
        ws[j++] = cid;
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (LitValue(c[k]) != 0) {
          std::swap(c[1], c[k]);
          watches_[Neg(c[1])].push_back(cid);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = cid;
      if (LitValue(c[0]) == 0) {
        conflict = cid;
        while (i < ws.size()) ws[j++] = ws[i++];
      } else {
        Enqueue(c[0], cid);
      }
    }
    ws.resize(j);
    if (conflict >= 0) return conflict;
  }
  return -1;
}

void SatSolver::Bump(int var) {
  activity_[var] += bump_;
  if (activity_[var] > 1e100) {
    for (double& a : activity_) a *= 1e-100;
    bump_ *= 1e-100;
  }
}

void SatSolver::Analyze(int conflict, std::vector<int>& learnt, int& backtrack_level) {
  learnt.assign(1, 0);
  int pending = 0;
  int p = -1;
  std::size_t index = trail_.size();
  int cid = conflict;
  do {
    const std::vector<int>& c = clauses_[cid];
    for (std::size_t k = (p == -1 ? 0 : 1); k < c.size(); ++k) {
      const int q = c[k];
      const int v = VarIndex(q);
      if (seen_[v] || var_level_[v] == 0) continue;
      seen_[v] = true;
      Bump(v);
      if (var_level_[v] >= level()) {
        ++pending;
      } else {
        learnt.push_back(q);
      }
    }
    while (!seen_[VarIndex(trail_[--index])]) {
    }
    p = trail_[index];
    cid = reason_[VarIndex(p)];
    seen_[VarIndex(p)] = false;
    --pending;
    // Reason clauses keep their implied literal in slot 0.
    if (pending > 0 && clauses_[cid][0] != p) {
      auto& rc = clauses_[cid];
      auto it = std::find(rc.begin(), rc.end(), p);
      std::iter_swap(rc.begin(), it);
    }
  } while (pending > 0);
  learnt[0] = Neg(p);
  for (std::size_t k = 1; k < learnt.size(); ++k) seen_[VarIndex(learnt[k])] = false;

  backtrack_level = 0;
  if (learnt.size() > 1) {
    std::size_t max_i = 1;
    for (std::size_t k = 2; k < learnt.size(); ++k)
      if (var_level_[VarIndex(learnt[k])] > var_level_[VarIndex(learnt[max_i])]) max_i = k;
    std::swap(learnt[1], learnt[max_i]);
    backtrack_level = var_level_[VarIndex(learnt[1])];
  }
  bump_ *= 1.05;
}

void SatSolver::CancelUntil(int target) {
  if (level() <= target) return;
  for (std::size_t i = trail_.size(); i-- > static_cast<std::size_t>(trail_lim_[target]);) {
    const int v = VarIndex(trail_[i]);
    phase_[v] = assigns_[v] == 1;
    assigns_[v] = -1;
    reason_[v] = -1;
  }
  trail_.resize(trail_lim_[target]);
  trail_lim_.resize(target);
  qhead_ = trail_.size();
}

int SatSolver::PickBranch() {
  int best = -1;
  for (int v = 0; v < num_vars_; ++v)
    if (assigns_[v] < 0 && (best < 0 || activity_[v] > activity_[best])) best = v;
  if (best < 0) return -1;
  return 2 * best + (phase_[best] ? 0 : 1);
}

bool SatSolver::Solve(std::span<const Lit> assumptions) {
  if (!ok_) return false;
  CancelUntil(0);
  std::vector<int> assumed;
  for (Lit lit : assumptions) assumed.push_back(Code(lit));
  std::vector<int> learnt;
  bool result = false;
  while (true) {
    const int conflict = Propagate();
    if (conflict >= 0) {
      ++conflicts_;
      if (level() == 0) {
        ok_ = false;
        break;
      }
      int backtrack_level = 0;
      Analyze(conflict, learnt, backtrack_level);
      CancelUntil(backtrack_level);
      if (learnt.size() == 1) {
        Enqueue(learnt[0], -1);
      } else {
        const int cid = AttachClause(learnt);
        Enqueue(clauses_[cid][0], cid);
      }
      continue;
    }
    int next = -1;
    while (level() < static_cast<int>(assumed.size())) {
      const int a = assumed[level()];
      const int value = LitValue(a);
      if (value == 1) {
        trail_lim_.push_back(static_cast<int>(trail_.size()));
      } else if (value == 0) {
        next = -2;
        break;
      } else {
        next = a;
        break;
      }
    }
    if (next == -2) break;  // assumptions conflict
    if (next == -1) {
      next = PickBranch();
      if (next < 0) {
        for (int v = 0; v < num_vars_; ++v) model_[v + 1] = assigns_[v] == 1;
        result = true;
        break;
      }
    }
    trail_lim_.push_back(static_cast<int>(trail_.size()));
    Enqueue(next, -1);
  }
  CancelUntil(0);
  return result;
}

}  // namespace gbtx
