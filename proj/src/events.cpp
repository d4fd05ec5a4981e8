#include "supdtl/events.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "supdtl/error.hpp"
#include "supdtl/normal.hpp"

namespace supdtl {
namespace {

using Bounds = std::vector<Bound>;

bool is_empty(const Bound& b) { return !(b.lower < b.upper); }
bool is_free(const Bound& b) { return b.lower == -kInf && b.upper == kInf; }

void check_capacity(const TrialDesign& design, const EnumerationOptions& opts) {
  design.validate();
  if (design.arms > opts.max_arms) {
    throw CapacityError("event enumeration supports at most " + std::to_string(opts.max_arms) +
                        " arms, got " + std::to_string(design.arms));
  }
}

void check_effects(const TrialDesign& design, const EffectConfig& effects) {
  if (effects.deltas.size() != static_cast<std::size_t>(design.arms)) {
    throw InputError("effects: expected " + std::to_string(design.arms) + " deltas");
  }
}

// Every ordered selection of `length` distinct arms from `pool`.
void for_each_order(const std::vector<int>& pool, int length,
                    const std::function<void(const DropOrder&)>& fn) {
  DropOrder order;
  std::vector<bool> used(pool.size(), false);
  std::function<void()> rec = [&] {
    if (static_cast<int>(order.size()) == length) {
      fn(order);
      return;
    }
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      order.push_back(pool[i]);
      rec();
      order.pop_back();
      used[i] = false;
    }
  };
  rec();
}

std::vector<int> arms_except(int arms, int excluded) {
  std::vector<int> out;
  for (int k = 1; k <= arms; ++k) {
    if (k != excluded) out.push_back(k);
  }
  return out;
}

// Skeleton of one drop order: the pairwise comparisons that make m_i the
// minimum at stage i, and the survivors after each drop.
struct Path {
  Bounds drops;
  std::vector<std::vector<int>> survivors;  // survivors[i - 1] after the stage-i drop
};

Path build_path(int arms, const DropOrder& order) {
  Path p;
  std::vector<int> active = arms_except(arms, 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int stage = static_cast<int>(i) + 1;
    const int m = order[i];
    for (int k : active) {
      if (k != m) p.drops.push_back({StatCoord::difference(k, m, stage), 0.0, kInf});
    }
    std::erase(active, m);
    p.survivors.push_back(active);
  }
  return p;
}

// Disjoint rectangles covering "not every survivor crossed u at this stage":
// the t-th piece has the first t survivors above u and the next one below.
std::vector<Bounds> no_stop_pieces(const std::vector<int>& survivors, int stage, double u) {
  std::vector<Bounds> pieces;
  for (std::size_t t = 0; t < survivors.size(); ++t) {
    Bounds piece;
    for (std::size_t s = 0; s < t; ++s) {
      piece.push_back({StatCoord::single(survivors[s], stage), u, kInf});
    }
    piece.push_back({StatCoord::single(survivors[t], stage), -kInf, u});
    if (std::none_of(piece.begin(), piece.end(), is_empty)) pieces.push_back(std::move(piece));
  }
  return pieces;
}

// Cartesian product of the no-stop pieces over stages 1..last_stage.
std::vector<Bounds> no_stop_product(const TrialDesign& design, const Path& path, int last_stage) {
  std::vector<Bounds> acc{{}};
  for (int i = 1; i <= last_stage; ++i) {
    const auto pieces =
        no_stop_pieces(path.survivors[i - 1], i, design.boundaries[i - 1]);
    std::vector<Bounds> next;
    for (const auto& base : acc) {
      for (const auto& piece : pieces) {
        Bounds b = base;
        b.insert(b.end(), piece.begin(), piece.end());
        next.push_back(std::move(b));
      }
    }
    acc = std::move(next);
  }
  return acc;
}

// Drops unconstrained coordinates and merges repeated ones. Returns false if
// the rectangle is empty.
bool tidy(Bounds& bounds) {
  Bounds out;
  for (const Bound& b : bounds) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const Bound& o) { return o.coord == b.coord; });
    if (it == out.end()) {
      out.push_back(b);
    } else {
      it->lower = std::max(it->lower, b.lower);
      it->upper = std::min(it->upper, b.upper);
    }
  }
  if (std::any_of(out.begin(), out.end(), is_empty)) return false;
  std::erase_if(out, is_free);
  bounds = std::move(out);
  return true;
}

mvn::OrthantProblem to_problem(const TrialDesign& design, const EffectConfig& effects,
                               const Bounds& bounds) {
  if (bounds.empty()) return {};
  std::vector<StatCoord> coords;
  std::vector<double> lo, hi;
  for (const Bound& b : bounds) {
    coords.push_back(b.coord);
    lo.push_back(b.lower);
    hi.push_back(b.upper);
  }
  return build_moment_problem(design, effects, coords, lo, hi);
}

// Groups drop orders that map onto each other under a relabeling of arms
// with exactly equal effects. The focal arm (if any) is its own class.
class OrderGrouper {
 public:
  OrderGrouper(const EffectConfig& effects, int focal, bool collapse)
      : collapse_(collapse) {
    const int arms = static_cast<int>(effects.deltas.size());
    cls_.resize(arms + 1);
    for (int k = 1; k <= arms; ++k) {
      cls_[k] = k;
      if (k == focal) {
        cls_[k] = 0;
        continue;
      }
      for (int k2 = 1; k2 < k; ++k2) {
        if (k2 != focal && effects.deltas[k2 - 1] == effects.deltas[k - 1]) {
          cls_[k] = cls_[k2];
          break;
        }
      }
    }
  }

  void add(const DropOrder& order) {
    std::vector<int> key;
    for (int m : order) key.push_back(collapse_ ? cls_[m] : m);
    auto [it, inserted] = index_.try_emplace(key, groups_.size());
    if (inserted) {
      groups_.push_back({order, 1});
    } else {
      ++groups_[it->second].second;
    }
  }

  const std::vector<std::pair<DropOrder, int>>& groups() const { return groups_; }

 private:
  bool collapse_;
  std::vector<int> cls_;
  std::map<std::vector<int>, std::size_t> index_;
  std::vector<std::pair<DropOrder, int>> groups_;
};

// Builds the terms of one stage from grouped drop orders. `finish` appends
// the stage-specific constraints for a given order.
void emit_terms(const TrialDesign& design, const EffectConfig& effects, int stage,
                const OrderGrouper& grouper,
                const std::function<void(const DropOrder&, const Path&, Bounds&)>& finish,
                EventProblemSet& out) {
  for (const auto& [order, count] : grouper.groups()) {
    const Path path = build_path(design.arms, order);
    const int no_stop_through = std::min(stage - 1, static_cast<int>(path.survivors.size()));
    for (Bounds b : no_stop_product(design, path, no_stop_through)) {
      Bounds all = path.drops;
      all.insert(all.end(), b.begin(), b.end());
      finish(order, path, all);
      if (!tidy(all)) continue;
      EventTerm term;
      term.weight = count;
      term.order = order;
      term.problem = to_problem(design, effects, all);
      term.bounds = std::move(all);
      out.terms.push_back(std::move(term));
    }
  }
}

void all_survivors_cross(const std::vector<int>& survivors, int stage, double u, Bounds& b) {
  for (int k : survivors) b.push_back({StatCoord::single(k, stage), u, kInf});
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

mvn::OrthantProblem pwer_problem(const TrialDesign& design) {
  design.validate();
  Bounds b;
  for (int j = 1; j <= design.stages; ++j) {
    b.push_back({StatCoord::single(1, j), -kInf, design.boundaries[j - 1]});
  }
  tidy(b);
  return to_problem(design, EffectConfig{std::vector<double>(design.arms, 0.0)}, b);
}

std::vector<EventProblemSet> recommend_problems(const TrialDesign& design,
                                                const EffectConfig& effects, int focal,
                                                const EnumerationOptions& opts) {
  check_capacity(design, opts);
  check_effects(design, effects);
  if (focal < 1 || focal > design.arms) throw InputError("focal arm out of range");
  const int J = design.stages;
  const auto others = arms_except(design.arms, focal);
  std::vector<EventProblemSet> sets;
  for (int j = 1; j <= J; ++j) {
    EventProblemSet set{j, {}};
    const int length = j < J ? j : J - 1;
    OrderGrouper grouper(effects, focal, opts.collapse_symmetric);
    for_each_order(others, length, [&](const DropOrder& o) { grouper.add(o); });
    const double u = design.boundaries[j - 1];
    emit_terms(design, effects, j, grouper,
               [&](const DropOrder&, const Path& path, Bounds& b) {
                 const auto& survivors = path.survivors.empty() ? std::vector<int>{focal}
                                                                : path.survivors.back();
                 if (j < J) {
                   all_survivors_cross(survivors, j, u, b);
                   for (int k : survivors) {
                     if (k != focal) b.push_back({StatCoord::difference(focal, k, j), 0.0, kInf});
                   }
                 } else {
                   b.push_back({StatCoord::single(focal, j), u, kInf});
                 }
               },
               set);
    sets.push_back(std::move(set));
  }
  return sets;
}

std::vector<EventProblemSet> power_lfc_problems(const TrialDesign& design, double theta_prime,
                                                double theta_zero,
                                                const EnumerationOptions& opts) {
  if (!(theta_prime > theta_zero)) {
    throw InputError("power under the LFC requires theta_prime > theta_zero");
  }
  EffectConfig lfc{std::vector<double>(design.arms, theta_zero)};
  if (!lfc.deltas.empty()) lfc.deltas[0] = theta_prime;
  return recommend_problems(design, lfc, 1, opts);
}

std::vector<EventProblemSet> stop_stage_problems(const TrialDesign& design,
                                                 const EffectConfig& effects,
                                                 const EnumerationOptions& opts) {
  check_capacity(design, opts);
  check_effects(design, effects);
  const int J = design.stages;
  const auto all = arms_except(design.arms, 0);
  std::vector<EventProblemSet> sets;
  for (int j = 1; j <= J; ++j) {
    EventProblemSet set{j, {}};
    const int length = j < J ? j : J - 1;
    OrderGrouper grouper(effects, 0, opts.collapse_symmetric);
    for_each_order(all, length, [&](const DropOrder& o) { grouper.add(o); });
    const double u = design.boundaries[j - 1];
    emit_terms(design, effects, j, grouper,
               [&](const DropOrder&, const Path& path, Bounds& b) {
                 if (j < J) all_survivors_cross(path.survivors.back(), j, u, b);
               },
               set);
    sets.push_back(std::move(set));
  }
  return sets;
}

std::vector<EventProblemSet> rejection_problems(const TrialDesign& design,
                                                const EffectConfig& effects, int focal,
                                                const EnumerationOptions& opts) {
  check_capacity(design, opts);
  check_effects(design, effects);
  if (focal < 1 || focal > design.arms) throw InputError("focal arm out of range");
  const int J = design.stages;
  const auto others = arms_except(design.arms, focal);
  std::vector<EventProblemSet> sets;
  for (int j = 1; j <= J; ++j) {
    EventProblemSet set{j, {}};
    const double u = design.boundaries[j - 1];
    if (j < J) {
      // Focal survives the stage-j drop and every survivor crosses.
      OrderGrouper survive(effects, focal, opts.collapse_symmetric);
      for_each_order(others, j, [&](const DropOrder& o) { survive.add(o); });
      emit_terms(design, effects, j, survive,
                 [&](const DropOrder&, const Path& path, Bounds& b) {
                   all_survivors_cross(path.survivors.back(), j, u, b);
                 },
                 set);
      // Focal is the arm dropped at stage j yet still above u when the
      // trial stops.
      OrderGrouper dropped(effects, focal, opts.collapse_symmetric);
      for_each_order(others, j - 1, [&](const DropOrder& o) {
        DropOrder full = o;
        full.push_back(focal);
        dropped.add(full);
      });
      emit_terms(design, effects, j, dropped,
                 [&](const DropOrder&, const Path& path, Bounds& b) {
                   all_survivors_cross(path.survivors.back(), j, u, b);
                   b.push_back({StatCoord::single(focal, j), u, kInf});
                 },
                 set);
    } else {
      OrderGrouper last(effects, focal, opts.collapse_symmetric);
      for_each_order(others, J - 1, [&](const DropOrder& o) { last.add(o); });
      emit_terms(design, effects, j, last,
                 [&](const DropOrder&, const Path&, Bounds& b) {
                   b.push_back({StatCoord::single(focal, j), u, kInf});
                 },
                 set);
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

std::vector<EventProblemSet> global_null_typeI_problems(const TrialDesign& design,
                                                        const EnumerationOptions& opts) {
  return rejection_problems(design, EffectConfig{std::vector<double>(design.arms, 0.0)}, 1,
                            opts);
}

double coord_value(const StatCoord& c, const ZPath& z) {
  const double a = z.at(c.arm_a - 1).at(c.stage - 1);
  if (c.kind == CoordKind::single) return a;
  return a - z.at(c.arm_b - 1).at(c.stage - 1);
}

bool term_contains(const EventTerm& term, const ZPath& z) {
  return std::all_of(term.bounds.begin(), term.bounds.end(), [&](const Bound& b) {
    const double v = coord_value(b.coord, z);
    return b.lower < v && v <= b.upper;
  });
}

StageProbabilities integrate_sets(const std::vector<EventProblemSet>& sets,
                                  double target_abs_error, std::uint64_t seed) {
  double weight_sq = 0.0;
  for (const auto& set : sets) {
    for (const auto& t : set.terms) weight_sq += static_cast<double>(t.weight) * t.weight;
  }
  const double per_term = weight_sq > 0.0 ? target_abs_error / std::sqrt(weight_sq) : target_abs_error;

  StageProbabilities out;
  double err_sq = 0.0;
  std::uint64_t index = 0;
  for (const auto& set : sets) {
    double stage_total = 0.0;
    for (const auto& t : set.terms) {
      const auto est =
          mvn::rectangle_probability(t.problem, per_term, splitmix64(seed ^ splitmix64(index++)));
      stage_total += t.weight * est.value;
      err_sq += std::pow(t.weight * est.error_bound, 2);
      out.converged = out.converged && est.converged;
    }
    out.by_stage.push_back(stage_total);
    out.total += stage_total;
  }
  out.error_bound = std::sqrt(err_sq);
  return out;
}

}  // namespace supdtl
