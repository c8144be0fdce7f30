// Finite-vertical shrinking of grid models. A saturation step closes a set
// of verticals under difference-diamond witness demands at one instant; the
// shrinker seeds with the root's vertical, threads the closure through the
// instants in temporal order, and restricts the model, preserving the truth
// of every subformula at every surviving point within an |X| + 2|sub|
// per-step growth bound.
#pragma once

#include "bimodal/formula.hpp"
#include "bimodal/model.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bimodal {

struct ClosureTrace {
  // The demand set: every subformula of the target, children before parents.
  std::vector<Formula> subformulas;
  // Surviving verticals per instant, ascending; product carriers force the
  // later sets onto every column, expanding carriers keep them per column.
  std::vector<std::vector<uint32_t>> sets;
  // Set sizes before and after each closure step, in instant order.
  std::vector<std::pair<uint32_t, uint32_t>> steps;

  // The growth cap a step starting from x_size verticals must respect.
  uint32_t bound(uint32_t x_size) const;

  std::string dump() const;  // text rendering for audit
};

// Least superset of X closed under witness demands at column n: whenever a
// member x satisfies <1>psi there, for psi under a difference diamond among
// phi's subformulas, some other member satisfies psi at the same instant.
// Saturation adds the least missing vertical per unsatisfied demand, so the
// result is deterministic and grows by at most two verticals per demand
// formula. X must list verticals present in column n; the column's vertical
// relation must be a difference relation, or Error is thrown (a witness
// demand could otherwise be unsatisfiable).
std::vector<uint32_t> closure_step(const Model& m, uint32_t n,
                                   const std::vector<uint32_t>& X, Formula phi);

// Restricts m to the closure-threaded verticals: instant 0 closes the
// root's vertical alone, instant t+1 closes instant t's result. Product
// models keep the final set on every column; expanding models keep the
// per-instant sets. The horizontal frame must be a finite strict linear
// order, verticals difference relations, and on expanding carriers the root
// must sit on the first instant. Truth of every subformula of phi at every
// surviving point is re-checked against m and the per-step growth bound is
// asserted; violations throw Error.
Model shrink(const Model& m, Formula phi, uint32_t root,
             ClosureTrace* trace = nullptr);

}  // namespace bimodal
