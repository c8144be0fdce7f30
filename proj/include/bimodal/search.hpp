// Bounded satisfiability search: enumerate candidate 2-frames of a class in
// size-lexicographic order and search valuations over the formula's
// variables with a three-valued backtracker that only branches on bits the
// evaluation actually touches. Never claims unsatisfiability: a miss is an
// exhaustion report relative to the bounds.
#pragma once

#include "bimodal/formula.hpp"
#include "bimodal/model.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace bimodal {

enum class FrameClass : uint8_t {
  Product,          // finite linear order x finite difference frame
  Expanding,        // linear base, difference domains growing along it
  Decreasing,       // linear base, difference domains shrinking along it
  ExpandingLinear,  // linear base, linear-order domains growing along it
  OmegaChain,       // truncated reversed omega+1 chain x finite difference
  Commuting,        // all commuting confluent 2-frames up to a world count
};

// CLI names: product, expanding, decreasing, expanding-linear, omega-chain,
// commuting. Throws ParseError on anything else.
const char* frame_class_name(FrameClass c);
FrameClass frame_class_from_name(const std::string& name);

struct SearchSpec {
  FrameClass frame_class = FrameClass::Product;
  // Horizontal cap: columns for the grid classes, chain depth for the
  // omega chain, total worlds for the commuting class (vertical ignored).
  uint32_t max_h = 1;
  uint32_t max_v = 1;
  Formula formula;
  uint64_t max_candidates = 1u << 20;  // frames examined before BudgetError
  uint64_t max_millis = 0;             // wall clock cap; 0 means none
};

struct SearchResult {
  bool found = false;
  Model model;         // carries grid coordinates when the class is a grid
  uint32_t world = 0;  // witness world, the model's root
  uint64_t candidates = 0;  // frames examined
  uint64_t millis = 0;
  std::string report;  // deterministic text: outcome, class, bounds, count
};

// Enumerates frames by total world count (ties broken lexicographically),
// searching each for a valuation of the formula's variables that makes it
// hold somewhere. Returns the first hit with the witness as root, or the
// exhaustion report. Identical specs produce identical results. Throws
// BudgetError when the candidate or wall-clock budget runs out (distinct
// from exhausting the bounds), Error on invalid bounds.
SearchResult bounded_sat(const SearchSpec& spec);

}  // namespace bimodal
