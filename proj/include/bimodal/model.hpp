// Models over 2-frames: a valuation (variable -> set of worlds), an optional
// designated root, and the model half of the text format. The frame half
// lives in frames.hpp; print_model/parse_model compose the two.
#pragma once

#include "bimodal/frames.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bimodal {

struct Model {
  TwoFrame frame;
  bool has_meta = false;
  GridMeta meta;  // grid coordinates, when the frame was built as one
  std::map<std::string, Bits> valuation;
  std::optional<uint32_t> root;

  // Replaces the valuation of `name` with the given worlds. Throws Error on
  // an out-of-range world index.
  void set_val(const std::string& name, const std::vector<uint32_t>& worlds);

  // Worlds where `name` holds; absent names denote the empty set.
  Bits val(const std::string& name) const;
};

// Text format, appended to the frame lines:
//   val NAME: id id ...
//   root: id
void print_model(std::ostream& os, const Model& m);
std::string print_model(const Model& m);
Model parse_model(const std::string& text);

}  // namespace bimodal
