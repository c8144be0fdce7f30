// Finite frames and 2-frames: constructions (linear, difference, truncated
// reversed omega, product, expanding/decreasing assembly), the first-order
// property checks the workbench decides, and the frame half of the text format.
#pragma once

#include "bimodal/formula.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace bimodal {

// Dynamic bitset over world indices. Valuations and subformula labellings
// live in these; the checker leans on word-level subset/intersection tests.
class Bits {
 public:
  Bits() = default;
  explicit Bits(size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  size_t size() const { return n_; }
  bool get(size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
  void set(size_t i, bool v = true) {
    if (v)
      w_[i >> 6] |= uint64_t(1) << (i & 63);
    else
      w_[i >> 6] &= ~(uint64_t(1) << (i & 63));
  }
  void clear() { std::fill(w_.begin(), w_.end(), 0); }

  bool any() const;
  size_t count() const;
  int first_set() const;  // -1 when empty
  bool subset_of(const Bits& o) const;
  bool intersects(const Bits& o) const;

  Bits& operator&=(const Bits& o);
  Bits& operator|=(const Bits& o);
  void flip_all();  // complement within size()

  friend bool operator==(const Bits& a, const Bits& b) {
    return a.n_ == b.n_ && a.w_ == b.w_;
  }
  friend bool operator!=(const Bits& a, const Bits& b) { return !(a == b); }

 private:
  size_t n_ = 0;
  std::vector<uint64_t> w_;
};

// A frame: named worlds plus one relation, kept as sorted successor lists.
struct Frame {
  std::vector<std::string> names;
  std::vector<std::vector<uint32_t>> succ;

  size_t size() const { return names.size(); }
  bool edge(uint32_t a, uint32_t b) const;
  int index_of(const std::string& name) const;  // -1 when absent
};

// A 2-frame: named worlds with horizontal (0) and vertical (1) relations.
struct TwoFrame {
  std::vector<std::string> names;
  std::vector<std::vector<uint32_t>> succ0;
  std::vector<std::vector<uint32_t>> succ1;

  size_t size() const { return names.size(); }
  bool edge0(uint32_t a, uint32_t b) const;
  bool edge1(uint32_t a, uint32_t b) const;
  int index_of(const std::string& name) const;
};

Frame make_linear(size_t n);
Frame make_difference(size_t n);
// Truncation of <omega+1, >>: worlds top, 0..K; top above all, i above j iff i > j.
Frame make_omega_plus_one_reversed(size_t K);

enum class GridTag { Product, Expanding, Decreasing };

// Coordinate bookkeeping for 2-frames built as grids. Worlds map to
// (horizontal index into `horizontal`, vertical index into `vnames`).
struct GridMeta {
  GridTag tag = GridTag::Product;
  Frame horizontal;
  std::vector<std::string> vnames;
  std::vector<std::pair<uint32_t, uint32_t>> coord;
  std::vector<std::vector<uint32_t>> columns;  // per horizontal index

  // World index at (h, v), or -1 when the vertical is absent from column h.
  int at(uint32_t h, uint32_t v) const;
};

struct GridTwoFrame {
  TwoFrame tf;
  GridMeta meta;
};

GridTwoFrame product(const Frame& f0, const Frame& f1);

// The H_{F,Gbar} construction: one domain frame per world of `f`, glued so
// that rel0 moves the horizontal coordinate between shared verticals and
// rel1 acts within a column. Domains must be nested the way `mode` demands
// (expanding: grow along rel0; decreasing: shrink), as carriers and as
// relations. Throws Error on violation.
GridTwoFrame assemble(const Frame& f, const std::vector<Frame>& domains, GridTag mode);

enum class FrameProp {
  Commute,
  Confluent,
  WeakOrder,
  PseudoEquivalence,
  LinearOrder,
  WellOrder,
  ModallyDiscrete,
  Dense,
  Rooted,
};

// Names as used by the CLI: commute, confluent, weak-order,
// pseudo-equivalence, linear-order, well-order, modally-discrete, dense,
// rooted. Throws ParseError on anything else.
FrameProp frame_prop_from_name(const std::string& name);
const char* frame_prop_name(FrameProp p);

// Decides the first-order condition literally. Unimodal properties only;
// Commute/Confluent are rejected here (they need two relations).
// WellOrder scans all subsets and is capped at 20 worlds (BudgetError).
bool check_property(const Frame& f, FrameProp p);

// Commute, Confluent, and Rooted (reachability under rel0 plus rel1).
// Unimodal properties are rejected: apply them to the component frames.
bool check_property(const TwoFrame& tf, FrameProp p);

// Length in edges of the longest rel0-path from w; infinite iff w reaches
// a rel0-cycle. The sentinel is explicit, never a saturated count.
struct Rank {
  bool infinite = false;
  uint32_t value = 0;
};
Rank horizontal_rank(const TwoFrame& tf, uint32_t w);

bool operator==(const Rank& a, const Rank& b);

// Text format (frame half):
//   worlds: id id ...
//   r0: id id        (one edge per line)
//   r1: id id
//   coord id = (h, v)   (grid frames only)
// print_frame emits worlds/r0/r1(+coords); parse_two_frame accepts any
// interleaving and ignores val/root lines (the model layer reads those).
void print_two_frame(std::ostream& os, const TwoFrame& tf, const GridMeta* meta = nullptr);
struct ParsedFrame {
  TwoFrame tf;
  bool has_meta = false;
  GridMeta meta;
};
ParsedFrame parse_two_frame(const std::string& text);

}  // namespace bimodal
