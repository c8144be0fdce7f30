#include "bimodal/model.hpp"

#include <ostream>
#include <sstream>

namespace bimodal {

void Model::set_val(const std::string& name, const std::vector<uint32_t>& worlds) {
  Bits b(frame.size());
  for (uint32_t w : worlds) {
    if (w >= frame.size()) throw Error("model: world index out of range for " + name);
    b.set(w);
  }
  valuation[name] = b;
}

Bits Model::val(const std::string& name) const {
  auto it = valuation.find(name);
  if (it != valuation.end()) return it->second;
  return Bits(frame.size());
}

void print_model(std::ostream& os, const Model& m) {
  print_two_frame(os, m.frame, m.has_meta ? &m.meta : nullptr);
  for (const auto& [name, bits] : m.valuation) {
    os << "val " << name << ":";
    for (uint32_t w = 0; w < m.frame.size(); ++w)
      if (bits.get(w)) os << " " << m.frame.names[w];
    os << "\n";
  }
  if (m.root) os << "root: " << m.frame.names[*m.root] << "\n";
}

std::string print_model(const Model& m) {
  std::ostringstream os;
  print_model(os, m);
  return os.str();
}

Model parse_model(const std::string& text) {
  ParsedFrame pf = parse_two_frame(text);
  Model m;
  m.frame = std::move(pf.tf);
  m.has_meta = pf.has_meta;
  m.meta = std::move(pf.meta);

  auto idx = [&](const std::string& nm) {
    int i = m.frame.index_of(nm);
    if (i < 0) throw ParseError("model: unknown world " + nm);
    return uint32_t(i);
  };

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "val") {
      std::string name;
      if (!(ls >> name) || name.size() < 2 || name.back() != ':')
        throw ParseError("model: expected 'val NAME: id ...'");
      name.pop_back();
      if (m.valuation.count(name)) throw ParseError("model: duplicate val " + name);
      Bits b(m.frame.size());
      std::string w;
      while (ls >> w) b.set(idx(w));
      m.valuation[name] = b;
    } else if (tok == "root:") {
      std::string w, extra;
      if (!(ls >> w) || (ls >> extra)) throw ParseError("model: expected 'root: id'");
      if (m.root) throw ParseError("model: duplicate root line");
      m.root = idx(w);
    }
    // Frame lines were already consumed by parse_two_frame; anything
    // unrecognized has thrown there.
  }
  return m;
}

}  // namespace bimodal
