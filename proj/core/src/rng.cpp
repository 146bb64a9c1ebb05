#include "strokegen/rng.hpp"

#include <sstream>

#include "strokegen/errors.hpp"

namespace strokegen {

std::string serialize_rng(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

Rng deserialize_rng(const std::string& state) {
  std::istringstream in(state);
  Rng rng;
  in >> rng;
  if (!in) throw FormatError("invalid rng state");
  return rng;
}

}  // namespace strokegen
