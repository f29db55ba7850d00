#include "filtan/float_format.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace filtan {

FloatFormat FloatFormat::fixed_point(double delta, bool round_to_nearest) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("fixed-point quantum must be positive and finite");
  return {Kind::fixed, 0.0, round_to_nearest ? 0.5 * delta : delta, delta};
}

FloatFormat FloatFormat::parse(const std::string& text) {
  if (text == "exact") return exact();
  if (text == "ieee32") return ieee32();
  if (text == "ieee64") return ieee64();
  if (text.rfind("fixed:", 0) == 0) {
    std::string rest = text.substr(6);
    bool rne = false;
    if (auto colon = rest.find(':'); colon != std::string::npos) {
      std::string mode = rest.substr(colon + 1);
      if (mode != "rne") throw std::invalid_argument("unknown fixed-point mode: " + mode);
      rne = true;
      rest = rest.substr(0, colon);
    }
    size_t used = 0;
    double delta = 0.0;
    try {
      delta = std::stod(rest, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad fixed-point quantum: " + rest);
    }
    if (used != rest.size()) throw std::invalid_argument("bad fixed-point quantum: " + rest);
    return fixed_point(delta, rne);
  }
  throw std::invalid_argument("unknown arithmetic format: " + text);
}

std::string FloatFormat::to_string() const {
  switch (kind) {
    case Kind::exact: return "exact";
    case Kind::ieee32: return "ieee32";
    case Kind::ieee64: return "ieee64";
    case Kind::fixed: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "fixed:%.17g%s", quantum,
                    eps_abs == quantum ? "" : ":rne");
      return buf;
    }
  }
  return "?";
}

}  // namespace filtan
