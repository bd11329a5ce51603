#pragma once

#include <istream>
#include <string>

#include "vigil/errors.hpp"

namespace vigil::detect {

// Whitespace token stream over a text model file; any token starting with
// '#' discards the rest of its line.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  bool try_next(std::string& out) {
    while (in_ >> out) {
      if (!out.empty() && out[0] == '#') {
        std::string rest;
        std::getline(in_, rest);
        continue;
      }
      return true;
    }
    return false;
  }

  std::string next(const char* what) {
    std::string tok;
    if (!try_next(tok)) {
      throw BadModelFile(std::string("unexpected end of model file, wanted ") + what);
    }
    return tok;
  }

  void expect(const char* literal) {
    std::string tok = next(literal);
    if (tok != literal) {
      throw BadModelFile(std::string("expected '") + literal + "', got '" + tok + "'");
    }
  }

  long long integer(const char* what) {
    std::string tok = next(what);
    size_t idx = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &idx);
    } catch (const std::exception&) {
      throw BadModelFile(std::string("bad integer for ") + what + ": '" + tok + "'");
    }
    if (idx != tok.size()) {
      throw BadModelFile(std::string("bad integer for ") + what + ": '" + tok + "'");
    }
    return v;
  }

  double real(const char* what) {
    std::string tok = next(what);
    size_t idx = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &idx);
    } catch (const std::exception&) {
      throw BadModelFile(std::string("bad number for ") + what + ": '" + tok + "'");
    }
    if (idx != tok.size()) {
      throw BadModelFile(std::string("bad number for ") + what + ": '" + tok + "'");
    }
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace vigil::detect
