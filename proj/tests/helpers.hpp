#pragma once

#include <sstream>
#include <string>
#include <string_view>

#include "logsieve/token.hpp"

namespace testing {

// "a * b" -> [a, Wildcard, b]; "_" stands for a Gap.
inline logsieve::TokenSeq seq(std::string_view text) {
  logsieve::TokenSeq out;
  std::istringstream in{std::string(text)};
  std::string t;
  while (in >> t) {
    if (t == "*") out.push_back(logsieve::Token::wildcard());
    else if (t == "_") out.push_back(logsieve::Token::gap());
    else out.push_back(logsieve::Token::constant(t));
  }
  return out;
}

inline logsieve::Pattern pat(std::string_view text) { return {seq(text)}; }

}  // namespace testing
