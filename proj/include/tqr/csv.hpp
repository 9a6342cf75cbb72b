#pragma once

#include <charconv>
#include <string>

namespace tqr {

// shortest round-trip decimal form, so repeated runs emit byte-identical rows
inline std::string csv_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

} // namespace tqr
