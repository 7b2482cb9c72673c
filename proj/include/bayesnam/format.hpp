#pragma once

#include <cstdio>
#include <string>

namespace bayesnam {

// Shortest fixed formatting that round-trips doubles exactly (17 significant
// digits). Used for every CSV we write so identical runs give identical bytes.
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace bayesnam
