#pragma once

#include <vector>

namespace rktomo::detail {

struct BundledScenario {
  const char* name;
  const char* text;
};

// Defined in a file generated at configure time from scenarios/*.json.
const std::vector<BundledScenario>& bundled_scenarios();

}  // namespace rktomo::detail
