#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "craft/selector.hpp"

namespace craft {

// One ascending pool index per line, plus a "<path>.diag.json" sidecar with
// the diagnostics block.
void save_selection(const SelectionResult& result, const std::string& path);

// Indices in file order; malformed lines are reported with their line number.
std::vector<std::uint64_t> load_selection(const std::string& path);

}  // namespace craft
