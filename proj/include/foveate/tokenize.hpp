#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace foveate {

// Shared tokenizer for SelfBLEU and recall: ASCII-lowercase, split on Unicode
// whitespace, strip leading/trailing ASCII punctuation, drop empty tokens.
// Pure and stable; oracles and metrics both depend on this exact behavior.
std::vector<std::string> tokenize(std::string_view raw);

}  // namespace foveate
