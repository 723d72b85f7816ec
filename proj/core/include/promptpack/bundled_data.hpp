#pragma once

#include <string_view>

namespace promptpack::bundled {

// Small synthetic frequency corpus, one document per line.
std::string_view corpus();

// Function words for the phrase chunker, one per line.
std::string_view stopwords();

}  // namespace promptpack::bundled
