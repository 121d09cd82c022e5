#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "vmot/marginal.hpp"

namespace vmot {

// JSON: {"points": [...], "weights": [...]}.
// CSV: a header line followed by `point,weight` rows; blank lines ignored.
// All loaders throw Error(kIo) for unreadable files and Error(kInvalidMarginal)
// for malformed content.
DiscreteMarginal parse_marginal_json(std::string_view text);
DiscreteMarginal parse_marginal_csv(std::string_view text);
// Dispatches on the extension (.csv, anything else is JSON).
DiscreteMarginal load_marginal(const std::filesystem::path& path);

std::string marginal_to_json(const DiscreteMarginal& mu);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace vmot
