#pragma once

#include <string>
#include <vector>

#include "confsep/types.hpp"

namespace confsep {

/// One `section.key = value` line of a config file.
struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

/// Grammar: one `section.key = value` assignment per line, `#` starts a
/// comment, blank lines ignored. Section and key are non-empty and contain
/// no whitespace; the value is taken verbatim after trimming. Later entries
/// override earlier ones with the same section.key.
std::vector<ConfigEntry> parse_config_text(const std::string& text,
                                           const std::string& origin);
std::vector<ConfigEntry> parse_config_file(const std::string& path);

}  // namespace confsep
