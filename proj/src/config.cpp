#include "confsep/config.hpp"

#include <sstream>

#include "confsep/model_io.hpp"

namespace confsep {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool has_space(const std::string& s) {
  return s.find_first_of(" \t") != std::string::npos;
}

}  // namespace

std::vector<ConfigEntry> parse_config_text(const std::string& text,
                                           const std::string& origin) {
  std::vector<ConfigEntry> entries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto where = origin + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(where + ": expected 'section.key = value'");
    const std::string lhs = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto dot = lhs.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == lhs.size())
      throw ValidationError(where + ": key must have the form section.key");
    ConfigEntry entry;
    entry.section = lhs.substr(0, dot);
    entry.key = lhs.substr(dot + 1);
    entry.value = value;
    entry.line = line_no;
    if (has_space(entry.section) || has_space(entry.key))
      throw ValidationError(where + ": section and key must not contain spaces");
    if (entry.value.empty()) throw ValidationError(where + ": empty value");
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<ConfigEntry> parse_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path), path);
}

}  // namespace confsep
