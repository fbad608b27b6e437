#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace flowagg {

// Flat `key = value` file with optional [section] headers. Lines starting
// with '#' or ';' are comments. Keys are reported as "section.key".
struct IniEntry {
    std::string section;
    std::string key;  // without the section prefix
    std::string value;
    std::size_t line = 0;

    std::string full_key() const { return section.empty() ? key : section + "." + key; }
};

std::vector<IniEntry> parse_ini(std::istream& in, const std::string& source);
std::vector<IniEntry> load_ini(const std::filesystem::path& path);

}  // namespace flowagg
