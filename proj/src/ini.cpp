#include "flowagg/ini.hpp"

#include <fstream>

#include "flowagg/errors.hpp"
#include "text_util.hpp"

namespace flowagg {

std::vector<IniEntry> parse_ini(std::istream& in, const std::string& source) {
    std::vector<IniEntry> entries;
    std::string section;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const std::string where = source + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') throw ValidationError(where + ": unterminated section header");
            section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
            if (section.empty()) throw ValidationError(where + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError(where + ": expected 'key = value'");
        IniEntry e{section, detail::trim(std::string_view(line).substr(0, eq)),
                   detail::trim(std::string_view(line).substr(eq + 1)), line_no};
        if (e.key.empty()) throw ValidationError(where + ": empty key");
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<IniEntry> load_ini(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    return parse_ini(in, path.string());
}

}  // namespace flowagg
