#pragma once

#include <string>
#include <vector>

namespace trimatch {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

} // namespace detail

// Split one CSV line: double-quoted fields may contain commas and use ""
// escapes; unquoted fields are whitespace-trimmed.
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && detail::trim(cur).empty()) {
            quoted = true;
            was_quoted = true;
            cur.clear();
        } else if (c == ',') {
            fields.push_back(was_quoted ? cur : detail::trim(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur += c;
        }
    }
    fields.push_back(was_quoted ? cur : detail::trim(cur));
    return fields;
}

} // namespace trimatch
