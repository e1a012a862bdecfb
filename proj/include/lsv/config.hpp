#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lsv {

/// Flat sectioned key = value document.
///
///     # comment
///     [model]
///     rho = 0
///     y0 = 0.2
///
///     [alpha]
///     family = power
///     nu = 1
///     p = 1
///
/// Keys before the first section header belong to section "model".
/// Whitespace around keys and values is ignored; `#` and `;` start comments.
class ConfigDocument {
public:
    static ConfigDocument parse(const std::string& text);
    static ConfigDocument load(const std::string& path);

    bool has_section(const std::string& section) const;
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    std::string require(const std::string& section, const std::string& key) const;
    double require_number(const std::string& section, const std::string& key) const;
    double number_or(const std::string& section, const std::string& key, double fallback) const;
    std::vector<std::string> keys(const std::string& section) const;

    void set(const std::string& section, const std::string& key, const std::string& value);

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

/// Strict decimal parse of a full string; throws std::invalid_argument.
double parse_number(const std::string& text, const std::string& what);

}  // namespace lsv
