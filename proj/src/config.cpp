#include "lsv/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lsv {
namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string strip_comment(const std::string& line) {
    const auto pos = line.find_first_of("#;");
    return pos == std::string::npos ? line : line.substr(0, pos);
}

}  // namespace

double parse_number(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    if (t.empty()) throw std::invalid_argument(what + ": empty value");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE) {
        throw std::invalid_argument(what + ": not a number: '" + t + "'");
    }
    return v;
}

ConfigDocument ConfigDocument::parse(const std::string& text) {
    ConfigDocument doc;
    std::istringstream in(text);
    std::string line;
    std::string section = "model";
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']' || body.size() < 3) {
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": malformed section header");
            }
            section = trim(body.substr(1, body.size() - 2));
            doc.sections_[section];
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        }
        const std::string key = trim(body.substr(0, eq));
        if (key.empty()) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        }
        auto& sec = doc.sections_[section];
        if (sec.count(key)) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": duplicate key '" + section + "." + key + "'");
        }
        sec[key] = trim(body.substr(eq + 1));
    }
    return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

bool ConfigDocument::has_section(const std::string& section) const {
    return sections_.count(section) != 0;
}

std::optional<std::string> ConfigDocument::get(const std::string& section,
                                               const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

std::string ConfigDocument::require(const std::string& section, const std::string& key) const {
    auto v = get(section, key);
    if (!v) throw std::invalid_argument("missing config key '" + section + "." + key + "'");
    return *v;
}

double ConfigDocument::require_number(const std::string& section, const std::string& key) const {
    return parse_number(require(section, key), section + "." + key);
}

double ConfigDocument::number_or(const std::string& section, const std::string& key,
                                 double fallback) const {
    auto v = get(section, key);
    return v ? parse_number(*v, section + "." + key) : fallback;
}

std::vector<std::string> ConfigDocument::keys(const std::string& section) const {
    std::vector<std::string> out;
    const auto s = sections_.find(section);
    if (s == sections_.end()) return out;
    for (const auto& [k, _] : s->second) out.push_back(k);
    return out;
}

void ConfigDocument::set(const std::string& section, const std::string& key,
                         const std::string& value) {
    sections_[section][key] = value;
}

}  // namespace lsv
