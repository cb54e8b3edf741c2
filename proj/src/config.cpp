#include "binbias/config.hpp"

#include <sstream>
#include <stdexcept>

#include "binbias/csv.hpp"

namespace binbias {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::string strip_quotes(std::string s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\'')))
        return s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

} // namespace

FlatConfig FlatConfig::parse(const std::string& text) {
    FlatConfig config;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: missing '=' on line " + std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = strip_quotes(trim(line.substr(eq + 1)));
        if (key.empty())
            throw std::runtime_error("config: empty key on line " + std::to_string(line_no));
        config.entries_[key] = value;
    }
    return config;
}

FlatConfig FlatConfig::parse_file(const std::string& path) {
    return parse(read_text_file(path));
}

bool FlatConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string FlatConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double FlatConfig::get_double(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "' is not a number");
    }
}

long FlatConfig::get_long(const std::string& key, long fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return std::stol(it->second);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "' is not an integer");
    }
}

std::uint64_t FlatConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw std::runtime_error("config: key '" + key + "' is not an integer");
    }
}

bool FlatConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::runtime_error("config: key '" + key + "' is not a boolean");
}

std::vector<double> FlatConfig::get_doubles(const std::string& key,
                                            const std::vector<double>& fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(it->second)) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw std::runtime_error("config: key '" + key + "' holds a bad number");
        }
    }
    return out;
}

std::vector<std::uint64_t> FlatConfig::get_u64s(
    const std::string& key, const std::vector<std::uint64_t>& fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(it->second)) {
        try {
            out.push_back(std::stoull(item));
        } catch (const std::exception&) {
            throw std::runtime_error("config: key '" + key + "' holds a bad integer");
        }
    }
    return out;
}

void FlatConfig::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

} // namespace binbias
