#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace binbias {

// Flat key = value configuration file. Lines are `key = value`, with #
// starting a comment; list values are comma separated.
class FlatConfig {
  public:
    FlatConfig() = default;
    static FlatConfig parse(const std::string& text);
    static FlatConfig parse_file(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key,
                                    const std::vector<double>& fallback) const;
    std::vector<std::uint64_t> get_u64s(const std::string& key,
                                        const std::vector<std::uint64_t>& fallback) const;

    void set(const std::string& key, const std::string& value);
    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

} // namespace binbias
