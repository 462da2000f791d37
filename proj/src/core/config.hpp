#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace latcode {

// key = value text, one entry per line, '#' starts a comment, blank lines
// ignored. Keys are dotted paths; values may be comma-separated lists.
// Duplicate keys are rejected. Lookups are tracked so unknown keys can be
// reported after a consumer has pulled everything it understands.
class Config {
  public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& key) const;

    std::string get_str(const std::string& key) const;
    std::string get_str(const std::string& key, const std::string& fallback) const;
    double get_num(const std::string& key) const;
    double get_num(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_num_list(const std::string& key) const;
    std::vector<std::string> get_str_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    // Replace-or-insert (command-line flags overriding file keys).
    void override_key(const std::string& key, const std::string& value);

    // Throws listing every key no getter has touched (catches typos).
    void check_consumed() const;

    const std::vector<std::pair<std::string, std::string>>& items() const { return entries_; }

    std::string dump() const;

  private:
    const std::string* find(const std::string& key) const;

    std::vector<std::pair<std::string, std::string>> entries_;
    mutable std::set<std::string> touched_;
};

}  // namespace latcode
