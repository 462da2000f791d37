#include "core/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "core/csv.hpp"
#include "core/errors.hpp"

namespace latcode {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::string body = trim(line);
        if (body.empty()) continue;
        size_t eq = body.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << "config line " << line_no << ": expected 'key = value'";
            throw ValidationError(msg.str());
        }
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream msg;
            msg << "config line " << line_no << ": empty key";
            throw ValidationError(msg.str());
        }
        cfg.set(key, value);
    }
    return cfg;
}

Config Config::load(const std::string& path) { return parse(read_text_file(path)); }

void Config::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) throw ValidationError("duplicate config key '" + key + "'");
    }
    entries_.emplace_back(key, value);
}

void Config::override_key(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

const std::string* Config::find(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) {
            touched_.insert(key);
            return &v;
        }
    }
    return nullptr;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

std::string Config::get_str(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) throw ValidationError("missing config key '" + key + "'");
    return *v;
}

std::string Config::get_str(const std::string& key, const std::string& fallback) const {
    const std::string* v = find(key);
    return v ? *v : fallback;
}

double Config::get_num(const std::string& key) const {
    std::string raw = get_str(key);
    double out = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), out);
    if (ec != std::errc() || ptr != raw.data() + raw.size())
        throw ValidationError("config key '" + key + "': '" + raw + "' is not a number");
    return out;
}

double Config::get_num(const std::string& key, double fallback) const {
    return has(key) ? get_num(key) : fallback;
}

long long Config::get_int(const std::string& key) const {
    std::string raw = get_str(key);
    long long out = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), out);
    if (ec != std::errc() || ptr != raw.data() + raw.size())
        throw ValidationError("config key '" + key + "': '" + raw + "' is not an integer");
    return out;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

uint64_t Config::get_u64(const std::string& key, uint64_t fallback) const {
    if (!has(key)) return fallback;
    std::string raw = get_str(key);
    uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), out);
    if (ec != std::errc() || ptr != raw.data() + raw.size())
        throw ValidationError("config key '" + key + "': '" + raw + "' is not an unsigned integer");
    return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string raw = get_str(key);
    if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
    if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
    throw ValidationError("config key '" + key + "': '" + raw + "' is not a boolean");
}

std::vector<double> Config::get_num_list(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& part : get_str_list(key)) {
        double x = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), x);
        if (ec != std::errc() || ptr != part.data() + part.size())
            throw ValidationError("config key '" + key + "': '" + part + "' is not a number");
        out.push_back(x);
    }
    return out;
}

std::vector<std::string> Config::get_str_list(const std::string& key) const {
    std::string raw = get_str(key);
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= raw.size()) {
        size_t comma = raw.find(',', start);
        std::string part =
            trim(raw.substr(start, (comma == std::string::npos ? raw.size() : comma) - start));
        if (!part.empty()) out.push_back(part);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void Config::check_consumed() const {
    std::string unknown;
    for (const auto& [k, v] : entries_) {
        if (!touched_.count(k)) {
            if (!unknown.empty()) unknown += ", ";
            unknown += "'" + k + "'";
        }
    }
    if (!unknown.empty()) throw ValidationError("unrecognized config keys: " + unknown);
}

std::string Config::dump() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

}  // namespace latcode
