#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace posnet {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat key = value configuration. Values are kept verbatim as text, so a
/// parse -> serialize -> parse round trip is lossless; typed accessors
/// validate on read. '#' starts a comment.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig from_string(const std::string& text) {
        KeyValueConfig cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string stripped = strip(line.substr(0, line.find('#')));
            if (stripped.empty()) continue;
            const auto eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = strip(stripped.substr(0, eq));
            const std::string value = strip(stripped.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static KeyValueConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_string(buf.str());
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    [[nodiscard]] bool has(const std::string& key) const { return values_.contains(key); }

    [[nodiscard]] std::string get_string(const std::string& key, const std::string& dflt) const {
        const auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }

    [[nodiscard]] std::int64_t get_int(const std::string& key, std::int64_t dflt) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        try {
            std::size_t pos = 0;
            const std::int64_t v = std::stoll(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': expected integer, got '" + it->second + "'");
        }
    }

    [[nodiscard]] std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        try {
            std::size_t pos = 0;
            const std::uint64_t v = std::stoull(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': expected unsigned integer, got '" +
                              it->second + "'");
        }
    }

    [[nodiscard]] double get_double(const std::string& key, double dflt) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': expected number, got '" + it->second + "'");
        }
    }

    [[nodiscard]] bool get_bool(const std::string& key, bool dflt) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("config key '" + key + "': expected bool, got '" + it->second + "'");
    }

    [[nodiscard]] std::string serialize() const {
        std::ostringstream out;
        for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
        return out.str();
    }

    [[nodiscard]] const std::map<std::string, std::string>& entries() const { return values_; }

    friend bool operator==(const KeyValueConfig& a, const KeyValueConfig& b) {
        return a.values_ == b.values_;
    }

private:
    static std::string strip(const std::string& s) {
        const auto begin = s.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos) return "";
        const auto end = s.find_last_not_of(" \t\r\n");
        return s.substr(begin, end - begin + 1);
    }

    std::map<std::string, std::string> values_;
};

/// Read-through view that records the resolved value of every key it serves,
/// defaults included, so reports can echo the complete effective
/// configuration rather than just the keys the user set.
class ResolvedConfig {
public:
    explicit ResolvedConfig(const KeyValueConfig& source) : source_(&source) {}

    std::int64_t get_int(const std::string& key, std::int64_t dflt) {
        const std::int64_t v = source_->get_int(key, dflt);
        echo_.set(key, std::to_string(v));
        return v;
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) {
        const std::uint64_t v = source_->get_u64(key, dflt);
        echo_.set(key, std::to_string(v));
        return v;
    }

    double get_double(const std::string& key, double dflt) {
        const double v = source_->get_double(key, dflt);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        echo_.set(key, buf);
        return v;
    }

    std::string get_string(const std::string& key, const std::string& dflt) {
        const std::string v = source_->get_string(key, dflt);
        echo_.set(key, v);
        return v;
    }

    bool get_bool(const std::string& key, bool dflt) {
        const bool v = source_->get_bool(key, dflt);
        echo_.set(key, v ? "true" : "false");
        return v;
    }

    [[nodiscard]] const KeyValueConfig& echo() const noexcept { return echo_; }

private:
    const KeyValueConfig* source_;
    KeyValueConfig echo_;
};

} // namespace posnet
