#pragma once

#include "posnet/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace posnet {

inline constexpr const char* kVersionStamp = "posnet 0.1.0";

/// Summary statistics for a metric series.
struct SeriesSummary {
    double median = 0.0;
    double iqr = 0.0;
    double min = 0.0;
    double max = 0.0;
};

inline SeriesSummary summarize(std::vector<double> values) {
    if (values.empty()) return {};
    std::sort(values.begin(), values.end());
    const auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    return {quantile(0.5), quantile(0.75) - quantile(0.25), values.front(), values.back()};
}

/// Machine-readable experiment report. The `metrics` section is a pure
/// function of config + seed; timings live in their own section so reruns
/// stay byte-comparable on the parts that matter.
class Report {
public:
    Report(const std::string& command, const KeyValueConfig& config, std::uint64_t seed) {
        root_["version"] = kVersionStamp;
        root_["command"] = command;
        root_["seed"] = seed;
        nlohmann::json echo = nlohmann::json::object();
        for (const auto& [k, v] : config.entries()) echo[k] = v;
        root_["config"] = std::move(echo);
        root_["metrics"] = nlohmann::json::object();
        root_["timings"] = nlohmann::json::object();
    }

    nlohmann::json& metrics() { return root_["metrics"]; }
    nlohmann::json& timings() { return root_["timings"]; }
    nlohmann::json& root() { return root_; }

    void add_summary(const std::string& name, const std::vector<double>& values) {
        const SeriesSummary s = summarize(values);
        root_["metrics"]["summary"][name] = {
            {"median", s.median}, {"iqr", s.iqr}, {"min", s.min}, {"max", s.max}};
    }

    [[nodiscard]] std::string metrics_dump() const { return root_.at("metrics").dump(); }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write report: " + path.string());
        out << root_.dump(2) << "\n";
    }

private:
    nlohmann::json root_;
};

/// Minimal CSV writer: header plus numeric rows, '%.17g' formatting so that
/// identical doubles serialize identically.
inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
            out << buf << (i + 1 < row.size() ? "," : "\n");
        }
    }
}

} // namespace posnet
