#pragma once

// NSL-KDD record schema and text-format loader.
//
// Records are headerless comma-separated lines with 43 fields: the 41
// connection features in canonical order, the attack label, and the
// difficulty score.

#include <array>
#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qsd/error.hpp"

namespace qsd {

inline constexpr std::size_t kFeatureCount = 41;
inline constexpr std::size_t kCategoricalCount = 3;
inline constexpr std::size_t kNumericCount = kFeatureCount - kCategoricalCount;
inline constexpr std::size_t kFieldCount = kFeatureCount + 2;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "duration",
    "protocol_type",
    "service",
    "flag",
    "src_bytes",
    "dst_bytes",
    "land",
    "wrong_fragment",
    "urgent",
    "hot",
    "num_failed_logins",
    "logged_in",
    "num_compromised",
    "root_shell",
    "su_attempted",
    "num_root",
    "num_file_creations",
    "num_shells",
    "num_access_files",
    "num_outbound_cmds",
    "is_host_login",
    "is_guest_login",
    "count",
    "srv_count",
    "serror_rate",
    "srv_serror_rate",
    "rerror_rate",
    "srv_rerror_rate",
    "same_srv_rate",
    "diff_srv_rate",
    "srv_diff_host_rate",
    "dst_host_count",
    "dst_host_srv_count",
    "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate",
    "dst_host_srv_serror_rate",
    "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate",
};

// Positions of protocol_type, service and flag in the canonical order.
inline constexpr std::array<std::size_t, kCategoricalCount> kCategoricalPositions = {1, 2, 3};

inline constexpr bool is_categorical_position(std::size_t pos) {
    for (auto p : kCategoricalPositions)
        if (p == pos) return true;
    return false;
}

enum class AttackFamily { Normal, DoS, Probe, R2L, U2R };

inline std::string_view to_string(AttackFamily f) {
    switch (f) {
        case AttackFamily::Normal: return "normal";
        case AttackFamily::DoS: return "DoS";
        case AttackFamily::Probe: return "Probe";
        case AttackFamily::R2L: return "R2L";
        case AttackFamily::U2R: return "U2R";
    }
    return "?";
}

/// Attack-name to family table, including the attack types that only occur
/// in the NSL-KDD test files.
inline const std::unordered_map<std::string, AttackFamily>& attack_family_table() {
    static const std::unordered_map<std::string, AttackFamily> table = [] {
        std::unordered_map<std::string, AttackFamily> t;
        t["normal"] = AttackFamily::Normal;
        for (const char* s : {"back", "land", "neptune", "pod", "smurf", "teardrop", "apache2", "mailbomb",
                              "processtable", "udpstorm", "worm"})
            t[s] = AttackFamily::DoS;
        for (const char* s : {"ipsweep", "nmap", "portsweep", "satan", "mscan", "saint"})
            t[s] = AttackFamily::Probe;
        for (const char* s : {"ftp_write", "guess_passwd", "imap", "multihop", "phf", "spy", "warezclient",
                              "warezmaster", "named", "sendmail", "snmpgetattack", "snmpguess", "xlock",
                              "xsnoop", "httptunnel"})
            t[s] = AttackFamily::R2L;
        for (const char* s : {"buffer_overflow", "loadmodule", "perl", "rootkit", "ps", "sqlattack", "xterm"})
            t[s] = AttackFamily::U2R;
        return t;
    }();
    return table;
}

inline std::optional<AttackFamily> family_of(std::string_view label) {
    const auto& t = attack_family_table();
    auto it = t.find(std::string(label));
    if (it == t.end()) return std::nullopt;
    return it->second;
}

struct RawRecord {
    std::array<double, kNumericCount> numeric{};
    std::array<std::string, kCategoricalCount> categorical;
    std::string label;
    int difficulty = 0;
    AttackFamily family = AttackFamily::Normal;

    bool is_attack() const { return family != AttackFamily::Normal; }
};

struct RawDataset {
    std::vector<RawRecord> records;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }

    double attack_rate() const {
        if (records.empty()) return 0.0;
        std::size_t a = 0;
        for (const auto& r : records) a += r.is_attack() ? 1 : 0;
        return static_cast<double>(a) / static_cast<double>(records.size());
    }
};

/// Name of the numeric feature stored at `numeric[i]`.
inline std::string_view numeric_feature_name(std::size_t i) {
    std::size_t seen = 0;
    for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
        if (is_categorical_position(pos)) continue;
        if (seen++ == i) return kFeatureNames[pos];
    }
    return {};
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

}  // namespace detail

/// Parse one record. `line_no` is used only for error messages.
inline RawRecord parse_record(std::string_view line, std::size_t line_no) {
    std::array<std::string_view, kFieldCount> fields;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        const auto field = detail::trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (count < kFieldCount) fields[count] = field;
        ++count;
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (count != kFieldCount) {
        throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(kFieldCount) +
                         " fields, found " + std::to_string(count));
    }

    RawRecord rec;
    std::size_t num = 0;
    std::size_t cat = 0;
    for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
        const auto f = fields[pos];
        if (is_categorical_position(pos)) {
            rec.categorical[cat++] = std::string(f);
            continue;
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc{} || ptr != f.data() + f.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": field '" + std::string(kFeatureNames[pos]) +
                             "' is not numeric: '" + std::string(f) + "'");
        }
        rec.numeric[num++] = v;
    }

    rec.label = std::string(fields[kFeatureCount]);
    auto fam = family_of(rec.label);
    if (!fam) {
        throw ParseError("line " + std::to_string(line_no) + ": unknown attack label '" + rec.label + "'");
    }
    rec.family = *fam;

    const auto d = fields[kFeatureCount + 1];
    auto [ptr, ec] = std::from_chars(d.data(), d.data() + d.size(), rec.difficulty);
    if (ec != std::errc{} || ptr != d.data() + d.size()) {
        throw ParseError("line " + std::to_string(line_no) + ": difficulty is not an integer: '" + std::string(d) +
                         "'");
    }
    return rec;
}

inline RawDataset parse_nslkdd(std::istream& in) {
    RawDataset ds;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        ds.records.push_back(parse_record(line, line_no));
    }
    return ds;
}

/// Evaluation modes: which files serve as train and test.
enum class EvalMode { Full, Pct20, TrainOnly, Hard };

inline std::string_view to_string(EvalMode m) {
    switch (m) {
        case EvalMode::Full: return "full";
        case EvalMode::Pct20: return "20pct";
        case EvalMode::TrainOnly: return "train_only";
        case EvalMode::Hard: return "hard";
    }
    return "?";
}

inline EvalMode parse_eval_mode(std::string_view s) {
    if (s == "full") return EvalMode::Full;
    if (s == "20pct") return EvalMode::Pct20;
    if (s == "train_only") return EvalMode::TrainOnly;
    if (s == "hard") return EvalMode::Hard;
    throw ConfigError("unknown eval mode '" + std::string(s) + "'");
}

/// Role a file plays for a given evaluation mode.
enum class FileRole { Train, Test };

/// Standard NSL-KDD file name for a mode and role. In train_only mode the
/// test role is served by a held-out split of the training file.
inline std::string standard_file_name(EvalMode mode, FileRole role) {
    if (role == FileRole::Train) return mode == EvalMode::Pct20 ? "KDDTrain+_20Percent.txt" : "KDDTrain+.txt";
    switch (mode) {
        case EvalMode::Hard: return "KDDTest-21.txt";
        case EvalMode::TrainOnly: return "KDDTrain+.txt";
        default: return "KDDTest+.txt";
    }
}

/// Load and parse an NSL-KDD file. An empty file yields an empty dataset.
inline RawDataset load_nslkdd(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    try {
        return parse_nslkdd(in);
    } catch (const ParseError& e) {
        throw ParseError(path.filename().string() + ": " + e.what());
    }
}

}  // namespace qsd
