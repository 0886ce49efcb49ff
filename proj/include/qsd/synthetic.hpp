#pragma once

// Deterministic generator of NSL-KDD-format traffic records. Produces
// files with the same schema, label vocabulary and qualitative per-family
// structure as the real corpus so the full pipeline can be exercised
// without the original data.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "qsd/nslkdd.hpp"

namespace qsd::synthetic {

struct Mix {
    double normal, dos, probe, r2l, u2r;
};

// Family proportions roughly following the NSL-KDD train and test splits.
inline constexpr Mix kTrainMix{0.535, 0.365, 0.0925, 0.0079, 0.0004};
inline constexpr Mix kTestMix{0.431, 0.331, 0.107, 0.122, 0.009};

class Generator {
public:
    explicit Generator(std::uint64_t seed) : rng_(seed) {}

    /// One record in NSL-KDD text form (43 comma-separated fields).
    std::string record(AttackFamily fam, bool test_split) {
        Fields f;
        std::string label;
        switch (fam) {
            case AttackFamily::Normal: label = normal(f); break;
            case AttackFamily::DoS: label = dos(f); break;
            case AttackFamily::Probe: label = probe(f); break;
            case AttackFamily::R2L: label = r2l(f, test_split); break;
            case AttackFamily::U2R: label = u2r(f); break;
        }
        return render(f, label, static_cast<int>(uniform_int(8, 21)));
    }

    AttackFamily draw_family(const Mix& m) {
        const double u = uniform();
        double acc = m.normal;
        if (u < acc) return AttackFamily::Normal;
        if (u < (acc += m.dos)) return AttackFamily::DoS;
        if (u < (acc += m.probe)) return AttackFamily::Probe;
        if (u < (acc += m.r2l)) return AttackFamily::R2L;
        return AttackFamily::U2R;
    }

private:
    // Numeric fields by canonical position; categoricals separately.
    struct Fields {
        std::array<double, kFeatureCount> v{};
        std::string protocol = "tcp", service = "http", flag = "SF";
    };

    enum Pos : std::size_t {
        duration = 0, src_bytes = 4, dst_bytes = 5, land = 6, wrong_fragment = 7, urgent = 8, hot = 9,
        num_failed_logins = 10, logged_in = 11, num_compromised = 12, root_shell = 13, su_attempted = 14,
        num_root = 15, num_file_creations = 16, num_shells = 17, num_access_files = 18, num_outbound_cmds = 19,
        is_host_login = 20, is_guest_login = 21, count = 22, srv_count = 23, serror_rate = 24,
        srv_serror_rate = 25, rerror_rate = 26, srv_rerror_rate = 27, same_srv_rate = 28, diff_srv_rate = 29,
        srv_diff_host_rate = 30, dst_host_count = 31, dst_host_srv_count = 32, dst_host_same_srv_rate = 33,
        dst_host_diff_srv_rate = 34, dst_host_same_src_port_rate = 35, dst_host_srv_diff_host_rate = 36,
        dst_host_serror_rate = 37, dst_host_srv_serror_rate = 38, dst_host_rerror_rate = 39,
        dst_host_srv_rerror_rate = 40
    };

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    std::int64_t uniform_int(std::int64_t a, std::int64_t b) {
        return std::uniform_int_distribution<std::int64_t>(a, b)(rng_);
    }
    bool bern(double p) { return uniform() < p; }
    double lognormal(double mu, double sigma) { return std::round(std::lognormal_distribution<double>(mu, sigma)(rng_)); }
    double rate(double centre, double spread) { return std::round(std::clamp(centre + uniform(-spread, spread), 0.0, 1.0) * 100.0) / 100.0; }
    double count_around(double mean, double lo, double hi) {
        return std::clamp(std::round(std::gamma_distribution<double>(2.0, mean / 2.0)(rng_)), lo, hi);
    }

    template <std::size_t N>
    const char* pick(const std::array<const char*, N>& items, const std::array<double, N>& w) {
        const double total = [&] { double s = 0; for (double x : w) s += x; return s; }();
        double u = uniform() * total;
        for (std::size_t i = 0; i < N; ++i) {
            if (u < w[i]) return items[i];
            u -= w[i];
        }
        return items[N - 1];
    }

    void host_defaults(Fields& f) {
        f.v[dst_host_count] = std::min(255.0, count_around(140, 1, 255));
        f.v[dst_host_srv_count] = std::clamp(std::round(f.v[dst_host_count] * uniform(0.9, 1.6)), 1.0, 255.0);
        f.v[dst_host_same_srv_rate] = rate(0.85, 0.15);
        f.v[dst_host_diff_srv_rate] = rate(0.03, 0.03);
        f.v[dst_host_same_src_port_rate] = rate(0.05, 0.05);
        f.v[dst_host_srv_diff_host_rate] = rate(0.02, 0.02);
        f.v[dst_host_serror_rate] = rate(0.01, 0.01);
        f.v[dst_host_srv_serror_rate] = rate(0.01, 0.01);
        f.v[dst_host_rerror_rate] = rate(0.03, 0.03);
        f.v[dst_host_srv_rerror_rate] = rate(0.02, 0.02);
    }

    std::string normal(Fields& f) {
        static const std::array<const char*, 12> services = {"http", "smtp", "ftp_data", "domain_u", "private", "ftp",
                                                             "telnet", "other", "ecr_i", "urp_i", "finger", "pop_3"};
        static const std::array<double, 12> sw = {0.50, 0.10, 0.07, 0.09, 0.04, 0.015, 0.01, 0.06, 0.02, 0.01, 0.005, 0.08};
        f.service = pick(services, sw);
        f.protocol = f.service == std::string("domain_u") || (f.service == std::string("private") && bern(0.7)) ? "udp"
                     : (f.service == std::string("ecr_i") || f.service == std::string("urp_i"))           ? "icmp"
                                                                                                             : "tcp";
        static const std::array<const char*, 5> flags = {"SF", "REJ", "S0", "RSTR", "S1"};
        f.flag = pick(flags, std::array<double, 5>{0.93, 0.03, 0.01, 0.02, 0.01});
        f.v[duration] = bern(0.1) ? lognormal(3.0, 2.0) : 0.0;
        f.v[src_bytes] = lognormal(5.5, 1.3);
        f.v[dst_bytes] = bern(0.8) ? lognormal(7.5, 1.6) : 0.0;
        f.v[hot] = bern(0.05) ? uniform_int(1, 5) : 0;
        f.v[logged_in] = f.protocol == std::string("tcp") && bern(0.85) ? 1 : 0;
        f.v[num_compromised] = bern(0.01) ? 1 : 0;
        f.v[num_file_creations] = bern(0.01) ? uniform_int(1, 3) : 0;
        f.v[num_access_files] = bern(0.01) ? 1 : 0;
        f.v[is_guest_login] = bern(0.003) ? 1 : 0;
        f.v[count] = count_around(9, 1, 511);
        f.v[srv_count] = std::clamp(f.v[count] + static_cast<double>(uniform_int(-1, 4)), 1.0, 511.0);
        f.v[serror_rate] = bern(0.05) ? rate(0.1, 0.1) : 0.0;
        f.v[srv_serror_rate] = f.v[serror_rate];
        f.v[rerror_rate] = bern(0.08) ? rate(0.2, 0.2) : 0.0;
        f.v[srv_rerror_rate] = f.v[rerror_rate];
        f.v[same_srv_rate] = rate(0.97, 0.05);
        f.v[diff_srv_rate] = rate(0.02, 0.02);
        f.v[srv_diff_host_rate] = bern(0.25) ? rate(0.15, 0.15) : 0.0;
        host_defaults(f);
        if (bern(0.2)) {
            // Low-volume host: few recent connections, rarely seen service.
            f.v[count] = count_around(2, 1, 10);
            f.v[srv_count] = f.v[count];
            f.v[dst_host_count] = count_around(12, 1, 60);
            f.v[dst_host_srv_count] = f.v[dst_host_count];
            if (bern(0.4)) f.v[duration] = lognormal(4.0, 1.5);
        }
        if (f.service == std::string("ftp_data")) {
            f.v[dst_host_same_src_port_rate] = rate(0.35, 0.35);
            f.v[dst_host_srv_diff_host_rate] = rate(0.05, 0.05);
        }
        return "normal";
    }

    std::string dos(Fields& f) {
        static const std::array<const char*, 5> kinds = {"neptune", "smurf", "back", "teardrop", "pod"};
        const std::string kind = pick(kinds, std::array<double, 5>{0.71, 0.18, 0.03, 0.06, 0.02});
        host_defaults(f);
        if (kind == "neptune") {
            f.protocol = "tcp";
            static const std::array<const char*, 4> s = {"private", "other", "http", "telnet"};
            f.service = pick(s, std::array<double, 4>{0.8, 0.1, 0.05, 0.05});
            f.flag = bern(0.9) ? "S0" : "REJ";
            f.v[count] = count_around(170, 1, 511);
            f.v[srv_count] = count_around(12, 1, 511);
            f.v[serror_rate] = f.flag == "S0" ? 1.0 : 0.0;
            f.v[srv_serror_rate] = f.v[serror_rate];
            f.v[rerror_rate] = f.flag == "REJ" ? 1.0 : 0.0;
            f.v[srv_rerror_rate] = f.v[rerror_rate];
            f.v[same_srv_rate] = rate(0.06, 0.05);
            f.v[diff_srv_rate] = rate(0.06, 0.04);
            f.v[dst_host_count] = 255;
            f.v[dst_host_srv_count] = count_around(15, 1, 255);
            f.v[dst_host_same_srv_rate] = rate(0.06, 0.05);
            f.v[dst_host_diff_srv_rate] = rate(0.06, 0.04);
            f.v[dst_host_serror_rate] = f.v[serror_rate];
            f.v[dst_host_srv_serror_rate] = f.v[serror_rate];
            f.v[dst_host_rerror_rate] = f.v[rerror_rate];
            f.v[dst_host_srv_rerror_rate] = f.v[rerror_rate];
        } else if (kind == "smurf" || kind == "pod") {
            f.protocol = "icmp";
            f.service = "ecr_i";
            f.v[src_bytes] = kind == "smurf" ? 1032 : 1480;
            f.v[wrong_fragment] = kind == "pod" ? 1 : 0;
            f.v[count] = kind == "smurf" ? 511 : count_around(3, 1, 20);
            f.v[srv_count] = f.v[count];
            f.v[same_srv_rate] = 1.0;
            f.v[dst_host_count] = 255;
            f.v[dst_host_srv_count] = 255;
            f.v[dst_host_same_srv_rate] = 1.0;
            f.v[dst_host_same_src_port_rate] = rate(0.9, 0.1);
        } else if (kind == "teardrop") {
            f.protocol = "udp";
            f.service = "private";
            f.v[src_bytes] = 28;
            f.v[wrong_fragment] = 3;
            f.v[count] = count_around(60, 1, 200);
            f.v[srv_count] = f.v[count];
            f.v[same_srv_rate] = 1.0;
            f.v[dst_host_same_src_port_rate] = rate(0.6, 0.3);
        } else {
            f.protocol = "tcp";
            f.service = "http";
            f.v[src_bytes] = 54540;
            f.v[dst_bytes] = lognormal(8.9, 0.2);
            f.v[hot] = 2;
            f.v[logged_in] = 1;
            f.v[count] = count_around(4, 1, 20);
            f.v[srv_count] = f.v[count];
            f.v[same_srv_rate] = 1.0;
        }
        return kind;
    }

    std::string probe(Fields& f) {
        static const std::array<const char*, 4> kinds = {"satan", "ipsweep", "portsweep", "nmap"};
        const std::string kind = pick(kinds, std::array<double, 4>{0.31, 0.31, 0.25, 0.13});
        host_defaults(f);
        if (kind == "ipsweep") {
            f.protocol = "icmp";
            f.service = bern(0.8) ? "eco_i" : "ecr_i";
            f.v[src_bytes] = 8;
            f.v[count] = count_around(2, 1, 10);
            f.v[srv_count] = count_around(20, 1, 100);
            f.v[same_srv_rate] = 1.0;
            f.v[srv_diff_host_rate] = rate(0.9, 0.1);
            f.v[dst_host_count] = count_around(60, 1, 255);
            f.v[dst_host_srv_count] = count_around(40, 1, 255);
            f.v[dst_host_same_src_port_rate] = rate(0.9, 0.1);
            f.v[dst_host_srv_diff_host_rate] = rate(0.5, 0.3);
        } else {
            f.protocol = kind == "satan" && bern(0.2) ? "udp" : "tcp";
            static const std::array<const char*, 6> s = {"private", "other", "telnet", "ftp", "http", "finger"};
            f.service = pick(s, std::array<double, 6>{0.5, 0.2, 0.08, 0.07, 0.1, 0.05});
            static const std::array<const char*, 4> fl = {"REJ", "RSTO", "RSTR", "SF"};
            f.flag = pick(fl, std::array<double, 4>{0.45, 0.15, 0.25, 0.15});
            f.v[count] = count_around(kind == "satan" ? 60 : 2, 1, 511);
            f.v[srv_count] = count_around(2, 1, 50);
            f.v[rerror_rate] = f.flag == std::string("SF") ? 0.0 : rate(0.8, 0.2);
            f.v[srv_rerror_rate] = f.v[rerror_rate];
            f.v[same_srv_rate] = rate(0.15, 0.15);
            f.v[diff_srv_rate] = rate(0.6, 0.35);
            f.v[dst_host_count] = count_around(kind == "satan" ? 230 : 60, 1, 255);
            f.v[dst_host_srv_count] = count_around(5, 1, 255);
            f.v[dst_host_same_srv_rate] = rate(0.05, 0.05);
            f.v[dst_host_diff_srv_rate] = rate(0.6, 0.35);
            f.v[dst_host_same_src_port_rate] = kind == "portsweep" ? rate(0.9, 0.1) : rate(0.1, 0.1);
            f.v[dst_host_rerror_rate] = f.v[rerror_rate];
            f.v[dst_host_srv_rerror_rate] = f.v[rerror_rate];
        }
        return kind;
    }

    std::string r2l(Fields& f, bool test_split) {
        static const std::array<const char*, 6> train_kinds = {"warezclient", "guess_passwd", "warezmaster",
                                                               "imap", "ftp_write", "multihop"};
        static const std::array<const char*, 6> test_kinds = {"guess_passwd", "warezmaster", "snmpgetattack",
                                                              "warezclient", "httptunnel", "xlock"};
        const std::string kind = test_split
                                     ? pick(test_kinds, std::array<double, 6>{0.45, 0.3, 0.1, 0.08, 0.04, 0.03})
                                     : pick(train_kinds, std::array<double, 6>{0.8, 0.08, 0.03, 0.03, 0.03, 0.03});
        host_defaults(f);
        f.protocol = "tcp";
        f.flag = "SF";
        f.v[logged_in] = 1;
        if (kind == "warezclient" || kind == "warezmaster" || kind == "ftp_write") {
            // Sessions from one campaign look alike: a typical record carries
            // the whole signature, an atypical one only fragments of it.
            const double sig = bern(0.85) ? 1.0 : 0.4;
            f.service = bern(0.75) ? "ftp_data" : (bern(0.7) ? "ftp" : "http");
            f.v[duration] = bern(sig) ? lognormal(5.0, 1.0) : 0.0;
            f.v[src_bytes] = lognormal(kind == "warezmaster" ? 8.0 : 6.5, 1.2);
            f.v[dst_bytes] = kind == "warezmaster" ? lognormal(12.0, 1.0) : 0.0;
            f.v[hot] = bern(0.9 * sig) ? uniform_int(2, 28) : 0;
            f.v[is_guest_login] = f.service == std::string("ftp") && bern(0.6) ? 1 : 0;
            f.v[count] = bern(sig) ? 1 : count_around(10, 1, 40);
            f.v[srv_count] = bern(sig) ? 1 : count_around(12, 1, 40);
            f.v[dst_host_count] = bern(sig) ? count_around(8, 1, 30) : count_around(140, 1, 255);
            f.v[dst_host_srv_count] = bern(sig) ? count_around(8, 1, 30) : count_around(190, 1, 255);
            f.v[dst_host_same_src_port_rate] = bern(sig) ? rate(0.9, 0.1) : rate(0.05, 0.05);
            f.v[dst_host_srv_diff_host_rate] = bern(sig) ? rate(0.3, 0.1) : rate(0.02, 0.02);
        } else if (kind == "guess_passwd" || kind == "imap" || kind == "xlock") {
            f.service = kind == "imap" ? "imap4" : (bern(0.85) ? "telnet" : "pop_3");
            f.flag = bern(0.5) ? "RSTO" : "SF";
            f.v[num_failed_logins] = bern(0.9) ? 1 : 0;
            f.v[logged_in] = 0;
            f.v[src_bytes] = lognormal(4.8, 0.4);
            f.v[dst_bytes] = lognormal(5.3, 0.4);
            f.v[count] = count_around(2, 1, 10);
            f.v[srv_count] = count_around(2, 1, 10);
            f.v[dst_host_count] = count_around(80, 1, 255);
            f.v[dst_host_srv_count] = count_around(40, 1, 255);
            f.v[dst_host_same_src_port_rate] = rate(0.1, 0.1);
            f.v[dst_host_srv_diff_host_rate] = rate(0.05, 0.05);
        } else if (kind == "snmpgetattack") {
            // Indistinguishable from ordinary SNMP traffic.
            f.protocol = "udp";
            f.service = "snmp";
            f.v[logged_in] = 0;
            f.v[src_bytes] = lognormal(4.2, 0.3);
            f.v[dst_bytes] = lognormal(4.5, 0.3);
            f.v[count] = count_around(3, 1, 20);
            f.v[srv_count] = f.v[count];
        } else {
            f.service = bern(0.5) ? "http" : "ftp_data";
            f.v[duration] = lognormal(5.0, 1.0);
            f.v[hot] = uniform_int(0, 5);
            f.v[count] = count_around(2, 1, 10);
            f.v[srv_count] = count_around(2, 1, 10);
            f.v[dst_host_count] = count_around(10, 1, 255);
            f.v[dst_host_srv_count] = count_around(10, 1, 255);
            f.v[dst_host_srv_diff_host_rate] = rate(0.3, 0.2);
        }
        f.v[same_srv_rate] = 1.0;
        return kind;
    }

    std::string u2r(Fields& f) {
        static const std::array<const char*, 4> kinds = {"buffer_overflow", "rootkit", "loadmodule", "perl"};
        const std::string kind = pick(kinds, std::array<double, 4>{0.6, 0.2, 0.1, 0.1});
        host_defaults(f);
        f.protocol = "tcp";
        f.service = bern(0.7) ? "telnet" : "ftp_data";
        f.v[duration] = lognormal(4.5, 1.0);
        f.v[logged_in] = 1;
        f.v[root_shell] = bern(0.7) ? 1 : 0;
        f.v[num_file_creations] = uniform_int(0, 4);
        f.v[num_shells] = bern(0.3) ? 1 : 0;
        f.v[hot] = uniform_int(0, 4);
        f.v[count] = 1;
        f.v[srv_count] = 1;
        f.v[same_srv_rate] = 1.0;
        f.v[dst_host_count] = count_around(10, 1, 255);
        return kind;
    }

    static std::string render(const Fields& f, const std::string& label, int difficulty) {
        std::string out;
        char buf[64];
        for (std::size_t pos = 0; pos < kFeatureCount; ++pos) {
            if (pos) out += ',';
            if (pos == 1) out += f.protocol;
            else if (pos == 2) out += f.service;
            else if (pos == 3) out += f.flag;
            else {
                const double v = f.v[pos];
                if (v == std::floor(v)) std::snprintf(buf, sizeof buf, "%.0f", v);
                else std::snprintf(buf, sizeof buf, "%.2f", v);
                out += buf;
            }
        }
        out += ',' + label + ',' + std::to_string(difficulty);
        return out;
    }

    std::mt19937_64 rng_;
};

/// Write `records` lines to `path`.
inline void write_file(const std::filesystem::path& path, std::size_t records, const Mix& mix, bool test_split,
                       std::uint64_t seed) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    Generator g(seed);
    for (std::size_t i = 0; i < records; ++i) out << g.record(g.draw_family(mix), test_split) << '\n';
}

struct CorpusSize {
    std::size_t train = 40000;
    std::size_t test = 8000;
};

/// Write KDDTrain+.txt, KDDTrain+_20Percent.txt, KDDTest+.txt and
/// KDDTest-21.txt into `dir`.
inline void write_corpus(const std::filesystem::path& dir, CorpusSize size = {}, std::uint64_t seed = 2024) {
    std::filesystem::create_directories(dir);
    write_file(dir / "KDDTrain+.txt", size.train, kTrainMix, false, seed);
    write_file(dir / "KDDTrain+_20Percent.txt", size.train / 5, kTrainMix, false, seed);
    write_file(dir / "KDDTest+.txt", size.test, kTestMix, true, seed + 1);
    write_file(dir / "KDDTest-21.txt", size.test / 2, kTestMix, true, seed + 2);
}

}  // namespace qsd::synthetic
