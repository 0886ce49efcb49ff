#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsd {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

// Raised when an internal self-check (e.g. QUBO/Ising agreement) fails.
struct InternalError : Error {
    using Error::Error;
};

// Process-wide warning sink. The default prints to std::clog; the pipeline
// installs a collector so warnings end up in the report as well.
class Warnings {
public:
    using Sink = std::function<void(const std::string&)>;

    static void emit(const std::string& msg) {
        std::lock_guard lock(mutex());
        if (auto& s = sink()) {
            s(msg);
        } else {
            std::clog << "warning: " << msg << '\n';
        }
    }

    static Sink exchange(Sink next) {
        std::lock_guard lock(mutex());
        Sink prev = std::move(sink());
        sink() = std::move(next);
        return prev;
    }

private:
    static Sink& sink() {
        static Sink s;
        return s;
    }
    static std::mutex& mutex() {
        static std::mutex m;
        return m;
    }
};

inline void warn(const std::string& msg) { Warnings::emit(msg); }

// RAII capture of warnings into a vector, optionally forwarding to the
// previously installed sink.
class WarningCollector {
public:
    explicit WarningCollector(bool forward = true) {
        prev_ = Warnings::exchange([this, forward](const std::string& m) {
            messages_.push_back(m);
            if (forward) {
                if (prev_) prev_(m);
                else std::clog << "warning: " << m << '\n';
            }
        });
    }
    ~WarningCollector() { Warnings::exchange(std::move(prev_)); }
    WarningCollector(const WarningCollector&) = delete;
    WarningCollector& operator=(const WarningCollector&) = delete;

    const std::vector<std::string>& messages() const { return messages_; }

private:
    std::vector<std::string> messages_;
    Warnings::Sink prev_;
};

}  // namespace qsd
