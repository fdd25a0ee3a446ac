#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace hrvbench {

enum class ErrorCode {
    MalformedLine,
    NonMonotonicTime,
    EmptyRecording,
    TooFewBeats,
    TooFewIntervals,
    SpanTooShort,
    NoValidNeighbors,
    NoAnchors,
    InvalidParams,
    DegenerateClass,
    SingularCovariance,
    ArityMismatch,
    TooSmall,
    FoldDegenerate,
    SingleClass,
    DegenerateCell,
    Schema,
    Io,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::MalformedLine: return "MalformedLine";
        case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
        case ErrorCode::EmptyRecording: return "EmptyRecording";
        case ErrorCode::TooFewBeats: return "TooFewBeats";
        case ErrorCode::TooFewIntervals: return "TooFewIntervals";
        case ErrorCode::SpanTooShort: return "SpanTooShort";
        case ErrorCode::NoValidNeighbors: return "NoValidNeighbors";
        case ErrorCode::NoAnchors: return "NoAnchors";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::DegenerateClass: return "DegenerateClass";
        case ErrorCode::SingularCovariance: return "SingularCovariance";
        case ErrorCode::ArityMismatch: return "ArityMismatch";
        case ErrorCode::TooSmall: return "TooSmall";
        case ErrorCode::FoldDegenerate: return "FoldDegenerate";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::DegenerateCell: return "DegenerateCell";
        case ErrorCode::Schema: return "Schema";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Library-wide exception. `line()` is set for errors tied to an input line.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what, std::optional<std::size_t> line = std::nullopt)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), line_(line) {}

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> line_;
};

// ------------------------------------------------------------
// random numbers
// ------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a parent seed and a list of tags.
inline std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = splitmix64(parent);
    for (auto t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
    return h;
}

inline std::uint64_t hash_string(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// xoshiro256** with hand-rolled distributions, so streams are identical
/// across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) {
            x = splitmix64(x);
            s = x;
        }
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n).
    std::size_t below(std::size_t n) {
        if (n == 0) return 0;
        // Lemire's multiply-shift with rejection
        std::uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - static_cast<std::uint64_t>(n)) % n;
            while (low < threshold) {
                x = next();
                m = static_cast<__uint128_t>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::size_t>(m >> 64);
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    double exponential(double rate) {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return -std::log(u) / rate;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4]{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// ------------------------------------------------------------
// small numeric helpers
// ------------------------------------------------------------

inline double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

/// Variance with divisor n - ddof.
inline double variance(std::span<const double> x, int ddof) {
    if (x.size() <= static_cast<std::size_t>(ddof)) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - ddof);
}

inline double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// Six significant digits, as used in every CSV the tools emit.
inline std::string format_g6(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string format_g6(const std::optional<double>& v) { return v ? format_g6(*v) : std::string{}; }

/// Runs fn(0..n-1) on up to `jobs` threads. Results must be written by index
/// so output never depends on scheduling. The first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace hrvbench
