#include "affectrag/util.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstring>
#include <thread>

namespace affectrag {

uint64_t fnv1a64(std::string_view data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

uint64_t fnv1a64(std::span<const uint8_t> data) {
    return fnv1a64(std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
}

std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

double gaussian(uint64_t& state) {
    // Box-Muller; discard the second variate to keep the stream position simple.
    double u1 = uniform01(state);
    double u2 = uniform01(state);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string> split_csv(std::string_view s, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (start <= s.size()) {
        size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(trim(s.substr(start)));
            break;
        }
        parts.push_back(trim(s.substr(start, pos - start)));
        start = pos + 1;
    }
    while (!parts.empty() && parts.back().empty()) parts.pop_back();
    return parts;
}

void write_u8(std::ostream& out, uint8_t v) {
    out.put(static_cast<char>(v));
}

void write_u32(std::ostream& out, uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.write(buf, 4);
}

void write_u64(std::ostream& out, uint64_t v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.write(buf, 8);
}

void write_f64(std::ostream& out, double v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.write(buf, 8);
}

void write_string(std::ostream& out, std::string_view s) {
    write_u32(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_f32_array(std::ostream& out, std::span<const float> v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(float)));
}

void write_f64_array(std::ostream& out, std::span<const double> v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

static void require_good(std::istream& in, const char* what) {
    if (!in.good()) throw DataError(std::string("truncated or unreadable input while reading ") + what);
}

uint8_t read_u8(std::istream& in) {
    char c;
    in.get(c);
    require_good(in, "u8");
    return static_cast<uint8_t>(c);
}

uint32_t read_u32(std::istream& in) {
    char buf[4];
    in.read(buf, 4);
    require_good(in, "u32");
    uint32_t v;
    std::memcpy(&v, buf, 4);
    return v;
}

uint64_t read_u64(std::istream& in) {
    char buf[8];
    in.read(buf, 8);
    require_good(in, "u64");
    uint64_t v;
    std::memcpy(&v, buf, 8);
    return v;
}

double read_f64(std::istream& in) {
    char buf[8];
    in.read(buf, 8);
    require_good(in, "f64");
    double v;
    std::memcpy(&v, buf, 8);
    return v;
}

std::string read_string(std::istream& in) {
    uint32_t len = read_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    require_good(in, "string");
    return s;
}

void read_f32_array(std::istream& in, std::span<float> v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(float)));
    require_good(in, "f32 array");
}

void read_f64_array(std::istream& in, std::span<double> v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    require_good(in, "f64 array");
}

void expect_magic(std::istream& in, std::string_view magic, const std::string& what) {
    std::string got(magic.size(), '\0');
    in.read(got.data(), static_cast<std::streamsize>(magic.size()));
    if (!in.good() || got != magic) {
        throw DataError(what + ": bad magic (not a " + what + " file)");
    }
}

void with_retries(const RetryPolicy& policy, const std::function<void()>& fn) {
    uint64_t jitter_state = policy.jitter_seed != 0
        ? policy.jitter_seed
        : static_cast<uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
    int delay_ms = policy.initial_delay_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            fn();
            return;
        } catch (const TransportError& e) {
            if (!e.retryable() || attempt >= policy.max_attempts) throw;
            int jitter = static_cast<int>(uniform01(jitter_state) * delay_ms / 2);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms + jitter));
            delay_ms = std::min(delay_ms * 2, policy.max_delay_ms);
        }
    }
}

TokenBucket::TokenBucket(double rate_per_minute, double burst)
    : rate_per_sec_(rate_per_minute / 60.0),
      burst_(burst),
      tokens_(burst),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire(double amount) {
    if (rate_per_sec_ <= 0) return;
    std::unique_lock<std::mutex> lock(mu_);
    for (;;) {
        auto now = std::chrono::steady_clock::now();
        tokens_ = std::min(burst_, tokens_ + rate_per_sec_ * std::chrono::duration<double>(now - last_).count());
        last_ = now;
        if (tokens_ >= amount) {
            tokens_ -= amount;
            return;
        }
        double wait_s = (amount - tokens_) / rate_per_sec_;
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
        lock.lock();
    }
}

void parallel_for(size_t n, size_t max_inflight, const std::function<void(size_t)>& fn) {
    if (n == 0) return;
    size_t workers = std::min(std::max<size_t>(1, max_inflight), n);
    if (workers == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> g(err_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace affectrag
