#pragma once

#include <bit>
#include <chrono>
#include <cstdint>
#include <functional>
#include <istream>
#include <mutex>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace affectrag {

// Exit-code-bearing error categories. The CLI maps DataError to 2 and
// TransportError to 3; anything else is treated as an internal failure.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class TransportError : public std::runtime_error {
public:
    explicit TransportError(const std::string& msg, bool retryable = true)
        : std::runtime_error(msg), retryable_(retryable) {}
    bool retryable() const { return retryable_; }

private:
    bool retryable_;
};

// --- hashing -------------------------------------------------------------

uint64_t fnv1a64(std::string_view data);
uint64_t fnv1a64(std::span<const uint8_t> data);
std::string hex64(uint64_t v);

// splitmix64: cheap stateless mixer used wherever we need a deterministic
// stream of pseudo-random words from a seed (mock providers, synthetic data).
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform double in [0,1) from a splitmix state.
inline double uniform01(uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller. Self-contained so mock embeddings are
// reproducible independent of the standard library's distribution internals.
double gaussian(uint64_t& state);

// --- strings -------------------------------------------------------------

std::string trim(std::string_view s);
std::string lowercase(std::string_view s);
std::vector<std::string> split_csv(std::string_view s, char sep = ',');

// --- little-endian binary io ----------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "binary artifact formats assume a little-endian host");

void write_u8(std::ostream& out, uint8_t v);
void write_u32(std::ostream& out, uint32_t v);
void write_u64(std::ostream& out, uint64_t v);
void write_f64(std::ostream& out, double v);
void write_string(std::ostream& out, std::string_view s);
void write_f32_array(std::ostream& out, std::span<const float> v);
void write_f64_array(std::ostream& out, std::span<const double> v);

uint8_t read_u8(std::istream& in);
uint32_t read_u32(std::istream& in);
uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
std::string read_string(std::istream& in);
void read_f32_array(std::istream& in, std::span<float> v);
void read_f64_array(std::istream& in, std::span<double> v);

void expect_magic(std::istream& in, std::string_view magic, const std::string& what);

// --- retries ----------------------------------------------------------------

struct RetryPolicy {
    int max_attempts = 5;
    int initial_delay_ms = 200;
    int max_delay_ms = 5000;
    uint64_t jitter_seed = 0;  // 0 = derive from clock
};

// Runs fn, retrying on retryable TransportError with exponential backoff and
// jitter. Non-retryable errors and exhaustion propagate.
void with_retries(const RetryPolicy& policy, const std::function<void()>& fn);

// Token bucket for request/token-per-minute ceilings. rate_per_minute == 0
// disables limiting. acquire() blocks until a token is available.
class TokenBucket {
public:
    explicit TokenBucket(double rate_per_minute = 0, double burst = 1);
    void acquire(double amount = 1.0);

private:
    double rate_per_sec_;
    double burst_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
};

// Runs fn(i) for i in [0, n) on up to max_inflight worker threads.
// Exceptions are captured; the first one rethrows after all workers join.
void parallel_for(size_t n, size_t max_inflight, const std::function<void(size_t)>& fn);

}  // namespace affectrag
