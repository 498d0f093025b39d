#pragma once

#include <chrono>
#include <cstdint>
#include <limits>

namespace sisdmdp {

using Clock = std::chrono::steady_clock;

class Stopwatch {
public:
    Stopwatch() : start_(Clock::now()) {}
    void restart() { start_ = Clock::now(); }
    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start_).count();
    }

private:
    Clock::time_point start_;
};

/// A wall-clock limit checked cooperatively at iteration boundaries.
/// A default-constructed deadline never expires.
class Deadline {
public:
    Deadline() = default;

    static Deadline never() { return Deadline{}; }
    static Deadline after(double seconds) {
        Deadline d;
        d.limited_ = true;
        if (seconds <= 0.0) {
            d.expires_ = Clock::time_point::min();
        } else {
            d.expires_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                            std::chrono::duration<double>(seconds));
        }
        return d;
    }

    bool limited() const { return limited_; }
    bool expired() const { return limited_ && Clock::now() >= expires_; }

    /// Throws BudgetExceeded if the deadline has passed.
    void check() const;

private:
    bool limited_ = false;
    Clock::time_point expires_{};
};

/// Arithmetic operation counter used to verify cost bounds in tests.
struct OpCounter {
    std::uint64_t ops = 0;
    void add(std::uint64_t n) { ops += n; }
};

} // namespace sisdmdp
