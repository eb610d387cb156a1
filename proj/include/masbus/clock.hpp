#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

namespace masbus {

/// Time source shared by timer endpoints and scenario stubs. Timers receive a
/// zero-based tick index.
class Clock {
public:
    using TimerId = std::uint64_t;
    using TickFn = std::function<void(std::int64_t tick)>;

    virtual ~Clock() = default;
    virtual std::int64_t now_ms() const = 0;
    virtual bool simulated() const = 0;
    virtual TimerId schedule_every(std::int64_t period_ms, TickFn fn) = 0;
    /// Blocks until the timer's callback is no longer running.
    virtual void cancel(TimerId id) = 0;
};

class WallClock final : public Clock {
public:
    WallClock();
    ~WallClock() override;

    std::int64_t now_ms() const override;
    bool simulated() const override { return false; }
    TimerId schedule_every(std::int64_t period_ms, TickFn fn) override;
    void cancel(TimerId id) override;

private:
    struct Timer {
        std::jthread thread;
    };

    std::chrono::steady_clock::time_point origin_;
    std::mutex mu_;
    std::map<TimerId, std::unique_ptr<Timer>> timers_;
    TimerId next_id_ = 1;
};

/// Logical clock: time only moves on advance(), which fires every due timer
/// on the calling thread in (due time, registration order).
class SimulatedClock final : public Clock {
public:
    std::int64_t now_ms() const override;
    bool simulated() const override { return true; }
    TimerId schedule_every(std::int64_t period_ms, TickFn fn) override;
    void cancel(TimerId id) override;

    void advance(std::int64_t ms);

private:
    struct Timer {
        std::int64_t period_ms;
        std::int64_t next_due;
        std::int64_t tick = 0;
        std::shared_ptr<TickFn> fn;
    };

    mutable std::mutex mu_;
    std::int64_t now_ = 0;
    std::map<TimerId, Timer> timers_;
    TimerId next_id_ = 1;
};

}  // namespace masbus
