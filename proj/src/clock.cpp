#include "masbus/clock.hpp"

#include <condition_variable>
#include <stop_token>
#include <vector>

namespace masbus {

WallClock::WallClock() : origin_(std::chrono::steady_clock::now()) {}

WallClock::~WallClock() {
    std::map<TimerId, std::unique_ptr<Timer>> timers;
    {
        std::lock_guard lock(mu_);
        timers.swap(timers_);
    }
}

std::int64_t WallClock::now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - origin_)
        .count();
}

Clock::TimerId WallClock::schedule_every(std::int64_t period_ms, TickFn fn) {
    auto timer = std::make_unique<Timer>();
    timer->thread = std::jthread([period_ms, fn = std::move(fn)](std::stop_token stop) {
        std::mutex m;
        std::condition_variable_any cv;
        auto period = std::chrono::milliseconds(period_ms);
        auto due = std::chrono::steady_clock::now() + period;
        for (std::int64_t tick = 0;; ++tick) {
            {
                std::unique_lock lock(m);
                cv.wait_until(lock, stop, due, [] { return false; });
                if (stop.stop_requested()) return;
            }
            fn(tick);
            due += period;
        }
    });
    std::lock_guard lock(mu_);
    TimerId id = next_id_++;
    timers_.emplace(id, std::move(timer));
    return id;
}

void WallClock::cancel(TimerId id) {
    std::unique_ptr<Timer> victim;
    {
        std::lock_guard lock(mu_);
        auto it = timers_.find(id);
        if (it == timers_.end()) return;
        victim = std::move(it->second);
        timers_.erase(it);
    }
    // jthread destructor requests stop and joins
}

std::int64_t SimulatedClock::now_ms() const {
    std::lock_guard lock(mu_);
    return now_;
}

Clock::TimerId SimulatedClock::schedule_every(std::int64_t period_ms, TickFn fn) {
    std::lock_guard lock(mu_);
    TimerId id = next_id_++;
    timers_.emplace(id, Timer{period_ms, now_ + period_ms, 0, std::make_shared<TickFn>(std::move(fn))});
    return id;
}

void SimulatedClock::cancel(TimerId id) {
    std::lock_guard lock(mu_);
    timers_.erase(id);
}

void SimulatedClock::advance(std::int64_t ms) {
    std::int64_t target;
    {
        std::lock_guard lock(mu_);
        target = now_ + ms;
    }
    for (;;) {
        std::vector<std::pair<std::shared_ptr<TickFn>, std::int64_t>> due;
        {
            std::lock_guard lock(mu_);
            std::int64_t earliest = target + 1;
            for (const auto& [id, t] : timers_) earliest = std::min(earliest, t.next_due);
            if (earliest > target) {
                now_ = target;
                return;
            }
            now_ = earliest;
            for (auto& [id, t] : timers_) {
                if (t.next_due != earliest) continue;
                due.emplace_back(t.fn, t.tick++);
                t.next_due += t.period_ms;
            }
        }
        for (auto& [fn, tick] : due) (*fn)(tick);
    }
}

}  // namespace masbus
