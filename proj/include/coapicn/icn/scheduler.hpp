#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <vector>

#include "coapicn/time.hpp"

namespace coapicn::icn {

/// Discrete-event clock. Events run in time order; equal times run in the
/// order they were scheduled.
class Scheduler {
public:
    using Task = std::function<void()>;

    SimTime now() const { return now_; }

    /// Scheduling in the past runs the task at the current time.
    void at(SimTime when, Task task);
    void after(SimTime delay, Task task) { at(now_ + delay, std::move(task)); }

    /// Runs every event with time <= `end`, then advances the clock to `end`.
    /// Returns the number of events run.
    std::size_t run_until(SimTime end);

    /// Runs until no events remain.
    std::size_t run();

    bool step();
    std::size_t pending() const { return queue_.size(); }
    std::optional<SimTime> next_time() const;

private:
    struct Event {
        SimTime when;
        std::uint64_t seq;
        Task task;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const
        {
            return a.when != b.when ? a.when > b.when : a.seq > b.seq;
        }
    };

    SimTime now_{0};
    std::uint64_t next_seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

}  // namespace coapicn::icn
