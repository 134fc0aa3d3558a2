#include "coapicn/icn/scheduler.hpp"

namespace coapicn::icn {

void Scheduler::at(SimTime when, Task task)
{
    queue_.push(Event{std::max(when, now_), next_seq_++, std::move(task)});
}

bool Scheduler::step()
{
    if (queue_.empty())
        return false;
    Event e = queue_.top();
    queue_.pop();
    now_ = e.when;
    e.task();
    return true;
}

std::size_t Scheduler::run_until(SimTime end)
{
    std::size_t n = 0;
    while (!queue_.empty() && queue_.top().when <= end) {
        step();
        ++n;
    }
    if (now_ < end)
        now_ = end;
    return n;
}

std::size_t Scheduler::run()
{
    std::size_t n = 0;
    while (step())
        ++n;
    return n;
}

std::optional<SimTime> Scheduler::next_time() const
{
    if (queue_.empty())
        return std::nullopt;
    return queue_.top().when;
}

}  // namespace coapicn::icn
