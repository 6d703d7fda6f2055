#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "btprox/units.hpp"

namespace btprox {

/// Single-threaded discrete-event queue. Ties on time are broken by
/// priority (lower first), then by insertion order.
class EventLoop {
public:
    using Handler = std::function<void(SimTime)>;

    void schedule(SimTime at, int priority, Handler handler);

    /// Runs every event with time <= `end`, in order.
    void run_until(SimTime end);

    SimTime now() const { return now_; }
    bool empty() const { return queue_.empty(); }
    std::size_t pending() const { return queue_.size(); }
    /// Time of the earliest pending event; undefined when empty.
    SimTime next_time() const { return queue_.top().time; }

private:
    struct Entry {
        SimTime time;
        int priority;
        std::uint64_t order;
        Handler handler;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.time != b.time) return a.time > b.time;
            if (a.priority != b.priority) return a.priority > b.priority;
            return a.order > b.order;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
    std::uint64_t next_order_ = 0;
    SimTime now_{0};
};

}  // namespace btprox
