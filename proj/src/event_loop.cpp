#include "btprox/event_loop.hpp"

#include "btprox/errors.hpp"

namespace btprox {

void EventLoop::schedule(SimTime at, int priority, Handler handler) {
    if (at < now_) {
        throw Error("cannot schedule an event in the past");
    }
    queue_.push(Entry{at, priority, next_order_++, std::move(handler)});
}

void EventLoop::run_until(SimTime end) {
    while (!queue_.empty() && queue_.top().time <= end) {
        Entry e = queue_.top();
        queue_.pop();
        now_ = e.time;
        e.handler(now_);
    }
}

}  // namespace btprox
