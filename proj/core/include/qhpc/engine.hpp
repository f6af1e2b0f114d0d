#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <utility>
#include <vector>

#include "qhpc/sim_time.hpp"

namespace qhpc {

// Deterministic discrete-event core. Events pop in lexicographic
// (fire_at, insertion seq) order, so simultaneous events replay in the order
// they were scheduled regardless of payload content.
template <typename Payload>
class EventQueue {
public:
    using EventId = std::uint64_t;

    // Enqueues payload at now + delay. Returns the insertion sequence number,
    // which doubles as the event id.
    EventId schedule(SimTime delay, Payload payload) {
        Entry e{now_ + delay, next_seq_++, std::move(payload)};
        EventId id = e.seq;
        heap_.push(std::move(e));
        return id;
    }

    // Pops the minimum event and advances the clock to its fire time.
    // Returns empty once the queue is drained.
    std::optional<std::pair<SimTime, Payload>> advance() {
        if (heap_.empty()) return std::nullopt;
        Entry top = heap_.top();
        heap_.pop();
        now_ = top.fire_at;
        return std::make_pair(top.fire_at, std::move(top.payload));
    }

    SimTime now() const { return now_; }
    std::size_t pending() const { return heap_.size(); }
    bool empty() const { return heap_.empty(); }

private:
    struct Entry {
        SimTime fire_at;
        EventId seq;
        Payload payload;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    SimTime now_{};
    EventId next_seq_ = 0;
};

}  // namespace qhpc
