#include "nort/alloc_audit.hpp"

namespace nort::audit {

Counters& counters() {
    static Counters c;
    return c;
}

void charge(std::int64_t bytes) {
    if (bytes <= 0)
        return;
    Counters& c = counters();
    std::int64_t now = c.current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
    std::int64_t prev = c.peak.load(std::memory_order_relaxed);
    while (now > prev && !c.peak.compare_exchange_weak(prev, now, std::memory_order_relaxed)) {
    }
}

void discharge(std::int64_t bytes) {
    if (bytes <= 0)
        return;
    counters().current.fetch_sub(bytes, std::memory_order_relaxed);
}

std::int64_t current_bytes() { return counters().current.load(std::memory_order_relaxed); }
std::int64_t peak_bytes() { return counters().peak.load(std::memory_order_relaxed); }

void reset_peak() { counters().peak.store(current_bytes(), std::memory_order_relaxed); }

} // namespace nort::audit
