#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>

namespace nort::audit {

// Global byte counters for the solver's auxiliary working memory.
// The owning types charge/discharge their heap buffers here so tests can
// assert that no O(I^pi) buffer ever appears on the production path.
struct Counters {
    std::atomic<std::int64_t> current{0};
    std::atomic<std::int64_t> peak{0};
};

Counters& counters();

void charge(std::int64_t bytes);
void discharge(std::int64_t bytes);

std::int64_t current_bytes();
std::int64_t peak_bytes();
void reset_peak(); // peak := current

// RAII charge held by a buffer-owning object. Movable, not copyable.
class Charge {
  public:
    Charge() = default;
    explicit Charge(std::int64_t bytes) : bytes_(bytes) { charge(bytes_); }
    Charge(const Charge&) = delete;
    Charge& operator=(const Charge&) = delete;
    Charge(Charge&& o) noexcept : bytes_(o.bytes_) { o.bytes_ = 0; }
    Charge& operator=(Charge&& o) noexcept {
        if (this != &o) {
            discharge(bytes_);
            bytes_ = o.bytes_;
            o.bytes_ = 0;
        }
        return *this;
    }
    ~Charge() { discharge(bytes_); }

    void resize(std::int64_t bytes) {
        discharge(bytes_);
        bytes_ = bytes;
        charge(bytes_);
    }
    std::int64_t bytes() const { return bytes_; }

  private:
    std::int64_t bytes_ = 0;
};

} // namespace nort::audit
