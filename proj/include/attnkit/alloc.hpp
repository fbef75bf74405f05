#pragma once

#include <algorithm>
#include <cstddef>

namespace attnkit {

// Tracks bytes requested through the matrix allocation path. Used by the
// benchmark harness as a deterministic stand-in for device memory: unlike
// RSS it depends only on the allocation sequence, so identical seeds and
// configurations produce identical peaks.
class AllocCounter {
 public:
  void add(std::size_t bytes) {
    current_ += bytes;
    peak_ = std::max(peak_, current_);
  }

  void sub(std::size_t bytes) { current_ -= std::min(bytes, current_); }

  void reset() {
    current_ = 0;
    peak_ = 0;
  }

  std::size_t current_bytes() const { return current_; }
  std::size_t peak_bytes() const { return peak_; }

 private:
  std::size_t current_ = 0;
  std::size_t peak_ = 0;
};

namespace detail {

inline AllocCounter*& active_counter() {
  thread_local AllocCounter* counter = nullptr;
  return counter;
}

inline void account_alloc(std::size_t bytes) {
  if (AllocCounter* c = active_counter()) c->add(bytes);
}

inline void account_free(std::size_t bytes) {
  if (AllocCounter* c = active_counter()) c->sub(bytes);
}

}  // namespace detail

// Installs a counter for the current scope. A counter must be exclusively
// owned by one trial at a time; nesting restores the previous counter.
class AllocScope {
 public:
  explicit AllocScope(AllocCounter& counter)
      : previous_(detail::active_counter()) {
    detail::active_counter() = &counter;
  }

  ~AllocScope() { detail::active_counter() = previous_; }

  AllocScope(const AllocScope&) = delete;
  AllocScope& operator=(const AllocScope&) = delete;

 private:
  AllocCounter* previous_;
};

}  // namespace attnkit
