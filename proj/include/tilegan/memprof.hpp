#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace tilegan::memprof {

/// Thrown by the allocation hook when a configured byte cap would be exceeded.
class CapExceeded : public std::runtime_error {
public:
  CapExceeded(std::size_t requested, std::size_t live, std::size_t cap);
  std::size_t requested() const { return requested_; }
  std::size_t live() const { return live_; }
  std::size_t cap() const { return cap_; }

private:
  std::size_t requested_;
  std::size_t live_;
  std::size_t cap_;
};

// Allocation hooks. Every tensor data/gradient buffer in the library routes
// through these; nothing else does (image bitmaps are deliberately outside
// the tracked scope).
void on_alloc(std::size_t bytes);
void on_free(std::size_t bytes);

std::size_t live_bytes();
std::size_t peak_bytes();

/// Resets the high-water mark to the current live byte count.
void reset_peak();

/// Caps tracked allocations; an allocation pushing live bytes above the cap
/// throws CapExceeded before the counter is bumped. 0 disables the cap.
void set_alloc_cap(std::size_t bytes);
std::size_t alloc_cap();

// Labeled phase sampling. Only meaningful in single-threaded profiling runs;
// the counters themselves stay valid under concurrency.
void begin_phase(const std::string& label);
void mark_phase(const std::string& label);  // end current (if any), begin new
void end_phase();
bool phase_active();
struct PhaseSample {
  std::string label;
  std::size_t peak_bytes;  // high-water mark while the phase was active
};
std::vector<PhaseSample> take_phase_samples();

/// STL-compatible allocator that reports through the hooks above.
template <typename T>
struct TrackedAllocator {
  using value_type = T;
  TrackedAllocator() = default;
  template <typename U>
  TrackedAllocator(const TrackedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    on_alloc(n * sizeof(T));
    return std::allocator<T>().allocate(n);
  }
  void deallocate(T* p, std::size_t n) {
    std::allocator<T>().deallocate(p, n);
    on_free(n * sizeof(T));
  }
  bool operator==(const TrackedAllocator&) const { return true; }
};

using FloatBuf = std::vector<float, TrackedAllocator<float>>;

}  // namespace tilegan::memprof
