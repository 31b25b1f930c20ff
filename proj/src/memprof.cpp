#include "tilegan/memprof.hpp"

#include <atomic>
#include <mutex>

namespace tilegan::memprof {

namespace {

std::atomic<std::size_t> g_live{0};
std::atomic<std::size_t> g_peak{0};
std::atomic<std::size_t> g_cap{0};

// Phase bookkeeping. Guarded by a mutex; the hot path only touches it when a
// phase is active, which happens in single-threaded profiling runs.
std::atomic<bool> g_phase_active{false};
std::mutex g_phase_mutex;
std::string g_phase_label;
std::size_t g_phase_peak = 0;
std::vector<PhaseSample> g_phase_samples;

void raise_peak(std::size_t live_now) {
  std::size_t prev = g_peak.load(std::memory_order_relaxed);
  while (prev < live_now &&
         !g_peak.compare_exchange_weak(prev, live_now, std::memory_order_relaxed)) {
  }
}

}  // namespace

CapExceeded::CapExceeded(std::size_t requested, std::size_t live, std::size_t cap)
    : std::runtime_error("tracked allocation of " + std::to_string(requested) +
                         " bytes would exceed cap of " + std::to_string(cap) +
                         " (live: " + std::to_string(live) + ")"),
      requested_(requested),
      live_(live),
      cap_(cap) {}

void on_alloc(std::size_t bytes) {
  const std::size_t cap = g_cap.load(std::memory_order_relaxed);
  if (cap != 0) {
    const std::size_t live = g_live.load(std::memory_order_relaxed);
    if (live + bytes > cap) throw CapExceeded(bytes, live, cap);
  }
  const std::size_t live_now = g_live.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  raise_peak(live_now);
  if (g_phase_active.load(std::memory_order_relaxed)) {
    std::lock_guard<std::mutex> lock(g_phase_mutex);
    if (live_now > g_phase_peak) g_phase_peak = live_now;
  }
}

void on_free(std::size_t bytes) {
  g_live.fetch_sub(bytes, std::memory_order_relaxed);
}

std::size_t live_bytes() { return g_live.load(std::memory_order_relaxed); }
std::size_t peak_bytes() { return g_peak.load(std::memory_order_relaxed); }

void reset_peak() { g_peak.store(g_live.load(std::memory_order_relaxed), std::memory_order_relaxed); }

void set_alloc_cap(std::size_t bytes) { g_cap.store(bytes, std::memory_order_relaxed); }
std::size_t alloc_cap() { return g_cap.load(std::memory_order_relaxed); }

void begin_phase(const std::string& label) {
  std::lock_guard<std::mutex> lock(g_phase_mutex);
  g_phase_label = label;
  g_phase_peak = g_live.load(std::memory_order_relaxed);
  g_phase_active.store(true, std::memory_order_relaxed);
}

void end_phase() {
  std::lock_guard<std::mutex> lock(g_phase_mutex);
  if (!g_phase_active.load(std::memory_order_relaxed)) return;
  g_phase_samples.push_back({g_phase_label, g_phase_peak});
  g_phase_active.store(false, std::memory_order_relaxed);
}

void mark_phase(const std::string& label) {
  end_phase();
  begin_phase(label);
}

bool phase_active() { return g_phase_active.load(std::memory_order_relaxed); }

std::vector<PhaseSample> take_phase_samples() {
  std::lock_guard<std::mutex> lock(g_phase_mutex);
  std::vector<PhaseSample> out;
  out.swap(g_phase_samples);
  return out;
}

}  // namespace tilegan::memprof
