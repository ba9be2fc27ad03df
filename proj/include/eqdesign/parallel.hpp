#pragma once

#include <cstddef>
#include <functional>

namespace eqdesign {

/// Caps the worker pool used by parallel maps; 0 restores the hardware default.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Calls body(begin, end) on disjoint chunks of [0, n). Chunk boundaries depend
/// only on n and the thread count, so results written by index are deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace eqdesign
