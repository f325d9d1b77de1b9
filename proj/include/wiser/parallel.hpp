#ifndef WISER_PARALLEL_HPP
#define WISER_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace wiser {

// WISER_THREADS when set, otherwise the hardware concurrency.
std::size_t default_thread_count();

// fn(i) for i in [0, count), possibly on worker threads. Call sites must
// write disjoint outputs; results are then independent of the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace wiser

#endif
