#pragma once

#include <cstddef>
#include <functional>

namespace bohmctx {

/// Worker count for ensemble loops: BOHMCTX_THREADS if set and positive,
/// otherwise the hardware concurrency.
std::size_t thread_count();

/// Splits [0, n) into contiguous chunks and runs `body(begin, end)` on up to
/// `threads` workers (0 = thread_count()). Work items must not share mutable
/// state; the partition never affects results.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace bohmctx
