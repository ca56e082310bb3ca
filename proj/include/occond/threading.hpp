#pragma once

#include <functional>

namespace occond {

/// requested > 0 wins; otherwise OCCOND_THREADS (if > 0), otherwise the
/// hardware concurrency.
int resolve_thread_count(int requested);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work items
/// are claimed dynamically, so body must not depend on execution order.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace occond
