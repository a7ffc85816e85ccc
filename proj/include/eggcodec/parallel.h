// Copyright 2026 The eggcodec Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef EGGCODEC_PARALLEL_H_
#define EGGCODEC_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace eggcodec {

// Worker count: EGGCODEC_THREADS when set to a positive integer, otherwise
// the hardware concurrency (at least 1).
int worker_count();

// Runs fn(0) ... fn(n - 1) on up to worker_count() threads. Every index runs
// even if one throws; the exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace eggcodec

#endif  // EGGCODEC_PARALLEL_H_
