// Copyright 2026 The physopt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace physopt {

// Worker count: PHYSOPT_THREADS if set and positive, else the hardware count.
int thread_count();

// Runs body(i) for i in [0, n). Each index writes only to its own slot, so
// results do not depend on the number of workers. The exception of the lowest
// failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace physopt
