#pragma once

#include <cstddef>
#include <functional>

namespace seqhygan {

// Worker count used by parallel_for. Resolution order: explicit
// set_thread_count() override, then the SEQ_HYGAN_THREADS environment
// variable, then hardware concurrency.
int thread_count();
void set_thread_count(int n);

// Runs fn over contiguous chunks [lo, hi) covering [0, n). Results must not
// depend on the chunking: every index writes only its own outputs, so the
// outcome is bit-identical for any worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace seqhygan
