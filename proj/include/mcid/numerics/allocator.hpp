#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace mcid {

// Training allocates and frees many multi-megabyte activations per step.
// Keeping them on the heap instead of fresh mmap regions avoids repeated page
// faults. Process-wide; call once from main().
inline void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_TOP_PAD, 256 << 20);
#endif
}

}  // namespace mcid
