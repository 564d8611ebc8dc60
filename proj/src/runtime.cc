#include "blockgnn/runtime.h"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace blockgnn {

void ConfigureAllocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 32 * 1024 * 1024);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_TOP_PAD, 256 * 1024 * 1024);
#endif
}

}  // namespace blockgnn
