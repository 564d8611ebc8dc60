#pragma once

namespace blockgnn {

// Makes the C allocator keep freed large blocks in the heap. Training
// allocates and releases tens of megabytes of tensors per step; without
// this every step faults fresh zeroed pages in from the kernel.
// Process-wide; call once at startup. No-op outside glibc.
void ConfigureAllocator();

}  // namespace blockgnn
