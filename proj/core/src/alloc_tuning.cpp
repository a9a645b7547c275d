// Training allocates and frees large activation buffers every batch. With
// glibc defaults those land in per-allocation mmaps, so each batch pays a
// full map/unmap + page-fault cycle. Keeping them on the heap removes that
// system-time cost without changing any numeric behavior.

#ifdef __GLIBC__
#include <malloc.h>

namespace {

struct MallocTuning {
    MallocTuning() {
        mallopt(M_MMAP_THRESHOLD, 512 * 1024 * 1024);
        mallopt(M_TRIM_THRESHOLD, 512 * 1024 * 1024);
    }
};

const MallocTuning tuning{};

}  // namespace
#endif
