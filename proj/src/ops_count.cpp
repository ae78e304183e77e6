#include "riszf/ops_count.hpp"

namespace riszf::ops {

namespace {
thread_local std::uint64_t g_count = 0;
}

void reset() { g_count = 0; }

std::uint64_t count() { return g_count; }

void add(std::uint64_t units) { g_count += units; }

}  // namespace riszf::ops
