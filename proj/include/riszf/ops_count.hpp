#pragma once

#include <cstdint>

namespace riszf::ops {

// Arithmetic-cost accounting in dimension units.  Kernels charge an
// analytic count derived from their operand shapes (n^3 for a dense
// eigensolve, m*n^2 for a QR, ...), so the tally of a code path is a
// deterministic function of the matrix dimensions it touches.  Used to
// assert that the user-selection cost does not scale with the number of
// reflecting elements.  Per-thread.

void reset();
std::uint64_t count();
void add(std::uint64_t units);

}  // namespace riszf::ops
