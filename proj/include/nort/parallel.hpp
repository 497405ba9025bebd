#pragma once

namespace nort {

// Execution policy for the product kernels. Both paths compute every output
// element by the same fixed-order serial sum, so results are bit-identical;
// the serial path exists as a reference for tests and benchmarks.
enum class Exec { serial, parallel };

// Worker thread count for Exec::parallel (OpenMP). n <= 0 restores the
// runtime default.
void set_threads(int n);
int threads();

} // namespace nort
