#pragma once

namespace udft::parallel {

/// Thread count used by the OpenMP kernels. 1 selects the serial reference path.
/// Initial value comes from UDFT_THREADS, falling back to the OpenMP default.
int num_threads();
void set_num_threads(int n);

/// True when a kernel should take its OpenMP path: more than one thread requested and
/// not already inside a parallel region (cells/classes parallelized one level up).
bool enabled();

}  // namespace udft::parallel
