#pragma once
// Deterministic FFTW wrapper: cached in-place complex transforms. Plans use
// FFTW_ESTIMATE by default, so plan selection (and therefore the exact
// floating-point output) is reproducible run to run. Long-running batch jobs
// may opt into measured planning; that trades bit-reproducibility across
// processes for speed and must stay off anywhere outputs are hashed.

#include "gwf/core.hpp"

namespace gwf::fft {

inline constexpr int kForward = -1;   // e^{-2 pi i k n / N}
inline constexpr int kBackward = +1;  // unnormalized inverse

void set_plan_rigor_measured(bool measured);

void dft_inplace(CVec& v, int sign);

// Transform every column of m (length rows()) with one batched plan.
void dft_columns_inplace(CMat& m, int sign);

// Batched in-place transform on a raw contiguous column-major block.
void dft_raw(cd* data, int n, int howmany, int sign);

// Full 2-D transform: columns, then rows.
void dft2_inplace(CMat& m, int sign);

void clear_plan_cache();

}  // namespace gwf::fft
