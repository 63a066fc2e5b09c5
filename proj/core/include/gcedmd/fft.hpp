#pragma once

#include <complex>
#include <vector>

namespace gcedmd {

inline constexpr int kDftForward = -1;   // exp(-2*pi*i*<g,k>/n) convention
inline constexpr int kDftBackward = +1;

// Unnormalized multi-dimensional complex DFT (FFTW backend). dims[0] is the
// slowest-varying index, matching row-major flattening of group element ids
// and grid points. Executes `howmany` independent transforms at contiguous
// blocks of len = prod(dims): transform t reads in + t*len, writes out + t*len.
// in == out is allowed. Plans are cached per (dims, sign) and created with
// FFTW_ESTIMATE so the chosen algorithm is input-independent and runs are
// bit-reproducible.
void dft(const std::vector<int>& dims, int howmany, const std::complex<double>* in,
         std::complex<double>* out, int sign);

}  // namespace gcedmd
