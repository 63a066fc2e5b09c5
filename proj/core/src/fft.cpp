#include "gcedmd/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace gcedmd {

namespace {

struct PlanKey {
  std::vector<int> dims;
  int sign;
  bool in_place;
  bool operator<(const PlanKey& o) const {
    if (dims != o.dims) return dims < o.dims;
    if (sign != o.sign) return sign < o.sign;
    return in_place < o.in_place;
  }
};

std::mutex g_mutex;
std::map<PlanKey, fftw_plan> g_plans;

// Plans are created on scratch buffers with FFTW_UNALIGNED so execution on
// caller memory of any alignment is valid. FFTW_ESTIMATE keeps the algorithm
// choice independent of buffer contents (reproducible run to run).
fftw_plan plan_for(const PlanKey& key) {
  std::lock_guard<std::mutex> lock(g_mutex);
  auto it = g_plans.find(key);
  if (it != g_plans.end()) return it->second;
  std::size_t len = 1;
  for (int d : key.dims) len *= static_cast<std::size_t>(d);
  fftw_complex* a = fftw_alloc_complex(len);
  fftw_complex* b = key.in_place ? a : fftw_alloc_complex(len);
  fftw_plan p = fftw_plan_dft(static_cast<int>(key.dims.size()), key.dims.data(), a, b,
                              key.sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!key.in_place) fftw_free(b);
  fftw_free(a);
  g_plans.emplace(key, p);
  return p;
}

}  // namespace

void dft(const std::vector<int>& dims, int howmany, const std::complex<double>* in,
         std::complex<double>* out, int sign) {
  std::size_t len = 1;
  for (int d : dims) len *= static_cast<std::size_t>(d);
  if (len == 0 || howmany == 0) return;
  fftw_plan p = plan_for({dims, sign, in == out});
  for (int t = 0; t < howmany; ++t) {
    auto* src = reinterpret_cast<fftw_complex*>(
        const_cast<std::complex<double>*>(in + static_cast<std::size_t>(t) * len));
    auto* dst = reinterpret_cast<fftw_complex*>(out + static_cast<std::size_t>(t) * len);
    fftw_execute_dft(p, src, dst);
  }
}

}  // namespace gcedmd
