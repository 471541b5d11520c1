#include "gwf/fft.hpp"

#include <fftw3.h>

#include <atomic>
#include <map>
#include <mutex>
#include <tuple>

namespace gwf::fft {
namespace {

// Plan cache keyed by (length, batch count, sign, rigor). FFTW planning is
// not thread-safe, and FFTW_UNALIGNED lets one plan serve any buffer address.
std::mutex g_mutex;
std::map<std::tuple<int, int, int, int>, fftw_plan> g_plans;
std::atomic<bool> g_measured{false};

fftw_plan plan_for(int n, int howmany, int sign) {
  const int rigor = g_measured.load() ? 1 : 0;
  std::lock_guard<std::mutex> lock(g_mutex);
  auto key = std::make_tuple(n, howmany, sign, rigor);
  auto it = g_plans.find(key);
  if (it != g_plans.end()) return it->second;
  // plan on scratch: measured planning overwrites the arrays it probes
  auto* scratch = static_cast<fftw_complex*>(
      fftw_malloc(sizeof(fftw_complex) * static_cast<size_t>(n) * howmany));
  if (!scratch) throw std::bad_alloc();
  unsigned flags = (rigor ? FFTW_MEASURE : FFTW_ESTIMATE) | FFTW_UNALIGNED;
  fftw_plan p = fftw_plan_many_dft(1, &n, howmany, scratch, nullptr, 1, n,
                                   scratch, nullptr, 1, n, sign, flags);
  fftw_free(scratch);
  if (!p) throw std::runtime_error("fftw plan creation failed");
  g_plans.emplace(key, p);
  return p;
}

}  // namespace

void set_plan_rigor_measured(bool measured) { g_measured.store(measured); }

void dft_inplace(CVec& v, int sign) {
  auto* d = reinterpret_cast<fftw_complex*>(v.data());
  fftw_execute_dft(plan_for(static_cast<int>(v.size()), 1, sign), d, d);
}

void dft_columns_inplace(CMat& m, int sign) {
  if (m.size() == 0) return;
  dft_raw(m.data(), static_cast<int>(m.rows()), static_cast<int>(m.cols()),
          sign);
}

void dft_raw(cd* data, int n, int howmany, int sign) {
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan_for(n, howmany, sign), d, d);
}

void dft2_inplace(CMat& m, int sign) {
  dft_columns_inplace(m, sign);
  m.transposeInPlace();
  dft_columns_inplace(m, sign);
  m.transposeInPlace();
}

void clear_plan_cache() {
  std::lock_guard<std::mutex> lock(g_mutex);
  for (auto& [key, p] : g_plans) fftw_destroy_plan(p);
  g_plans.clear();
}

}  // namespace gwf::fft
