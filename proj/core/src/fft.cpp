#include "radarnav/fft.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace radarnav::fft {
namespace {

// FFTW planning is not thread-safe, execution of an existing plan is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [size, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int size) {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(size); it != plans_.end()) return it->second;
    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(size));
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_1d(size, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("fftw: failed to create plan");
    plans_.emplace(size, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<int, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void forward(std::span<std::complex<double>> data) {
  if (data.empty()) return;
  fftw_plan plan = cache().get(static_cast<int>(data.size()));
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

void shift(std::span<std::complex<double>> data) {
  std::rotate(data.begin(), data.begin() + static_cast<std::ptrdiff_t>((data.size() + 1) / 2), data.end());
}

}  // namespace radarnav::fft
