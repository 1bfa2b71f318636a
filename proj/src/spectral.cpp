#include "critmass/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>

namespace critmass {

namespace {

// FFTW planning is not thread-safe but executing a plan with the new-array
// interface is. Plans are created once per (dim, n, sign) under a lock and
// executed on caller-owned buffers. FFTW_ESTIMATE keeps plans deterministic.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    int dims[3] = {n, n, n};
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(n);
    auto* scratch = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(dim, dims, scratch, scratch, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    plans_.emplace(key, plan);
    return plan;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

 private:
  PlanCache() = default;
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void execute(const Grid& grid, std::span<cplx> data, int sign) {
  fftw_plan plan = PlanCache::instance().get(grid.dim(), grid.points_per_axis(), sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace

void forward_transform_inplace(const Grid& grid, std::span<cplx> data) {
  execute(grid, data, FFTW_FORWARD);
}

void inverse_transform_inplace(const Grid& grid, std::span<cplx> data) {
  execute(grid, data, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& v : data) v *= scale;
}

std::vector<cplx> forward_transform(const Grid& grid, std::span<const cplx> values) {
  std::vector<cplx> out(values.begin(), values.end());
  forward_transform_inplace(grid, out);
  return out;
}

std::vector<cplx> inverse_transform(const Grid& grid, std::span<const cplx> spectrum) {
  std::vector<cplx> out(spectrum.begin(), spectrum.end());
  inverse_transform_inplace(grid, out);
  return out;
}

}  // namespace critmass
