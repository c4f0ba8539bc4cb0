#include "pdbench/core/exec.hpp"

#include <omp.h>

namespace pdbench {
namespace detail {

void run_openmp(std::size_t n, int jobs, void (*thunk)(void*, std::size_t), void* ctx,
                std::vector<std::exception_ptr>& errors) {
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long long i = 0; i < count; ++i) {
    try {
      thunk(ctx, static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
}

}  // namespace detail

int hardware_jobs() { return omp_get_num_procs(); }

}  // namespace pdbench
