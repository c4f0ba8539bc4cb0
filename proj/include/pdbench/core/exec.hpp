#pragma once

#include <cstddef>
#include <exception>
#include <memory>
#include <type_traits>
#include <vector>

namespace pdbench {

enum class Backend { Serial, OpenMP };

/// Execution policy for the data-parallel kernels.
///
/// Every kernel produces identical results under both backends: tasks own
/// their RNG streams and write to pre-sized output slots, so completion order
/// never reaches the reduction.
struct Exec {
  Backend backend = Backend::Serial;
  int jobs = 1;

  static Exec serial() { return {Backend::Serial, 1}; }
  static Exec openmp(int jobs = 0) { return {Backend::OpenMP, jobs}; }
};

namespace detail {
void run_openmp(std::size_t n, int jobs, void (*thunk)(void*, std::size_t), void* ctx,
                std::vector<std::exception_ptr>& errors);
}

/// Calls `body(i)` for i in [0, n). The first exception (lowest index) is
/// rethrown after all tasks finished.
template <class Body>
void parallel_for(const Exec& exec, std::size_t n, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  if (exec.backend == Backend::Serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    using B = std::remove_reference_t<Body>;
    detail::run_openmp(
        n, exec.jobs, [](void* ctx, std::size_t i) { (*static_cast<B*>(ctx))(i); },
        const_cast<void*>(static_cast<const void*>(std::addressof(body))), errors);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int hardware_jobs();

}  // namespace pdbench
