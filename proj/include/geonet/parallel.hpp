#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace geonet {

/// Worker threads for data-parallel loops (at least 1). Results never depend on it.
void set_num_workers(int n);
int num_workers();

/// Runs fn(i) for i in [0, n) on num_workers() threads. If any iteration
/// throws, the exception from the lowest failing index is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long>(n);
#pragma omp parallel for num_threads(num_workers()) schedule(static)
    for (long i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace geonet
