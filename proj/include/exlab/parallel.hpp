#pragma once

// Monte Carlo fan-out. Every path is keyed by its index, so results are
// identical for any worker count; the reduction happens in index order.

#include <omp.h>

#include <cstddef>
#include <exception>
#include <type_traits>
#include <vector>

namespace exlab {

enum class Exec { serial, parallel };

struct ExecPolicy {
    Exec mode = Exec::parallel;
    int workers = 0;  // 0: OpenMP default

    static ExecPolicy serial() { return {Exec::serial, 1}; }
    static ExecPolicy threads(int n) { return {Exec::parallel, n}; }
};

/// results[i] = f(i) for i in [0, n).
template <class F>
auto map_paths(std::size_t n, F&& f, ExecPolicy policy = {}) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
    using R = std::invoke_result_t<F&, std::size_t>;
    std::vector<R> out(n);
    if (policy.mode == Exec::serial || n < 2) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    const int workers = policy.workers > 0 ? policy.workers : omp_get_max_threads();
    std::exception_ptr failure;
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(exlab_map_paths_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace exlab
