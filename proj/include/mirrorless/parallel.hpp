#pragma once

// Index-ordered map over a grid. The OpenMP path and the serial reference
// call the same per-index function, so results agree bit for bit.

#include "mirrorless/common.hpp"

#include <cstddef>
#include <exception>
#include <optional>
#include <type_traits>
#include <vector>

#include <omp.h>

namespace mirrorless {

inline void set_thread_count(int n)
{
    if (n > 0)
        omp_set_num_threads(n);
}

inline int thread_count() { return omp_get_max_threads(); }

template <class F>
auto map_indices(std::size_t n, F&& f, Execution exec)
    -> std::vector<std::invoke_result_t<F&, std::size_t>>
{
    using R = std::invoke_result_t<F&, std::size_t>;
    std::vector<R> out;
    out.reserve(n);
    if (exec == Execution::Serial) {
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(f(i));
        return out;
    }

    std::vector<std::optional<R>> slots(n);
    std::exception_ptr first_error;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < count; ++i) {
        try {
            slots[static_cast<std::size_t>(i)].emplace(f(static_cast<std::size_t>(i)));
        } catch (...) {
#pragma omp critical(mirrorless_map_error)
            if (!first_error)
                first_error = std::current_exception();
        }
    }
    if (first_error)
        std::rethrow_exception(first_error);
    for (auto& s : slots)
        out.push_back(std::move(*s));
    return out;
}

} // namespace mirrorless
