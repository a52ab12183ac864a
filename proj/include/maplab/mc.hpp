#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "maplab/rng.hpp"

namespace maplab {

// Runs task(stream, index) for every replicate in the plan. Each replicate
// owns the stream derived from (master seed, index), so results are identical
// for any worker count; output is ordered by replicate index.
template <class Task>
auto run_replicated(Task&& task, const SeedPlan& plan, unsigned workers = 0)
    -> std::vector<decltype(task(std::declval<RngStream&>(), std::size_t{0}))> {
    using Sample = decltype(task(std::declval<RngStream&>(), std::size_t{0}));
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(
        std::min<std::size_t>(workers, std::max<std::size_t>(plan.replicates, 1)));

    std::vector<Sample> results(plan.replicates);
    std::exception_ptr failure;
    std::size_t failed_index = 0;

    auto body = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            RngStream stream = plan.stream(i);
            try {
                results[i] = task(stream, i);
            } catch (...) {
                failure = std::current_exception();
                failed_index = i;
                return;
            }
        }
    };

    if (workers <= 1) {
        body(0, plan.replicates);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (plan.replicates + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            std::size_t begin = w * chunk;
            std::size_t end = std::min(plan.replicates, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(body, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    if (failure) {
        try {
            std::rethrow_exception(failure);
        } catch (const std::exception& e) {
            throw std::runtime_error("replicate " + std::to_string(failed_index) +
                                     " failed: " + e.what());
        }
    }
    return results;
}

}  // namespace maplab
