#pragma once

#include <cstddef>
#include <functional>

namespace dpp::cli {

/// Worker count: DPP_THREADS when set to a positive integer, else the
/// hardware concurrency; never more than `jobs`.
std::size_t worker_count(std::size_t jobs);

/// Runs body(0..count-1) across worker threads. The first exception thrown
/// by any job is rethrown after every worker has joined.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace dpp::cli
