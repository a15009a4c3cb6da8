#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace degrade {

/// Runs `task(worker, index)` for every index in [0, count) on `workers`
/// threads. Indices are handed out in increasing order. The first exception
/// stops further hand-out and is rethrown once every thread has joined.
template <typename Task>
void parallel_for(std::size_t count, std::size_t workers, Task&& task) {
	if (count == 0)
		return;
	workers = std::max<std::size_t>(1, std::min(workers, count));

	std::atomic<std::size_t> next{0};
	std::atomic<bool> stop{false};
	std::exception_ptr error;
	std::mutex error_mutex;

	auto body = [&](std::size_t worker) {
		for (;;) {
			if (stop.load(std::memory_order_relaxed))
				return;
			const std::size_t index = next.fetch_add(1, std::memory_order_relaxed);
			if (index >= count)
				return;
			try {
				task(worker, index);
			} catch (...) {
				std::lock_guard lock(error_mutex);
				if (!error)
					error = std::current_exception();
				stop = true;
				return;
			}
		}
	};

	if (workers == 1) {
		body(0);
	} else {
		std::vector<std::jthread> threads;
		threads.reserve(workers);
		for (std::size_t w = 0; w < workers; ++w)
			threads.emplace_back(body, w);
	}
	if (error)
		std::rethrow_exception(error);
}

}  // namespace degrade
