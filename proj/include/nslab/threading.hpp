#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace nslab {

/**
 * Fixed-size worker pool for embarrassingly parallel jobs. Work items are
 * claimed by index from an atomic counter, each writes only to its own
 * preallocated slot, so results are identical for any worker count. Used
 * for independent experiment runs and diagnostics over field batches.
 */
class WorkerPool {
public:
    explicit WorkerPool(int nthreads) : nthreads_(nthreads < 1 ? 1 : nthreads) {}

    int thread_count() const { return nthreads_; }

    // Runs fn(i) for i in [0, count); blocks until all complete. Exceptions
    // are captured and the first (lowest index) is rethrown.
    void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) const {
        if (count == 0) return;
        if (nthreads_ == 1 || count == 1) {
            for (std::size_t i = 0; i < count; ++i) fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::mutex err_mutex;
        std::size_t err_index = count;
        std::exception_ptr err;
        auto body = [&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (i < err_index) {
                        err_index = i;
                        err = std::current_exception();
                    }
                }
            }
        };
        std::vector<std::thread> threads;
        int spawn = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(nthreads_), count));
        threads.reserve(static_cast<std::size_t>(spawn));
        for (int t = 0; t < spawn; ++t) threads.emplace_back(body);
        for (std::thread& t : threads) t.join();
        if (err) std::rethrow_exception(err);
    }

private:
    int nthreads_;
};

} // namespace nslab
