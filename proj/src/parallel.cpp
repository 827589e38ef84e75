#include "voxsynth/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "voxsynth/error.hpp"

namespace voxsynth {

void parallel_for(int workers, int tasks, const std::function<void(int)>& fn) {
    if (tasks <= 0) return;
    if (workers <= 1 || tasks == 1) {
        for (int t = 0; t < tasks; ++t) fn(t);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        const int n = std::min(workers, tasks);
        pool.reserve(static_cast<std::size_t>(n));
        for (int w = 0; w < n; ++w) {
            pool.emplace_back([&] {
                for (int t = next++; t < tasks; t = next++) {
                    try {
                        fn(t);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

int resolve_threads(int requested) {
    if (const char* env = std::getenv("SYNTH_THREADS"); env != nullptr && *env != '\0') {
        try {
            const int v = std::stoi(env);
            if (v >= 1) return v;
        } catch (const std::exception&) {
        }
        throw ValidationError(std::string("SYNTH_THREADS must be a positive integer, got '") + env + "'");
    }
    return requested < 1 ? 1 : requested;
}

}  // namespace voxsynth
