#include "numpar/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace numpar {

int worker_count(int requested) {
    int count = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (count < 1) count = 1;
    if (const char* env = std::getenv("NUMPAR_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1 && cap < count) count = cap;
    }
    return count;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    const int workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count(threads)), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_index = n;
    std::exception_ptr error;

    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (i < failed_index) {
                    failed_index = i;
                    error = std::current_exception();
                }
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace numpar
