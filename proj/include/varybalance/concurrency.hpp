#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <semaphore>

namespace vb {

// Global bound on in-flight provider calls, shared by rewriter and scorer.
class InflightLimiter {
public:
    explicit InflightLimiter(int max_inflight)
        : sem_(max_inflight > 0 ? max_inflight : 1) {}

    class Guard {
    public:
        explicit Guard(InflightLimiter* limiter) : limiter_(limiter) {
            if (limiter_) limiter_->sem_.acquire();
        }
        ~Guard() {
            if (limiter_) limiter_->sem_.release();
        }
        Guard(const Guard&) = delete;
        Guard& operator=(const Guard&) = delete;

    private:
        InflightLimiter* limiter_;
    };

private:
    std::counting_semaphore<> sem_;
};

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
// exception (by index order) is rethrown after all workers join, so
// callers never observe partially reported failures out of order.
void parallel_for_indexed(std::size_t n, unsigned workers,
                          const std::function<void(std::size_t)>& fn);

} // namespace vb
