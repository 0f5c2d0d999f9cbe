#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace groupnav {

/// Small persistent worker pool with a deterministic-by-construction
/// parallel_for: tasks own disjoint output slots indexed by the loop
/// variable, so results never depend on which thread ran which item.
/// Size 1 (or n == 1) runs everything inline.
class ThreadPool {
public:
    explicit ThreadPool(int n_threads);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    int size() const { return static_cast<int>(workers_.size()) + 1; }

    /// Runs fn(0), ..., fn(n-1) across the pool and waits for all of them.
    /// Exceptions from fn propagate (first one wins).
    void parallel_for(int n, const std::function<void(int)>& fn);

    /// Threads to use when the caller passed 0 ("auto").
    static int resolve(int requested);

private:
    void worker_loop();

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_work_;
    std::condition_variable cv_done_;
    const std::function<void(int)>* job_ = nullptr;
    int job_size_ = 0;
    int next_item_ = 0;
    int in_flight_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
};

}  // namespace groupnav
