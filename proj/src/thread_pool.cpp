#include "groupnav/thread_pool.hpp"

#include <algorithm>

namespace groupnav {

int ThreadPool::resolve(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

ThreadPool::ThreadPool(int n_threads) {
    const int n = std::max(1, n_threads);
    workers_.reserve(static_cast<size_t>(n - 1));
    for (int i = 0; i < n - 1; ++i)
        workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard lock(mu_);
        stop_ = true;
    }
    cv_work_.notify_all();
    for (auto& w : workers_) w.join();
}

void ThreadPool::worker_loop() {
    for (;;) {
        std::unique_lock lock(mu_);
        cv_work_.wait(lock, [this] { return stop_ || (job_ && next_item_ < job_size_); });
        if (stop_) return;
        while (job_ && next_item_ < job_size_) {
            const int item = next_item_++;
            ++in_flight_;
            lock.unlock();
            try {
                (*job_)(item);
            } catch (...) {
                lock.lock();
                if (!error_) error_ = std::current_exception();
                --in_flight_;
                cv_done_.notify_all();
                continue;
            }
            lock.lock();
            --in_flight_;
            cv_done_.notify_all();
        }
    }
}

void ThreadPool::parallel_for(int n, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    if (workers_.empty() || n == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::unique_lock lock(mu_);
    job_ = &fn;
    job_size_ = n;
    next_item_ = 0;
    error_ = nullptr;
    cv_work_.notify_all();
    // the calling thread chips in
    while (next_item_ < job_size_) {
        const int item = next_item_++;
        ++in_flight_;
        lock.unlock();
        try {
            fn(item);
        } catch (...) {
            lock.lock();
            if (!error_) error_ = std::current_exception();
            --in_flight_;
            continue;
        }
        lock.lock();
        --in_flight_;
    }
    cv_done_.wait(lock, [this] { return in_flight_ == 0; });
    job_ = nullptr;
    job_size_ = 0;
    if (error_) std::rethrow_exception(error_);
}

}  // namespace groupnav
