#include "dscopf/worker_pool.hpp"

#include <algorithm>
#include <exception>

namespace dscopf {

namespace {
// Below this many items per worker the hand-off costs more than the work.
constexpr std::size_t kMinItemsPerWorker = 16;
}  // namespace

std::size_t default_worker_count() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

WorkerPool::WorkerPool(std::size_t workers) : workers_(std::max<std::size_t>(1, workers)) {
  threads_.reserve(workers_ - 1);
  for (std::size_t id = 1; id < workers_; ++id) threads_.emplace_back([this, id] { worker_loop(id); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  start_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::run_chunk(std::size_t chunk) {
  const std::size_t begin = chunk * job_size_ / workers_;
  const std::size_t end = (chunk + 1) * job_size_ / workers_;
  for (std::size_t i = begin; i < end; ++i) (*job_)(i);
}

void WorkerPool::worker_loop(std::size_t id) {
  std::size_t seen = 0;
  for (;;) {
    {
      std::unique_lock lock(mutex_);
      start_.wait(lock, [&] { return stopping_ || generation_ != seen; });
      if (stopping_) return;
      seen = generation_;
    }
    std::exception_ptr err;
    try {
      run_chunk(id);
    } catch (...) {
      err = std::current_exception();
    }
    {
      std::lock_guard lock(mutex_);
      if (err && !error_) error_ = err;
      if (--pending_ == 0) done_.notify_one();
    }
  }
}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (workers_ == 1 || n < workers_ * kMinItemsPerWorker) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    job_size_ = n;
    job_ = &body;
    error_ = nullptr;
    pending_ = workers_ - 1;
    ++generation_;
  }
  start_.notify_all();

  std::exception_ptr err;
  try {
    run_chunk(0);
  } catch (...) {
    err = std::current_exception();
  }

  std::unique_lock lock(mutex_);
  done_.wait(lock, [&] { return pending_ == 0; });
  job_ = nullptr;
  if (!err) err = error_;
  if (err) std::rethrow_exception(err);
}

}  // namespace dscopf
