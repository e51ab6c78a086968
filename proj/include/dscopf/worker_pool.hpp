#pragma once

#include <condition_variable>
#include <exception>
#include <cstddef>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace dscopf {

std::size_t default_worker_count();

/// Fixed set of threads executing fork-join loops. Each call to parallel_for
/// is a barrier: it returns only when every index has been processed. Index
/// ranges are split statically, so a given (n, workers) pair always maps the
/// same indices to the same chunk.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t size() const { return workers_; }

  /// Runs body(i) for i in [0, n). Small loops run on the calling thread.
  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

 private:
  void worker_loop(std::size_t id);
  void run_chunk(std::size_t chunk);

  std::size_t workers_;
  std::vector<std::thread> threads_;

  std::mutex mutex_;
  std::condition_variable start_;
  std::condition_variable done_;
  std::size_t generation_ = 0;
  std::size_t pending_ = 0;
  bool stopping_ = false;

  std::size_t job_size_ = 0;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::exception_ptr error_;
};

}  // namespace dscopf
