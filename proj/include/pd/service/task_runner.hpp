#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pd::service {

/// Small background executor for pipeline runs.
class TaskRunner {
 public:
  explicit TaskRunner(unsigned workers = 2);
  ~TaskRunner();
  TaskRunner(const TaskRunner&) = delete;
  TaskRunner& operator=(const TaskRunner&) = delete;

  void post(std::function<void()> task);

  /// Blocks until the queue is empty and no task is executing, or `timeout`
  /// passes. Returns true when idle.
  bool drain(std::chrono::milliseconds timeout = std::chrono::milliseconds::max());

  /// Stops accepting work, waits up to `timeout` for queued and in-flight
  /// tasks, then joins the workers.
  void shutdown(std::chrono::milliseconds timeout);

 private:
  void work();

  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<std::function<void()>> queue_;
  unsigned active_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

}  // namespace pd::service
