#include "pd/service/task_runner.hpp"

#include <spdlog/spdlog.h>

namespace pd::service {

TaskRunner::TaskRunner(unsigned workers) {
  for (unsigned i = 0; i < std::max(1u, workers); ++i) {
    threads_.emplace_back([this] { work(); });
  }
}

TaskRunner::~TaskRunner() { shutdown(std::chrono::seconds(10)); }

void TaskRunner::post(std::function<void()> task) {
  {
    std::lock_guard g(mu_);
    if (stopping_) return;
    queue_.push_back(std::move(task));
  }
  cv_.notify_one();
}

bool TaskRunner::drain(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  auto idle = [&] { return queue_.empty() && active_ == 0; };
  if (timeout == std::chrono::milliseconds::max()) {
    idle_cv_.wait(lock, idle);
    return true;
  }
  return idle_cv_.wait_for(lock, timeout, idle);
}

void TaskRunner::shutdown(std::chrono::milliseconds timeout) {
  if (threads_.empty()) return;
  drain(timeout);
  {
    std::lock_guard g(mu_);
    stopping_ = true;
    queue_.clear();
  }
  cv_.notify_all();
  for (auto& t : threads_) t.join();
  threads_.clear();
}

void TaskRunner::work() {
  while (true) {
    std::function<void()> task;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_ && queue_.empty()) return;
      task = std::move(queue_.front());
      queue_.pop_front();
      ++active_;
    }
    try {
      task();
    } catch (const std::exception& e) {
      spdlog::error("background task failed: {}", e.what());
    }
    {
      std::lock_guard g(mu_);
      --active_;
    }
    idle_cv_.notify_all();
  }
}

}  // namespace pd::service
