#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

namespace pd {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// RFC 3339 in UTC with millisecond precision, e.g. 2026-01-02T03:04:05.678Z.
std::string format_rfc3339(Timestamp t);
Timestamp parse_rfc3339(const std::string& text);

/// Sources of time and randomness, injectable so that tests can make store
/// contents reproducible.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() = 0;
};

class SystemClock final : public Clock {
 public:
  Timestamp now() override;
};

/// Starts at a fixed instant and advances by `step` on every call.
class SteppingClock final : public Clock {
 public:
  explicit SteppingClock(Timestamp start,
                         std::chrono::milliseconds step = std::chrono::milliseconds(1))
      : next_(start.time_since_epoch().count()), step_(step.count()) {}
  Timestamp now() override;

 private:
  std::atomic<std::int64_t> next_;
  std::int64_t step_;
};

/// Issues opaque identifiers and share tokens.
class IdSource {
 public:
  virtual ~IdSource() = default;
  virtual std::string new_id(const std::string& prefix) = 0;
  virtual std::string new_share_token() = 0;
};

/// Cryptographically random ids and tokens.
class RandomIdSource final : public IdSource {
 public:
  std::string new_id(const std::string& prefix) override;
  std::string new_share_token() override;
};

/// prefix-000001, prefix-000002, ... and tok-000001, ... for reproducible runs.
class SequentialIdSource final : public IdSource {
 public:
  std::string new_id(const std::string& prefix) override;
  std::string new_share_token() override;

 private:
  std::atomic<std::uint64_t> counter_{0};
  std::atomic<std::uint64_t> tokens_{0};
};

}  // namespace pd
