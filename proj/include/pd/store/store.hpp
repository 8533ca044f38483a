#pragma once

#include "pd/common/clock.hpp"
#include "pd/common/error.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pd::store {

enum class RecordKind { bot, version, test_case, correction, run, profile };

std::string_view to_string(RecordKind k);
std::optional<RecordKind> parse_record_kind(std::string_view text);

/// Versions and corrections are written once; everything else is
/// last-write-wins.
constexpr bool is_immutable(RecordKind k) {
  return k == RecordKind::version || k == RecordKind::correction;
}

struct StoreRecord {
  RecordKind kind = RecordKind::bot;
  std::string id;
  std::string bot_id;
  nlohmann::json payload;
  Timestamp written_at{};
  std::uint64_t sequence = 0;
  /// Set by compaction when the id's first write was dropped, so list order
  /// survives a rewrite.
  std::optional<std::uint64_t> first_sequence;
};

/// Serialized record body (without the length prefix).
std::string encode_record(const StoreRecord& r);
StoreRecord decode_record(std::string_view bytes);

class AppendOnlyViolation : public Error {
 public:
  explicit AppendOnlyViolation(const std::string& m) : Error(ErrorCode::state, m) {}
};

struct OpenReport {
  std::size_t records = 0;
  bool degraded = false;
  std::uint64_t quarantined_bytes = 0;
  std::optional<std::filesystem::path> quarantine_file;
  std::vector<std::string> integrity_violations;
};

struct StoreOptions {
  /// fsync after every record. Off by default; flush() happens regardless.
  bool sync_writes = false;
};

inline constexpr std::string_view kLogMagic = "PDLOG";
inline constexpr std::uint8_t kFormatVersion = 1;
inline constexpr std::string_view kLogFileName = "store.pdlog";

/// Append-only log file plus an in-memory index rebuilt on open.
///
/// File layout: "PDLOG" + one format-version byte, then records, each a
/// 4-byte big-endian length followed by that many bytes of JSON. Sequence
/// numbers increase strictly through the file.
///
/// Reads are concurrent. Physical appends are serialized by one appender.
/// Logical writers coordinate per bot through with_bot_lock().
class Store {
 public:
  /// Opens (creating if missing) the log at `file`. A corrupt suffix is
  /// copied to a sidecar file and the store opens read-degraded: reads work,
  /// writes throw StateError until compact() rewrites the good prefix.
  static std::unique_ptr<Store> open(const std::filesystem::path& file, Clock& clock,
                                     StoreOptions options = {});

  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Appends a record and returns its sequence number. Throws
  /// AppendOnlyViolation when an immutable (kind, id) already exists.
  std::uint64_t put(RecordKind kind, const std::string& id, const std::string& bot_id,
                    nlohmann::json payload);

  /// Payload of the highest-sequence record for (kind, id).
  std::optional<nlohmann::json> get(RecordKind kind, const std::string& id) const;

  /// Latest payloads of `kind` owned by `bot_id` (all bots when empty),
  /// ordered by each id's first write.
  std::vector<nlohmann::json> list(RecordKind kind, const std::string& bot_id = {}) const;

  /// Runs `mutation` while holding the writer lock of `bot_id`. Mutations on
  /// different bots run in parallel.
  template <typename F>
  decltype(auto) with_bot_lock(const std::string& bot_id, F&& mutation) {
    auto mu = bot_mutex(bot_id);
    std::lock_guard guard(*mu);
    return std::forward<F>(mutation)();
  }

  /// Rewrites the log keeping every immutable record and the latest record
  /// of each mutable (kind, id). Sequence numbers and timestamps are kept.
  /// Clears read-degraded mode.
  void compact();

  const OpenReport& open_report() const { return report_; }
  bool degraded() const;
  const std::filesystem::path& file() const { return file_; }
  std::uint64_t last_sequence() const;

 private:
  struct Entry {
    nlohmann::json payload;
    std::string bot_id;
    std::uint64_t first_sequence = 0;
    std::uint64_t last_sequence = 0;
    Timestamp written_at{};
  };
  using Key = std::pair<RecordKind, std::string>;

  Store(std::filesystem::path file, Clock& clock, StoreOptions options);
  void load();
  void check_references();
  void append_frame(const std::string& body);
  void reopen_for_append();
  std::shared_ptr<std::mutex> bot_mutex(const std::string& bot_id);

  std::filesystem::path file_;
  Clock& clock_;
  StoreOptions options_;
  std::FILE* out_ = nullptr;

  mutable std::mutex append_mu_;
  mutable std::shared_mutex index_mu_;
  std::map<Key, Entry> index_;
  std::uint64_t sequence_ = 0;
  bool degraded_ = false;
  OpenReport report_;

  std::mutex locks_mu_;
  std::map<std::string, std::shared_ptr<std::mutex>> bot_locks_;
};

}  // namespace pd::store
