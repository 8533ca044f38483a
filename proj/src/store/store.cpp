#include "pd/store/store.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace pd::store {

using nlohmann::json;

std::string_view to_string(RecordKind k) {
  switch (k) {
    case RecordKind::bot: return "bot";
    case RecordKind::version: return "version";
    case RecordKind::test_case: return "test_case";
    case RecordKind::correction: return "correction";
    case RecordKind::run: return "run";
    case RecordKind::profile: return "profile";
  }
  return "bot";
}

std::optional<RecordKind> parse_record_kind(std::string_view text) {
  for (RecordKind k : {RecordKind::bot, RecordKind::version, RecordKind::test_case,
                       RecordKind::correction, RecordKind::run, RecordKind::profile}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string encode_record(const StoreRecord& r) {
  json doc{{"seq", r.sequence},
                 {"kind", to_string(r.kind)},
                 {"id", r.id},
                 {"bot_id", r.bot_id},
                 {"written_at", format_rfc3339(r.written_at)},
                 {"payload", r.payload}};
  if (r.first_sequence) doc["first_seq"] = *r.first_sequence;
  return doc.dump();
}

StoreRecord decode_record(std::string_view bytes) {
  const json doc = json::parse(bytes);
  StoreRecord r;
  r.sequence = doc.at("seq").get<std::uint64_t>();
  const auto kind = parse_record_kind(doc.at("kind").get<std::string>());
  if (!kind) {
    throw InternalError("unknown record kind");
  }
  r.kind = *kind;
  r.id = doc.at("id").get<std::string>();
  r.bot_id = doc.at("bot_id").get<std::string>();
  r.written_at = parse_rfc3339(doc.at("written_at").get<std::string>());
  r.payload = doc.at("payload");
  if (auto it = doc.find("first_seq"); it != doc.end()) r.first_sequence = it->get<std::uint64_t>();
  return r;
}

namespace {

void write_be32(std::string& out, std::uint32_t v) {
  out += static_cast<char>((v >> 24) & 0xFF);
  out += static_cast<char>((v >> 16) & 0xFF);
  out += static_cast<char>((v >> 8) & 0xFF);
  out += static_cast<char>(v & 0xFF);
}

std::uint32_t read_be32(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return (std::uint32_t{u[0]} << 24) | (std::uint32_t{u[1]} << 16) | (std::uint32_t{u[2]} << 8) |
         std::uint32_t{u[3]};
}

std::string header_bytes() {
  std::string h(kLogMagic);
  h += static_cast<char>(kFormatVersion);
  return h;
}

std::string frame(const std::string& body) {
  std::string out;
  out.reserve(body.size() + 4);
  write_be32(out, static_cast<std::uint32_t>(body.size()));
  out += body;
  return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& file) {
  std::filesystem::path p = file;
  p += ".quarantine";
  for (int n = 1; std::filesystem::exists(p); ++n) {
    p = file;
    p += fmt::format(".quarantine.{}", n);
  }
  return p;
}

}  // namespace

Store::Store(std::filesystem::path file, Clock& clock, StoreOptions options)
    : file_(std::move(file)), clock_(clock), options_(options) {}

Store::~Store() {
  if (out_ != nullptr) std::fclose(out_);
}

std::unique_ptr<Store> Store::open(const std::filesystem::path& file, Clock& clock,
                                   StoreOptions options) {
  std::unique_ptr<Store> s(new Store(file, clock, options));
  if (file.has_parent_path()) {
    std::filesystem::create_directories(file.parent_path());
  }
  s->load();
  s->reopen_for_append();
  return s;
}

void Store::load() {
  std::string data;
  if (std::filesystem::exists(file_)) {
    std::ifstream in(file_, std::ios::binary);
    if (!in) throw InternalError("cannot read store " + file_.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    data = ss.str();
  }
  if (data.empty()) {
    std::ofstream out(file_, std::ios::binary | std::ios::trunc);
    out << header_bytes();
    if (!out) throw InternalError("cannot create store " + file_.string());
    return;
  }

  const std::string header = header_bytes();
  std::size_t pos = 0;
  std::size_t corrupt_at = std::string::npos;
  if (data.size() < header.size()) {
    corrupt_at = 0;
  } else if (data.compare(0, kLogMagic.size(), kLogMagic) != 0) {
    throw InternalError(file_.string() + " is not a store log");
  } else if (static_cast<std::uint8_t>(data[kLogMagic.size()]) != kFormatVersion) {
    throw InternalError(fmt::format("{} has unsupported format version {}", file_.string(),
                                    static_cast<int>(static_cast<std::uint8_t>(data[kLogMagic.size()]))));
  } else {
    pos = header.size();
  }

  while (corrupt_at == std::string::npos && pos < data.size()) {
    if (data.size() - pos < 4) {
      corrupt_at = pos;
      break;
    }
    const std::uint32_t len = read_be32(data.data() + pos);
    if (data.size() - pos - 4 < len) {
      corrupt_at = pos;
      break;
    }
    StoreRecord r;
    try {
      r = decode_record(std::string_view(data.data() + pos + 4, len));
    } catch (const std::exception&) {
      corrupt_at = pos;
      break;
    }
    const Key key{r.kind, r.id};
    if (r.sequence <= sequence_ || (is_immutable(r.kind) && index_.count(key) != 0)) {
      corrupt_at = pos;
      break;
    }
    sequence_ = r.sequence;
    auto [it, inserted] = index_.try_emplace(key);
    Entry& e = it->second;
    if (inserted) e.first_sequence = r.first_sequence.value_or(r.sequence);
    e.last_sequence = r.sequence;
    e.payload = std::move(r.payload);
    e.bot_id = std::move(r.bot_id);
    e.written_at = r.written_at;
    ++report_.records;
    pos += 4 + len;
  }

  if (corrupt_at != std::string::npos) {
    const auto sidecar = sidecar_path(file_);
    std::ofstream q(sidecar, std::ios::binary | std::ios::trunc);
    q.write(data.data() + corrupt_at, static_cast<std::streamsize>(data.size() - corrupt_at));
    degraded_ = true;
    report_.degraded = true;
    report_.quarantined_bytes = data.size() - corrupt_at;
    report_.quarantine_file = sidecar;
  }
  check_references();
}

void Store::check_references() {
  auto exists = [&](RecordKind k, const std::string& id) { return index_.count({k, id}) != 0; };
  for (const auto& [key, e] : index_) {
    const auto& [kind, id] = key;
    auto field = [&](const char* name) { return e.payload.value(name, std::string{}); };
    switch (kind) {
      case RecordKind::correction:
        if (!exists(RecordKind::test_case, field("test_case_id"))) {
          report_.integrity_violations.push_back(fmt::format(
              "correction {} references missing test case {}", id, field("test_case_id")));
        }
        break;
      case RecordKind::run:
        if (!exists(RecordKind::correction, field("correction_id"))) {
          report_.integrity_violations.push_back(fmt::format(
              "run {} references missing correction {}", id, field("correction_id")));
        }
        break;
      case RecordKind::test_case:
      case RecordKind::version:
        if (!exists(RecordKind::bot, e.bot_id)) {
          report_.integrity_violations.push_back(
              fmt::format("{} {} references missing bot {}", to_string(kind), id, e.bot_id));
        }
        break;
      default:
        break;
    }
  }
}

void Store::reopen_for_append() {
  if (out_ != nullptr) std::fclose(out_);
  out_ = std::fopen(file_.c_str(), "ab");
  if (out_ == nullptr) {
    throw InternalError("cannot open store for append: " + file_.string());
  }
}

void Store::append_frame(const std::string& body) {
  const std::string bytes = frame(body);
  if (std::fwrite(bytes.data(), 1, bytes.size(), out_) != bytes.size() || std::fflush(out_) != 0) {
    throw InternalError("store write failed: " + file_.string());
  }
  if (options_.sync_writes) {
    ::fsync(fileno(out_));
  }
}

std::uint64_t Store::put(RecordKind kind, const std::string& id, const std::string& bot_id,
                         json payload) {
  std::lock_guard append(append_mu_);
  if (degraded_) {
    throw StateError("store is read-degraded after corruption; run compact to recover");
  }
  const Key key{kind, id};
  {
    std::shared_lock read(index_mu_);
    if (is_immutable(kind) && index_.count(key) != 0) {
      throw AppendOnlyViolation(
          fmt::format("{} {} already exists and cannot be rewritten", to_string(kind), id));
    }
  }
  StoreRecord r{kind, id, bot_id, std::move(payload), clock_.now(), sequence_ + 1, std::nullopt};
  append_frame(encode_record(r));

  std::unique_lock write(index_mu_);
  sequence_ = r.sequence;
  auto [it, inserted] = index_.try_emplace(key);
  if (inserted) it->second.first_sequence = r.sequence;
  it->second.last_sequence = r.sequence;
  it->second.payload = std::move(r.payload);
  it->second.bot_id = bot_id;
  it->second.written_at = r.written_at;
  return r.sequence;
}

std::optional<json> Store::get(RecordKind kind, const std::string& id) const {
  std::shared_lock read(index_mu_);
  if (auto it = index_.find({kind, id}); it != index_.end()) {
    return std::optional<json>{std::in_place, it->second.payload};
  }
  return std::nullopt;
}

std::vector<json> Store::list(RecordKind kind, const std::string& bot_id) const {
  std::vector<std::pair<std::uint64_t, json>> hits;
  {
    std::shared_lock read(index_mu_);
    for (auto it = index_.lower_bound({kind, std::string{}});
         it != index_.end() && it->first.first == kind; ++it) {
      if (bot_id.empty() || it->second.bot_id == bot_id) {
        hits.emplace_back(it->second.first_sequence, it->second.payload);
      }
    }
  }
  std::sort(hits.begin(), hits.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<json> out;
  out.reserve(hits.size());
  for (auto& h : hits) out.push_back(std::move(h.second));
  return out;
}

void Store::compact() {
  std::lock_guard append(append_mu_);
  std::unique_lock write(index_mu_);

  std::vector<std::pair<const Key*, const Entry*>> live;
  for (const auto& [k, e] : index_) live.emplace_back(&k, &e);
  std::sort(live.begin(), live.end(), [](const auto& a, const auto& b) {
    return a.second->last_sequence < b.second->last_sequence;
  });

  std::filesystem::path tmp = file_;
  tmp += ".compact";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << header_bytes();
    for (const auto& [k, e] : live) {
      StoreRecord r{k->first, k->second, e->bot_id, e->payload, e->written_at, e->last_sequence,
                    std::nullopt};
      if (e->first_sequence != e->last_sequence) r.first_sequence = e->first_sequence;
      out << frame(encode_record(r));
    }
    out.flush();
    if (!out) throw InternalError("compaction write failed: " + tmp.string());
  }
  if (std::FILE* f = std::fopen(tmp.c_str(), "rb")) {
    ::fsync(fileno(f));
    std::fclose(f);
  }
  std::filesystem::rename(tmp, file_);
  reopen_for_append();
  degraded_ = false;
}

bool Store::degraded() const {
  std::lock_guard append(append_mu_);
  return degraded_;
}

std::uint64_t Store::last_sequence() const {
  std::shared_lock read(index_mu_);
  return sequence_;
}

std::shared_ptr<std::mutex> Store::bot_mutex(const std::string& bot_id) {
  std::lock_guard g(locks_mu_);
  auto& slot = bot_locks_[bot_id];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

}  // namespace pd::store
