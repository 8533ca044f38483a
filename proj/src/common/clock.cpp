#include "pd/common/clock.hpp"

#include "pd/common/error.hpp"
#include "pd/domain/rules.hpp"

#include <fmt/format.h>
#include <openssl/rand.h>

#include <array>
#include <cstdio>
#include <ctime>

namespace pd {

std::string format_rfc3339(Timestamp t) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const hh_mm_ss hms{t - day};
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count(),
                     hms.subseconds().count());
}

Timestamp parse_rfc3339(const std::string& text) {
  using namespace std::chrono;
  int y = 0;
  unsigned mo = 0, d = 0, h = 0, mi = 0, s = 0, ms = 0;
  char tail = 0;
  const int n = std::sscanf(text.c_str(), "%d-%u-%uT%u:%u:%u.%3u%c", &y, &mo, &d, &h, &mi, &s,
                            &ms, &tail);
  if (n < 6) {
    throw ValidationError("malformed timestamp: " + text);
  }
  if (n < 7) {
    ms = 0;
  }
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok()) {
    throw ValidationError("malformed timestamp: " + text);
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + milliseconds{ms};
}

Timestamp SystemClock::now() {
  return std::chrono::floor<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

Timestamp SteppingClock::now() {
  return Timestamp{std::chrono::milliseconds{next_.fetch_add(step_)}};
}

std::string RandomIdSource::new_id(const std::string& prefix) {
  std::array<unsigned char, 8> bytes{};
  if (RAND_bytes(bytes.data(), static_cast<int>(bytes.size())) != 1) {
    throw InternalError("entropy source failure");
  }
  std::string out = prefix + "_";
  for (unsigned char b : bytes) {
    out += fmt::format("{:02x}", b);
  }
  return out;
}

std::string RandomIdSource::new_share_token() { return domain::mint_share_token(); }

std::string SequentialIdSource::new_id(const std::string& prefix) {
  return fmt::format("{}-{:06}", prefix, ++counter_);
}

std::string SequentialIdSource::new_share_token() {
  return fmt::format("tok-{:06}", ++tokens_);
}

}  // namespace pd
