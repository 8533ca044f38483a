#include "pd/diff/tracked_diff.hpp"

#include <fmt/format.h>

#include <cstdint>

namespace pd::diff {

Lines split_lines(std::string_view text) {
  Lines out;
  if (text.empty()) {
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      out.lines.emplace_back(text.substr(start));
      break;
    }
    out.lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
    if (start == text.size()) {
      out.trailing_newline = true;
      break;
    }
  }
  return out;
}

std::string join_lines(const std::vector<std::string>& lines, bool trailing_newline) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  if (trailing_newline) out += '\n';
  return out;
}

namespace {

void push_line(std::vector<Hunk>& hunks, HunkKind kind, const std::string& line) {
  if (hunks.empty() || hunks.back().kind != kind) {
    hunks.push_back(Hunk{kind, {}});
  }
  hunks.back().lines.push_back(line);
}

}  // namespace

TrackedDiff compute_diff(std::string_view old_text, std::string_view new_text) {
  const Lines a = split_lines(old_text);
  const Lines b = split_lines(new_text);
  const std::size_t n = a.lines.size();
  const std::size_t m = b.lines.size();

  // suffix LCS lengths: lcs[i][j] = LCS(a[i..], b[j..])
  std::vector<std::uint32_t> lcs((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return lcs[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      at(i, j) = a.lines[i] == b.lines[j] ? at(i + 1, j + 1) + 1
                                          : std::max(at(i + 1, j), at(i, j + 1));
    }
  }

  TrackedDiff diff;
  diff.old_trailing_newline = a.trailing_newline;
  diff.new_trailing_newline = b.trailing_newline;

  // Walk forward; buffer a changed region so its deletions come out before
  // its insertions.
  std::vector<std::string> pending_del;
  std::vector<std::string> pending_ins;
  auto flush = [&] {
    for (const auto& l : pending_del) push_line(diff.hunks, HunkKind::remove, l);
    for (const auto& l : pending_ins) push_line(diff.hunks, HunkKind::insert, l);
    pending_del.clear();
    pending_ins.clear();
  };
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a.lines[i] == b.lines[j] && at(i, j) == at(i + 1, j + 1) + 1) {
      flush();
      push_line(diff.hunks, HunkKind::keep, a.lines[i]);
      ++i;
      ++j;
    } else if (j < m && (i == n || at(i, j + 1) >= at(i + 1, j))) {
      pending_ins.push_back(b.lines[j++]);
    } else {
      pending_del.push_back(a.lines[i++]);
    }
  }
  flush();
  return diff;
}

std::vector<std::string> old_projection(const TrackedDiff& diff) {
  std::vector<std::string> out;
  for (const auto& h : diff.hunks) {
    if (h.kind != HunkKind::insert) out.insert(out.end(), h.lines.begin(), h.lines.end());
  }
  return out;
}

std::vector<std::string> new_projection(const TrackedDiff& diff) {
  std::vector<std::string> out;
  for (const auto& h : diff.hunks) {
    if (h.kind != HunkKind::remove) out.insert(out.end(), h.lines.begin(), h.lines.end());
  }
  return out;
}

std::string apply_diff(std::string_view old_text, const TrackedDiff& diff) {
  const Lines old_lines = split_lines(old_text);
  const auto expected = old_projection(diff);
  const std::size_t common = std::min(expected.size(), old_lines.lines.size());
  for (std::size_t k = 0; k < common; ++k) {
    if (expected[k] != old_lines.lines[k]) {
      throw DiffApplicationError(k, fmt::format("diff does not apply: line {} differs", k));
    }
  }
  if (expected.size() != old_lines.lines.size()) {
    throw DiffApplicationError(
        common, fmt::format("diff does not apply: line {} differs (diff expects {} lines, text has {})",
                            common, expected.size(), old_lines.lines.size()));
  }
  if (old_lines.trailing_newline != diff.old_trailing_newline) {
    throw DiffApplicationError(
        old_lines.lines.size(),
        fmt::format("diff does not apply: trailing newline mismatch at line {}",
                    old_lines.lines.size()));
  }
  return join_lines(new_projection(diff), diff.new_trailing_newline);
}

std::size_t change_cost(const TrackedDiff& diff) {
  std::size_t cost = 0;
  for (const auto& h : diff.hunks) {
    if (h.kind != HunkKind::keep) cost += h.lines.size();
  }
  return cost;
}

bool is_maximal(const TrackedDiff& diff) {
  for (std::size_t k = 0; k < diff.hunks.size(); ++k) {
    if (diff.hunks[k].lines.empty()) return false;
    if (k > 0 && diff.hunks[k].kind == diff.hunks[k - 1].kind) return false;
  }
  return true;
}

}  // namespace pd::diff
