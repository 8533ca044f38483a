#pragma once

#include "pd/common/error.hpp"
#include "pd/domain/types.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pd::diff {

using domain::Hunk;
using domain::HunkKind;
using domain::TrackedDiff;

/// Text split on LF. A final LF does not produce an empty trailing line; it
/// sets `trailing_newline` instead. The empty text has no lines.
struct Lines {
  std::vector<std::string> lines;
  bool trailing_newline = false;
};

Lines split_lines(std::string_view text);
std::string join_lines(const std::vector<std::string>& lines, bool trailing_newline);

/// Raised when a diff's keep+delete projection does not match the text it is
/// applied to.
class DiffApplicationError : public Error {
 public:
  DiffApplicationError(std::size_t line_index, const std::string& message)
      : Error(ErrorCode::validation, message), line_index_(line_index) {}
  std::size_t line_index() const noexcept { return line_index_; }

 private:
  std::size_t line_index_;
};

/// Line diff from an LCS table. Hunks are maximal, and inside every changed
/// region deletions precede insertions.
TrackedDiff compute_diff(std::string_view old_text, std::string_view new_text);

/// Rebuilds the new text from the old text. Throws DiffApplicationError
/// naming the first line where the diff and `old_text` disagree.
std::string apply_diff(std::string_view old_text, const TrackedDiff& diff);

/// Lines of keep+delete hunks (old side) or keep+insert hunks (new side).
std::vector<std::string> old_projection(const TrackedDiff& diff);
std::vector<std::string> new_projection(const TrackedDiff& diff);

/// Total deleted plus inserted lines.
std::size_t change_cost(const TrackedDiff& diff);

/// True when no two adjacent hunks share a kind and no hunk is empty.
bool is_maximal(const TrackedDiff& diff);

}  // namespace pd::diff
