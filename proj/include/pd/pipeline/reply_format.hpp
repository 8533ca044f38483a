#pragma once

#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace pd::pipeline {

/// Extracts `LABEL: value` fields from a model reply. The fields are read from
/// the first ``` fenced block when there is one, otherwise from the whole
/// reply. A value runs until the next known label. The `tail_label` field, if
/// given, takes every remaining line verbatim. Returns nullopt unless every
/// label is present with non-empty content.
std::optional<std::map<std::string, std::string>> parse_labeled_block(
    std::string_view reply, std::initializer_list<std::string_view> labels,
    std::optional<std::string_view> tail_label = std::nullopt);

/// Leading YES/NO answer, e.g. "NO - gives away the answer".
struct YesNo {
  bool yes = false;
  std::string rationale;
};
std::optional<YesNo> parse_yes_no(std::string_view reply);

}  // namespace pd::pipeline
