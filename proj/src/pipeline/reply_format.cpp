#include "pd/pipeline/reply_format.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace pd::pipeline {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty() && cur.back() == '\r') cur.pop_back();
  out.push_back(std::move(cur));
  return out;
}

bool is_fence(std::string_view line) { return trim(line).substr(0, 3) == "```"; }

// Returns the label if `line` starts with "<label>:".
std::optional<std::string_view> label_of(std::string_view line,
                                         std::initializer_list<std::string_view> labels,
                                         std::string_view& rest) {
  const std::string_view t = trim(line);
  for (std::string_view label : labels) {
    if (t.size() > label.size() && t.substr(0, label.size()) == label && t[label.size()] == ':') {
      rest = trim(t.substr(label.size() + 1));
      return label;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::map<std::string, std::string>> parse_labeled_block(
    std::string_view reply, std::initializer_list<std::string_view> labels,
    std::optional<std::string_view> tail_label) {
  std::vector<std::string> lines = lines_of(reply);
  auto open = std::find_if(lines.begin(), lines.end(), [](const std::string& l) { return is_fence(l); });
  if (open != lines.end()) {
    auto close = lines.end();
    for (auto it = lines.end(); it != open + 1;) {
      --it;
      if (trim(*it) == "```") {
        close = it;
        break;
      }
    }
    lines = std::vector<std::string>(open + 1, close);
  }

  std::map<std::string, std::string> fields;
  std::optional<std::string> current;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view rest;
    if (auto label = label_of(lines[i], labels, rest)) {
      current = std::string(*label);
      if (tail_label && *label == *tail_label) {
        std::vector<std::string> remaining(lines.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                           lines.end());
        while (!remaining.empty() && trim(remaining.back()).empty()) remaining.pop_back();
        if (!rest.empty()) remaining.insert(remaining.begin(), std::string(rest));
        std::string tail;
        for (std::size_t k = 0; k < remaining.size(); ++k) {
          if (k > 0) tail += '\n';
          tail += remaining[k];
        }
        fields[*current] = std::move(tail);
        break;
      }
      fields[*current] = std::string(rest);
      continue;
    }
    if (current) {
      auto& f = fields[*current];
      if (!f.empty()) f += '\n';
      f += lines[i];
    }
  }
  for (auto& [k, v] : fields) {
    if (!tail_label || k != *tail_label) v = std::string(trim(v));
  }
  for (std::string_view label : labels) {
    auto it = fields.find(std::string(label));
    if (it == fields.end() || trim(it->second).empty()) {
      return std::nullopt;
    }
  }
  return fields;
}

std::optional<YesNo> parse_yes_no(std::string_view reply) {
  const std::string_view t = trim(reply);
  auto starts_word = [&](std::string_view word) {
    if (t.size() < word.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (std::toupper(static_cast<unsigned char>(t[i])) != word[i]) return false;
    }
    return t.size() == word.size() || !std::isalpha(static_cast<unsigned char>(t[word.size()]));
  };
  YesNo out;
  std::string_view rest;
  if (starts_word("YES")) {
    out.yes = true;
    rest = t.substr(3);
  } else if (starts_word("NO")) {
    out.yes = false;
    rest = t.substr(2);
  } else {
    return std::nullopt;
  }
  // Skip separators: whitespace, punctuation, and UTF-8 dashes.
  while (!rest.empty()) {
    const auto c = static_cast<unsigned char>(rest.front());
    if (std::isspace(c) || c == '-' || c == ':' || c == ',' || c == '.' || c == ';') {
      rest.remove_prefix(1);
    } else if (rest.substr(0, 3) == "\xE2\x80\x94" || rest.substr(0, 3) == "\xE2\x80\x93") {
      rest.remove_prefix(3);
    } else {
      break;
    }
  }
  out.rationale = std::string(trim(rest));
  return out;
}

}  // namespace pd::pipeline
