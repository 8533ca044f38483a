#pragma once

#include "pd/domain/types.hpp"

#include <filesystem>
#include <vector>

namespace pd::scenario {

/// Reads one profile asset: a JSON object with id, name, description,
/// opening_message and followups.
domain::StudentProfile load_profile(const std::filesystem::path& file, bool builtin);

/// The three shipped profiles from <asset_root>/profiles, in the fixed order
/// expected path, struggling learner, off-topic input.
std::vector<domain::StudentProfile> builtin_profiles(const std::filesystem::path& asset_root);

/// Throws ValidationError when a custom profile breaks the profile invariants.
void validate_profile(const domain::StudentProfile& profile);

}  // namespace pd::scenario
