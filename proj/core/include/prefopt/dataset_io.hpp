#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "prefopt/types.hpp"

namespace prefopt {

// {"n": int, "triples": [{"s": [...], "w": int, "l": int}, ...]}
nlohmann::ordered_json to_json(const PreferenceDataset& d);
// {"m": int, "states": [[...], ...]}
nlohmann::ordered_json to_json(const PromptDataset& p);

// Both throw prefopt::Error when the declared count disagrees with the
// number of records or a field is missing.
PreferenceDataset preference_dataset_from_json(const nlohmann::json& j);
PromptDataset prompt_dataset_from_json(const nlohmann::json& j);

void save_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace prefopt
