#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "prefopt/nn.hpp"

namespace prefopt {

// Binary layout: one line of JSON header terminated by '\n', then
// header["count"] little-endian IEEE-754 doubles. The header carries
// "shapes" ([[rows, cols], ...]) and whatever `extra` fields the caller adds
// (model kind tag, layer sizes, activation).
struct SerializedParams {
  ParamVector params;
  nlohmann::json header;
};

std::string encode_params(const ParamVector& params, const nlohmann::ordered_json& extra = {});
SerializedParams decode_params(const std::string& bytes);

void save_params(const std::filesystem::path& path, const ParamVector& params,
                 const nlohmann::ordered_json& extra = {});
SerializedParams load_params(const std::filesystem::path& path);

}  // namespace prefopt
