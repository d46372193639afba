#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hdapprox/trainer.hpp"

namespace hdapprox {

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Binary little-endian model image; layout documented in docs/model-format.md.
std::vector<std::uint8_t> serialize_model(const Model& model);
Model deserialize_model(std::span<const std::uint8_t> bytes);

// Writes to a sibling temporary file and renames it into place.
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace hdapprox
