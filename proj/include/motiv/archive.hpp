#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "motiv/corpus.hpp"

namespace motiv::archive {

inline constexpr std::string_view kFormat = "motiv-dataset/1";

/// Canonical JSON document holding the dataset as the same CSV/GeoJSON files
/// it was ingested from, plus the derived tweet columns. Identical datasets
/// serialize to identical bytes.
std::string serialize(const Dataset& dataset);
std::shared_ptr<const Dataset> deserialize(std::string_view document);

/// gzip container around serialize(); written to a temporary file and
/// renamed into place.
void write(const std::filesystem::path& path, const Dataset& dataset);
std::shared_ptr<const Dataset> read(const std::filesystem::path& path);

std::string gzip(std::string_view data);
std::string gunzip(std::string_view data);

}  // namespace motiv::archive
