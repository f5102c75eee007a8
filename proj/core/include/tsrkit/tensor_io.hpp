#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tsrkit/network_output.hpp"
#include "tsrkit/targets.hpp"

namespace tsrkit {

/// Writes to a sibling temp file and renames it into place, so readers never
/// observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

/// heatmap.tcn, rowmap.tcn, colmap.tcn, mask.tcn and sparse.json.
void save_target_bundle(const std::filesystem::path& dir, const TargetBundle& bundle);

std::string sparse_targets_to_json(const TargetBundle& bundle);

/// heatmap, offsets, center2corners, corners2center, spans, rowmap, colmap
/// (.tcn each) plus meta.json.
void save_raw_output(const std::filesystem::path& dir, const RawNetworkOutput& raw);

/// Throws TsrError(InvalidInput) naming the first missing or corrupt file.
RawNetworkOutput load_raw_output(const std::filesystem::path& dir);

}  // namespace tsrkit
