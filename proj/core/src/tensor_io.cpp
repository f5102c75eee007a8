#include "tsrkit/tensor_io.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "tsrkit/error.hpp"

namespace tsrkit {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::atomic<unsigned long> g_temp_counter{0};

std::string pixel_key(const PixelIndex& p) { return std::to_string(p.y) + "," + std::to_string(p.x); }

ojson meta_json(const OutputMeta& meta) {
  return ojson{{"H", meta.height}, {"W", meta.width}, {"downscale", meta.downscale}};
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(g_temp_counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_invalid("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw_invalid("write failed: " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw_invalid("cannot rename into " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_invalid("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sparse_targets_to_json(const TargetBundle& bundle) {
  // Entries are lists: two tiny cells may share a lowres pixel.
  ojson doc;
  doc["meta"] = meta_json(bundle.meta);
  ojson center_off = ojson::object();
  ojson corner_off = ojson::object();
  for (const auto& o : bundle.offsets) {
    auto& slot = (o.kind == KeypointKind::Center ? center_off : corner_off)[pixel_key(o.pixel)];
    if (slot.is_null()) slot = ojson::array();
    slot.push_back({o.dx, o.dy});
  }
  doc["center_offsets"] = std::move(center_off);
  doc["corner_offsets"] = std::move(corner_off);

  ojson c2c = ojson::object();
  for (const auto& c : bundle.center2corners) {
    auto& slot = c2c[pixel_key(c.pixel)];
    if (slot.is_null()) slot = ojson::array();
    slot.push_back({{"cell", c.cell}, {"u", c.u}});
  }
  doc["center2corners"] = std::move(c2c);

  ojson k2c = ojson::object();
  for (const auto& k : bundle.corners2center) {
    ojson v = ojson::array();
    ojson valid = ojson::array();
    for (const auto& s : k.slots) {
      v.push_back(s.dx);
      v.push_back(s.dy);
      valid.push_back(s.valid);
    }
    k2c[pixel_key(k.pixel)] = {{"v", std::move(v)}, {"valid", std::move(valid)}};
  }
  doc["corners2center"] = std::move(k2c);

  ojson spans = ojson::object();
  for (const auto& s : bundle.spans) {
    auto& slot = spans[pixel_key(s.pixel)];
    if (slot.is_null()) slot = ojson::array();
    slot.push_back({s.row_span, s.col_span});
  }
  doc["spans"] = std::move(spans);
  return doc.dump(1) + "\n";
}

namespace {

std::string tcn_bytes(const RasterMap& map) {
  std::ostringstream os(std::ios::binary);
  write_tcn(os, map);
  return os.str();
}

}  // namespace

void save_target_bundle(const fs::path& dir, const TargetBundle& bundle) {
  fs::create_directories(dir);
  write_file_atomic(dir / "heatmap.tcn", tcn_bytes(bundle.heatmap));
  write_file_atomic(dir / "rowmap.tcn", tcn_bytes(bundle.row_map));
  write_file_atomic(dir / "colmap.tcn", tcn_bytes(bundle.col_map));
  write_file_atomic(dir / "mask.tcn", tcn_bytes(bundle.mask));
  write_file_atomic(dir / "sparse.json", sparse_targets_to_json(bundle));
}

void save_raw_output(const fs::path& dir, const RawNetworkOutput& raw) {
  check_output_shape(raw);
  fs::create_directories(dir);
  write_file_atomic(dir / "heatmap.tcn", tcn_bytes(raw.heatmap));
  write_file_atomic(dir / "offsets.tcn", tcn_bytes(raw.offsets));
  write_file_atomic(dir / "center2corners.tcn", tcn_bytes(raw.center2corners));
  write_file_atomic(dir / "corners2center.tcn", tcn_bytes(raw.corners2center));
  write_file_atomic(dir / "spans.tcn", tcn_bytes(raw.spans));
  write_file_atomic(dir / "rowmap.tcn", tcn_bytes(raw.row_map));
  write_file_atomic(dir / "colmap.tcn", tcn_bytes(raw.col_map));
  write_file_atomic(dir / "meta.json", meta_json(raw.meta).dump(1) + "\n");
}

RawNetworkOutput load_raw_output(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw_invalid("not a tensor directory: " + dir.string());
  auto need = [&](const char* name) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) throw_invalid("missing file: " + p.string());
    return p;
  };
  RawNetworkOutput raw;
  {
    const fs::path p = need("meta.json");
    ojson meta;
    try {
      meta = ojson::parse(read_file(p));
      raw.meta.height = meta.at("H").get<int>();
      raw.meta.width = meta.at("W").get<int>();
      raw.meta.downscale = meta.at("downscale").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw_invalid(p.string() + ": " + e.what());
    }
    if (raw.meta.height < 1 || raw.meta.width < 1 || raw.meta.downscale < 1)
      throw_invalid(p.string() + ": H, W and downscale must be positive");
  }
  raw.heatmap = load_tcn(need("heatmap.tcn"));
  raw.offsets = load_tcn(need("offsets.tcn"));
  raw.center2corners = load_tcn(need("center2corners.tcn"));
  raw.corners2center = load_tcn(need("corners2center.tcn"));
  raw.spans = load_tcn(need("spans.tcn"));
  raw.row_map = load_tcn(need("rowmap.tcn"));
  raw.col_map = load_tcn(need("colmap.tcn"));
  check_output_shape(raw);
  return raw;
}

}  // namespace tsrkit
