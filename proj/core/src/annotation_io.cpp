#include "tsrkit/annotation_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tsrkit/error.hpp"
#include "tsrkit/tensor_io.hpp"

namespace tsrkit {

using nlohmann::json;

TableAnnotation parse_annotation_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw_invalid(std::string("annotation JSON: ") + e.what());
  }
  if (!doc.is_object()) throw_invalid("annotation JSON: top level must be an object");

  auto get_int = [&](const char* key) {
    if (!doc.contains(key) || !doc[key].is_number_integer())
      throw_invalid(std::string("annotation JSON: missing integer '") + key + "'");
    return doc[key].get<int>();
  };

  TableAnnotation ann;
  ann.image_width = get_int("image_width");
  ann.image_height = get_int("image_height");
  if (!doc.contains("cells") || !doc["cells"].is_array())
    throw_invalid("annotation JSON: missing 'cells' array");

  std::size_t index = 0;
  for (const auto& c : doc["cells"]) {
    const std::string where = "annotation JSON: cell " + std::to_string(index++);
    if (!c.is_object()) throw_invalid(where + " is not an object");
    if (!c.contains("quad") || !c["quad"].is_array() || c["quad"].size() != 8)
      throw_invalid(where + ": 'quad' must hold 8 numbers");
    if (!c.contains("logical") || !c["logical"].is_array() || c["logical"].size() != 4)
      throw_invalid(where + ": 'logical' must hold 4 integers");
    Cell cell;
    for (int k = 0; k < 4; ++k) {
      const auto& x = c["quad"][2 * k];
      const auto& y = c["quad"][2 * k + 1];
      if (!x.is_number() || !y.is_number()) throw_invalid(where + ": non-numeric quad entry");
      cell.quad[k] = {x.get<double>(), y.get<double>()};
    }
    cell.quad = normalize_quad(cell.quad);
    std::array<int, 4> l{};
    for (int k = 0; k < 4; ++k) {
      if (!c["logical"][k].is_number_integer()) throw_invalid(where + ": non-integer logical entry");
      l[k] = c["logical"][k].get<int>();
    }
    cell.logical = {l[0], l[1], l[2], l[3]};
    ann.cells.push_back(cell);
  }
  return ann;
}

std::string annotation_to_json(const TableAnnotation& ann, int indent) {
  json doc;
  doc["image_width"] = ann.image_width;
  doc["image_height"] = ann.image_height;
  json cells = json::array();
  for (const auto& cell : ann.cells) {
    json quad = json::array();
    for (const auto& p : cell.quad.corners) {
      quad.push_back(p.x);
      quad.push_back(p.y);
    }
    const auto& l = cell.logical;
    cells.push_back({{"quad", quad}, {"logical", {l.row_start, l.row_end, l.col_start, l.col_end}}});
  }
  doc["cells"] = std::move(cells);
  return doc.dump(indent) + "\n";
}

TableAnnotation load_annotation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_invalid("cannot open annotation " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  try {
    return parse_annotation_json(os.str());
  } catch (const TsrError& e) {
    throw TsrError(e.kind(), path.string() + ": " + e.what());
  }
}

void save_annotation(const std::filesystem::path& path, const TableAnnotation& ann) {
  write_file_atomic(path, annotation_to_json(ann));
}

}  // namespace tsrkit
