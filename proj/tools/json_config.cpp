#include "json_config.hpp"

#include <json.hpp>

namespace tsrkit::cli {

using nlohmann::json;

namespace {

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

}  // namespace

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  json doc;
  try {
    doc = json::parse(input);
  } catch (const json::parse_error& e) {
    throw CLI::ConversionError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw CLI::ConversionError("config", "top level must be a JSON object");

  std::string sub;
  for (const CLI::App* s : root_->get_subcommands()) sub = s->get_name();

  std::vector<CLI::ConfigItem> items;
  for (const auto& [key, value] : doc.items()) {
    CLI::ConfigItem item;
    item.name = key;
    if (root_->get_option_no_throw("--" + key) == nullptr && !sub.empty()) item.parents = {sub};
    if (value.is_array()) {
      for (const auto& v : value) item.inputs.push_back(scalar_text(v));
    } else if (value.is_object() || value.is_null()) {
      throw CLI::ConversionError(key, "config values must be scalars or arrays");
    } else {
      item.inputs.push_back(scalar_text(value));
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::string JsonConfig::to_config(const CLI::App* app, bool default_also, bool, std::string) const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  auto dump_options = [&](const CLI::App* a) {
    for (const CLI::Option* opt : a->get_options()) {
      if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
      const std::string name = opt->get_lnames().front();
      if (name == "help" || name == "config") continue;
      std::string value;
      if (opt->count() > 0) {
        const auto& results = opt->results();
        value = results.empty() ? "true" : results.back();
      } else if (default_also) {
        value = opt->get_default_str();
      } else {
        continue;
      }
      doc[name] = value;
    }
  };
  dump_options(app);
  for (const CLI::App* sub : app->get_subcommands()) dump_options(sub);
  return doc.dump(2) + "\n";
}

}  // namespace tsrkit::cli
