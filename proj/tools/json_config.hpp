#pragma once

#include <istream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace tsrkit::cli {

/// Reads `--config` files as a flat JSON object whose keys mirror long flag
/// names. Keys go to the main app when it owns the flag, otherwise to the
/// subcommand being run. Flags given on the command line win.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;

 private:
  const CLI::App* root_;
};

}  // namespace tsrkit::cli
