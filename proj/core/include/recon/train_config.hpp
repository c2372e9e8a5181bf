#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "recon/fewshot.hpp"
#include "recon/trainer.hpp"

namespace recon {

/// Applies one `key = value` setting. Keys name TrainConfig fields
/// (pairs_per_doc, tau, mode, ...) or FewshotConfig fields prefixed with
/// "fewshot_". Throws ConfigError for unknown keys or bad values.
void apply_setting(std::string_view key, std::string_view value, TrainConfig& train,
                   FewshotConfig& fewshot);

/// Flat `key = value` file; '#' starts a comment, blank lines are ignored.
void apply_config(std::istream& in, TrainConfig& train, FewshotConfig& fewshot);
void apply_config_file(const std::filesystem::path& path, TrainConfig& train,
                       FewshotConfig& fewshot);

/// Renders every addressable key with its current value.
std::string render_config(const TrainConfig& train, const FewshotConfig& fewshot);

}  // namespace recon
