#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lfsel/pipeline.hpp"
#include "lfsel/taskgen.hpp"

namespace lfsel {

/// Everything a CLI run can be configured with.
struct RunConfig {
    CorpusSpec corpus{};
    PipelineConfig pipeline{};
    /// Reserved for triggering store updates; parsed and kept, never acted on.
    double update_threshold = 0.0;
};

/// Dotted names of every accepted key ("labeling.step", ...).
std::vector<std::string> config_keys();

/// Overlays a JSON object onto `config`. Throws Config naming the offending
/// key for unknown keys, wrong types or out-of-range values.
void apply_config(const std::string& json_text, RunConfig& config);
void apply_config_file(const std::filesystem::path& path, RunConfig& config);

}  // namespace lfsel
