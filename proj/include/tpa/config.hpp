#pragma once

#include "tpa/cvaesm.hpp"
#include "tpa/temporal.hpp"
#include "tpa/tpa_head.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tpa {

struct DataConfig {
    std::string dataset_path;
    std::string prompt_bank_path;
    int clip_len = 16;
};

struct TrainerConfig {
    int batch = 16;
    int epochs = 40;
    double lr = 1e-3;
    double sched_factor = 0.1;
    int sched_patience = 5;
    int early_patience = 10;
    int folds = 5;
    std::uint64_t seed = 0;
};

// Full run configuration. Parsing rejects unknown keys at every level and
// materializes defaults, so an echoed config reproduces the run exactly.
struct Config {
    DataConfig data;
    ExtractorConfig extractor;
    ClassifierConfig classifier; // num_classes is resolved from the data
    CvaesmConfig cvaesm;
    TrainerConfig trainer;

    static Config from_json_text(const std::string& text);
    static Config from_file(const std::string& path);
    // `key=value` with a dotted section path, e.g. classifier.alpha=0.
    static std::string apply_overrides(const std::string& json_text,
                                       const std::vector<std::string>& sets);
    std::string to_json_text() const; // resolved echo, sorted keys
    void validate() const;
};

} // namespace tpa
