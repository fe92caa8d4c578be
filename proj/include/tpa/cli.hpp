#pragma once

#include "tpa/config.hpp"
#include "tpa/trainer.hpp"

#include <string>
#include <vector>

namespace tpa::cli {

// Exit codes: 0 success, 1 gradcheck failure, 2 config schema violation,
// 3 data error, 4 non-finite loss.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args); // without argv[0]

// Report serialization (deterministic: sorted keys, exact float round-trip).
std::string fold_report_json(const Config& cfg, const FoldResult& fold);
std::string aggregate_report_json(const Config& cfg, const CvResult& cv);

} // namespace tpa::cli
