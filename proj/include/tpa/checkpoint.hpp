#pragma once

#include "tpa/config.hpp"
#include "tpa/trainer.hpp"

#include <string>

namespace tpa {

// Binary checkpoint ("TPAC", version 1, little-endian): the resolved config
// echo, dataset dims, fold/epoch bookkeeping, the validation record ids, and
// every named parameter tensor as float64 values. Parameters keep full
// precision so re-evaluating a checkpoint reproduces the stored best-epoch
// metrics exactly.
struct Checkpoint {
    std::string config_json;
    int dim = 0;
    int num_classes = 0;
    int fold = -1;
    int best_epoch = -1;
    std::vector<std::string> val_ids;
    std::vector<std::string> param_names;
    std::vector<std::vector<int>> param_shapes;
    std::vector<std::vector<double>> param_values;
};

Checkpoint make_checkpoint(const Config& cfg, int dim, int num_classes,
                           const FoldResult& fold);
void write_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

// Rebuilds the trained model from a checkpoint.
TpaModel model_from_checkpoint(const Checkpoint& ck, Config* out_cfg = nullptr);

} // namespace tpa
