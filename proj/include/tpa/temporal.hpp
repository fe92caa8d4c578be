#pragma once

#include "tpa/ops.hpp"
#include "tpa/params.hpp"
#include "tpa/tensor.hpp"

#include <memory>
#include <string>
#include <vector>

namespace tpa {

// ============================================================================
// Trainable temporal extractors mapping an L x D frame-embedding matrix to a
// single video embedding h of width `hidden` (256 by default).
// ============================================================================

enum class ExtractorKind { framewise, cnn1d, multiscale, tcn, gnn };
enum class Pooling { mean, max };
enum class GnnFusion { concat, sum };
enum class GnnGraph { forward, backward, undirected };

struct ExtractorConfig {
    ExtractorKind kind = ExtractorKind::cnn1d;
    int hidden = 256;
    Pooling pooling = Pooling::mean;
    int kernel = 3;                           // cnn1d
    std::vector<int> kernels = {3, 5, 7};     // multiscale branches
    int tcn_kernel = 3;
    std::vector<int> tcn_dilations = {1, 2, 4};
    int gnn_window = 10;
    int gnn_passes = 1;
    GnnFusion gnn_fusion = GnnFusion::concat;
    std::vector<GnnGraph> gnn_graphs = {GnnGraph::forward, GnnGraph::backward,
                                        GnnGraph::undirected};

    void validate() const; // throws ConfigError
};

class TemporalExtractor {
public:
    virtual ~TemporalExtractor() = default;
    // X is [L x D]; the result is a `hidden`-vector.
    virtual Tensor forward(const Tensor& X) const = 0;
    // Pre-pooling per-frame feature map [L x hidden]. The multiscale
    // extractor pools per branch before fusing and has no single map.
    virtual Tensor time_features(const Tensor& X) const;
};

// Registers the extractor's parameters into `store` under "extractor." names.
std::unique_ptr<TemporalExtractor> make_extractor(const ExtractorConfig& cfg, int input_dim,
                                                  ParamStore& store, Rng& init_rng);

// Row-normalized frame adjacency over L nodes: forward connects i -> j iff
// 0 < j - i <= window, backward is its transpose, undirected their union.
// Row i holds node i's outgoing weights, each 1/outdegree; rows without
// edges stay zero. Returned as a constant L x L tensor.
Tensor frame_adjacency(int length, int window, GnnGraph graph);

// TCN stack receptive field: 1 + sum over conv layers of (k - 1) * dilation.
int tcn_receptive_field(int kernel, const std::vector<int>& dilations);

} // namespace tpa
