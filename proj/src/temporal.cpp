#include "tpa/temporal.hpp"

#include "tpa/errors.hpp"

#include <stdexcept>

namespace tpa {

void ExtractorConfig::validate() const {
    if (hidden < 1) throw ConfigError("extractor: hidden width must be >= 1");
    if (kernel < 1 || kernel % 2 == 0)
        throw ConfigError("extractor: cnn1d kernel must be odd and >= 1");
    if (kernels.empty()) throw ConfigError("extractor: multiscale kernel list is empty");
    for (int k : kernels)
        if (k < 1 || k % 2 == 0)
            throw ConfigError("extractor: multiscale kernels must be odd and >= 1");
    if (tcn_kernel < 1) throw ConfigError("extractor: tcn kernel must be >= 1");
    if (tcn_dilations.empty()) throw ConfigError("extractor: tcn dilation list is empty");
    for (int d : tcn_dilations)
        if (d < 1) throw ConfigError("extractor: tcn dilations must be >= 1");
    if (gnn_window < 1) throw ConfigError("extractor: gnn window must be >= 1");
    if (gnn_passes < 1) throw ConfigError("extractor: gnn passes must be >= 1");
    if (gnn_graphs.empty()) throw ConfigError("extractor: gnn graph list is empty");
}

int tcn_receptive_field(int kernel, const std::vector<int>& dilations) {
    int rf = 1;
    for (int d : dilations) rf += 2 * (kernel - 1) * d; // two convs per block
    return rf;
}

Tensor frame_adjacency(int length, int window, GnnGraph graph) {
    if (length < 1) throw std::invalid_argument("frame_adjacency: length must be >= 1");
    if (window < 1) throw std::invalid_argument("frame_adjacency: window must be >= 1");
    const int L = length;
    std::vector<double> a(static_cast<std::size_t>(L) * static_cast<std::size_t>(L), 0.0);
    for (int i = 0; i < L; ++i) {
        int deg = 0;
        for (int j = 0; j < L; ++j) {
            const int delta = j - i;
            bool edge = false;
            switch (graph) {
            case GnnGraph::forward: edge = delta > 0 && delta <= window; break;
            case GnnGraph::backward: edge = delta < 0 && -delta <= window; break;
            case GnnGraph::undirected: edge = delta != 0 && std::abs(delta) <= window; break;
            }
            if (edge) {
                a[static_cast<std::size_t>(i) * L + j] = 1.0;
                ++deg;
            }
        }
        if (deg > 0)
            for (int j = 0; j < L; ++j) a[static_cast<std::size_t>(i) * L + j] /= deg;
    }
    return Tensor::from({L, L}, std::move(a), false);
}

Tensor TemporalExtractor::time_features(const Tensor&) const {
    throw std::logic_error("this extractor has no single pre-pooling feature map");
}

namespace {

Tensor pool_time(const Tensor& features, Pooling pooling) {
    return reduce_time(features, pooling == Pooling::mean ? Reduce::mean : Reduce::max);
}

// Shared per-frame linear map followed by temporal pooling.
class FramewiseExtractor : public TemporalExtractor {
public:
    FramewiseExtractor(const ExtractorConfig& cfg, int input_dim, ParamStore& store,
                       Rng& rng)
        : pooling_(cfg.pooling) {
        W_ = store.add("extractor.W", {input_dim, cfg.hidden}, Init::xavier, rng);
        b_ = store.add("extractor.b", {cfg.hidden}, Init::zero, rng);
    }
    Tensor forward(const Tensor& X) const override {
        return pool_time(time_features(X), pooling_);
    }
    Tensor time_features(const Tensor& X) const override { return linear(X, W_, b_); }

private:
    Pooling pooling_;
    Tensor W_, b_;
};

class Cnn1dExtractor : public TemporalExtractor {
public:
    Cnn1dExtractor(const ExtractorConfig& cfg, int input_dim, ParamStore& store, Rng& rng)
        : pooling_(cfg.pooling) {
        K_ = store.add("extractor.conv.K", {cfg.kernel, input_dim, cfg.hidden}, Init::xavier,
                       rng);
        b_ = store.add("extractor.conv.b", {cfg.hidden}, Init::zero, rng);
    }
    Tensor forward(const Tensor& X) const override {
        return pool_time(time_features(X), pooling_);
    }
    Tensor time_features(const Tensor& X) const override {
        return relu(add_rowvec(conv1d(X, K_, Padding::same, 1), b_));
    }

private:
    Pooling pooling_;
    Tensor K_, b_;
};

// Parallel same-padded convolutions at several kernel sizes; each branch is
// pooled, the pooled vectors are concatenated and projected back to hidden.
class MultiscaleExtractor : public TemporalExtractor {
public:
    MultiscaleExtractor(const ExtractorConfig& cfg, int input_dim, ParamStore& store,
                        Rng& rng)
        : pooling_(cfg.pooling) {
        for (std::size_t i = 0; i < cfg.kernels.size(); ++i) {
            const std::string prefix = "extractor.branch" + std::to_string(i);
            branches_.push_back(
                {store.add(prefix + ".K", {cfg.kernels[i], input_dim, cfg.hidden},
                           Init::xavier, rng),
                 store.add(prefix + ".b", {cfg.hidden}, Init::zero, rng)});
        }
        const int cat = cfg.hidden * static_cast<int>(cfg.kernels.size());
        Wout_ = store.add("extractor.out.W", {cat, cfg.hidden}, Init::xavier, rng);
        bout_ = store.add("extractor.out.b", {cfg.hidden}, Init::zero, rng);
    }
    Tensor forward(const Tensor& X) const override {
        std::vector<Tensor> pooled;
        for (const Branch& br : branches_)
            pooled.push_back(
                pool_time(relu(add_rowvec(conv1d(X, br.K, Padding::same, 1), br.b)), pooling_));
        return linear(concat(pooled), Wout_, bout_);
    }

private:
    struct Branch {
        Tensor K, b;
    };
    Pooling pooling_;
    std::vector<Branch> branches_;
    Tensor Wout_, bout_;
};

// Stack of causal dilated residual blocks. Each block applies
// conv-relu-conv at one dilation and adds the block input back (a 1x1
// projection where channel counts differ). With all conv weights at zero the
// stack reduces to the first block's input projection.
class TcnExtractor : public TemporalExtractor {
public:
    TcnExtractor(const ExtractorConfig& cfg, int input_dim, ParamStore& store, Rng& rng)
        : pooling_(cfg.pooling), kernel_(cfg.tcn_kernel) {
        int in_ch = input_dim;
        for (std::size_t i = 0; i < cfg.tcn_dilations.size(); ++i) {
            const std::string prefix = "extractor.block" + std::to_string(i);
            Block blk;
            blk.dilation = cfg.tcn_dilations[i];
            blk.K1 = store.add(prefix + ".conv1.K", {kernel_, in_ch, cfg.hidden}, Init::xavier,
                               rng);
            blk.b1 = store.add(prefix + ".conv1.b", {cfg.hidden}, Init::zero, rng);
            blk.K2 = store.add(prefix + ".conv2.K", {kernel_, cfg.hidden, cfg.hidden},
                               Init::xavier, rng);
            blk.b2 = store.add(prefix + ".conv2.b", {cfg.hidden}, Init::zero, rng);
            if (in_ch != cfg.hidden) {
                blk.has_proj = true;
                blk.Kres = store.add(prefix + ".res.K", {1, in_ch, cfg.hidden}, Init::xavier,
                                     rng);
                blk.bres = store.add(prefix + ".res.b", {cfg.hidden}, Init::zero, rng);
            }
            blocks_.push_back(std::move(blk));
            in_ch = cfg.hidden;
        }
    }
    Tensor forward(const Tensor& X) const override {
        return pool_time(time_features(X), pooling_);
    }
    Tensor time_features(const Tensor& X) const override {
        Tensor h = X;
        for (const Block& blk : blocks_) {
            Tensor y = relu(add_rowvec(conv1d(h, blk.K1, Padding::causal, blk.dilation), blk.b1));
            y = add_rowvec(conv1d(y, blk.K2, Padding::causal, blk.dilation), blk.b2);
            Tensor res = blk.has_proj
                             ? add_rowvec(conv1d(h, blk.Kres, Padding::causal, 1), blk.bres)
                             : h;
            h = add(y, res);
        }
        return h;
    }

private:
    struct Block {
        int dilation = 1;
        bool has_proj = false;
        Tensor K1, b1, K2, b2, Kres, bres;
    };
    Pooling pooling_;
    int kernel_;
    std::vector<Block> blocks_;
};

// Message passing over frame graphs. Each configured graph runs `passes`
// rounds of relu(linear(A . H)) with its own weights per pass; a linear self
// branch carries the node's own features. Graph outputs and the self branch
// are fused, pooled over nodes, and projected to the hidden width.
class GnnExtractor : public TemporalExtractor {
public:
    GnnExtractor(const ExtractorConfig& cfg, int input_dim, ParamStore& store, Rng& rng)
        : cfg_(cfg) {
        Wself_ = store.add("extractor.self.W", {input_dim, cfg.hidden}, Init::xavier, rng);
        bself_ = store.add("extractor.self.b", {cfg.hidden}, Init::zero, rng);
        for (GnnGraph g : cfg.gnn_graphs) {
            GraphParams gp;
            gp.graph = g;
            int in_ch = input_dim;
            for (int p = 0; p < cfg.gnn_passes; ++p) {
                const std::string prefix =
                    "extractor." + graph_name(g) + ".pass" + std::to_string(p);
                gp.W.push_back(store.add(prefix + ".W", {in_ch, cfg.hidden}, Init::xavier, rng));
                gp.b.push_back(store.add(prefix + ".b", {cfg.hidden}, Init::zero, rng));
                in_ch = cfg.hidden;
            }
            graphs_.push_back(std::move(gp));
        }
        const int fused = cfg.gnn_fusion == GnnFusion::concat
                              ? cfg.hidden * (1 + static_cast<int>(cfg.gnn_graphs.size()))
                              : cfg.hidden;
        Wout_ = store.add("extractor.out.W", {fused, cfg.hidden}, Init::xavier, rng);
        bout_ = store.add("extractor.out.b", {cfg.hidden}, Init::zero, rng);
    }

    Tensor forward(const Tensor& X) const override {
        return linear(pool_time(fused_features(X), cfg_.pooling), Wout_, bout_);
    }

private:
    Tensor fused_features(const Tensor& X) const {
        const int L = X.dim(0);
        std::vector<Tensor> outs;
        outs.push_back(linear(X, Wself_, bself_));
        for (const GraphParams& gp : graphs_) {
            Tensor A = frame_adjacency(L, cfg_.gnn_window, gp.graph);
            Tensor H = X;
            for (int p = 0; p < cfg_.gnn_passes; ++p)
                H = relu(linear(matmul(A, H), gp.W[static_cast<std::size_t>(p)],
                                gp.b[static_cast<std::size_t>(p)]));
            outs.push_back(H);
        }
        if (cfg_.gnn_fusion == GnnFusion::concat) return concat_cols(outs);
        Tensor fused = outs[0];
        for (std::size_t i = 1; i < outs.size(); ++i) fused = add(fused, outs[i]);
        return fused;
    }

public:

private:
    static std::string graph_name(GnnGraph g) {
        switch (g) {
        case GnnGraph::forward: return "fwd";
        case GnnGraph::backward: return "bwd";
        case GnnGraph::undirected: return "und";
        }
        return "?";
    }
    struct GraphParams {
        GnnGraph graph;
        std::vector<Tensor> W, b;
    };
    ExtractorConfig cfg_;
    Tensor Wself_, bself_, Wout_, bout_;
    std::vector<GraphParams> graphs_;
};

} // namespace

std::unique_ptr<TemporalExtractor> make_extractor(const ExtractorConfig& cfg, int input_dim,
                                                  ParamStore& store, Rng& init_rng) {
    cfg.validate();
    switch (cfg.kind) {
    case ExtractorKind::framewise:
        return std::make_unique<FramewiseExtractor>(cfg, input_dim, store, init_rng);
    case ExtractorKind::cnn1d:
        return std::make_unique<Cnn1dExtractor>(cfg, input_dim, store, init_rng);
    case ExtractorKind::multiscale:
        return std::make_unique<MultiscaleExtractor>(cfg, input_dim, store, init_rng);
    case ExtractorKind::tcn:
        return std::make_unique<TcnExtractor>(cfg, input_dim, store, init_rng);
    case ExtractorKind::gnn:
        return std::make_unique<GnnExtractor>(cfg, input_dim, store, init_rng);
    }
    throw ConfigError("extractor: unknown kind");
}

} // namespace tpa
