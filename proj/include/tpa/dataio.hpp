#pragma once

#include "tpa/rng.hpp"
#include "tpa/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tpa {

// ============================================================================
// Dataset of per-frame embedding sequences, prompt banks, fold planning and
// clip sampling. Frames are kept as float32 exactly as stored on disk; clip
// sampling widens to float64 tensors.
// ============================================================================

struct VideoRecord {
    std::string id;
    int label = 0;
    int frames = 0; // T
    int dim = 0;    // D
    std::vector<float> data; // T x D row-major

    float at(int t, int d) const {
        return data[static_cast<std::size_t>(t) * static_cast<std::size_t>(dim) +
                    static_cast<std::size_t>(d)];
    }
};

struct Dataset {
    int dim = 0;
    int num_classes = 0;
    std::vector<VideoRecord> records;

    void validate() const; // throws DataError on any invariant violation
};

struct PromptClass {
    int label = 0;
    std::string text;
    std::vector<double> embedding;
    std::vector<std::string> variants;
    std::vector<std::vector<double>> variant_embeddings;
};

struct PromptBank {
    int dim = 0;
    std::vector<PromptClass> classes; // ordered by label, one per class

    int num_classes() const { return static_cast<int>(classes.size()); }
    void validate() const;
};

struct FoldPlan {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<int>> folds; // disjoint record indices
};

// --- dataset file format (binary little-endian) ------------------------------
// magic "TPAE", u32 version=1, u32 D, u32 C, u64 record count; per record:
// u32 id byte-length + UTF-8 id, u32 label, u32 T, then T*D float32 values.
void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

// --- prompt bank (JSON) ------------------------------------------------------
void write_prompt_bank(const PromptBank& bank, const std::string& path);
PromptBank load_prompt_bank(const std::string& path);

// One epoch's view of the bank as a C x D constant tensor. With
// randomize=false this is the fixed per-class entry; otherwise one variant
// is sampled per class from the seeded stream.
Tensor bank_epoch_view(const PromptBank& bank, bool randomize, Rng& rng);

// --- synthetic generation ----------------------------------------------------
struct SynthSpec {
    std::uint64_t seed = 0;
    int num_classes = 3;
    int per_class = 60;
    int dim = 64;
    int t_min = 24;
    int t_max = 48;
    double separation = 4.0;
};

struct SynthResult {
    Dataset dataset;
    PromptBank bank;
};

// Each class c gets a unit direction u_c (mutually orthogonalized columns of
// a random map) and a temporal frequency f_c; frame t of a class-c video is
// separation * cos(2 pi f_c t / T) * u_c plus unit Gaussian noise. Prompt
// embeddings are separation * u_c plus small noise, so class evidence lives
// in the temporal trajectory along the prompt direction.
SynthResult synth_generate(const SynthSpec& spec);

// --- fold planning -----------------------------------------------------------
// Per-class shuffled round-robin assignment; per-class fold counts differ by
// at most 1. Classes with fewer than k samples are rejected unless
// allow_sparse.
FoldPlan stratified_folds(const Dataset& ds, int k, std::uint64_t seed, bool allow_sparse);

// --- clip sampling -----------------------------------------------------------
enum class ClipMode { train, eval };

// Train mode draws a uniform start in [0, T-L]; eval mode uses the centered
// start floor((T-L)/2). Videos shorter than L repeat their last frame.
// Returns an L x D float64 tensor. Eval mode consumes no randomness.
Tensor sample_clip(const VideoRecord& rec, int clip_len, ClipMode mode, Rng& rng);

// --- EF binning --------------------------------------------------------------
// ef < 40 -> 0 (moderately/severely decreased), 40 <= ef <= 54 -> 1 (mildly
// decreased), ef > 54 -> 2 (normal/hyperdynamic).
int bin_ef(double ef_percent);

struct EfRow {
    std::string id;
    double ef = 0.0;
};

// CSV with header "id,ef".
std::vector<EfRow> read_ef_table(const std::string& path);

} // namespace tpa
