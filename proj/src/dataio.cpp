#include "tpa/dataio.hpp"

#include "tpa/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "dataset format is little-endian; big-endian hosts are unsupported");

namespace tpa {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'T', 'P', 'A', 'E'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const char* what) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw DataError(std::string("dataset file truncated while reading ") + what);
    return v;
}

} // namespace

void Dataset::validate() const {
    if (dim <= 0) throw DataError("dataset: dim must be positive");
    if (num_classes <= 0) throw DataError("dataset: num_classes must be positive");
    for (const VideoRecord& r : records) {
        if (r.frames < 1) throw DataError("dataset: record '" + r.id + "' has no frames");
        if (r.dim != dim) throw DataError("dataset: record '" + r.id + "' dim mismatch");
        if (r.label < 0 || r.label >= num_classes)
            throw DataError("dataset: record '" + r.id + "' label out of range");
        if (r.data.size() != static_cast<std::size_t>(r.frames) * static_cast<std::size_t>(r.dim))
            throw DataError("dataset: record '" + r.id + "' frame buffer size mismatch");
        for (float v : r.data)
            if (!std::isfinite(v))
                throw DataError("dataset: record '" + r.id + "' has non-finite values");
    }
}

void write_dataset(const Dataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path);
    os.write(kMagic, 4);
    write_pod<std::uint32_t>(os, kVersion);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ds.dim));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ds.num_classes));
    write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(ds.records.size()));
    for (const VideoRecord& r : ds.records) {
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(r.id.size()));
        os.write(r.id.data(), static_cast<std::streamsize>(r.id.size()));
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(r.label));
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(r.frames));
        os.write(reinterpret_cast<const char*>(r.data.data()),
                 static_cast<std::streamsize>(r.data.size() * sizeof(float)));
    }
    if (!os) throw DataError("write failed: " + path);
}

Dataset read_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open dataset: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("bad magic in dataset file: " + path);
    const auto version = read_pod<std::uint32_t>(is, "version");
    if (version != kVersion)
        throw DataError("unsupported dataset version " + std::to_string(version));
    Dataset ds;
    ds.dim = static_cast<int>(read_pod<std::uint32_t>(is, "dim"));
    ds.num_classes = static_cast<int>(read_pod<std::uint32_t>(is, "num_classes"));
    const auto count = read_pod<std::uint64_t>(is, "record count");
    ds.records.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        VideoRecord r;
        const auto id_len = read_pod<std::uint32_t>(is, "id length");
        if (id_len > (1u << 20)) throw DataError("unreasonable id length in dataset file");
        r.id.resize(id_len);
        is.read(r.id.data(), id_len);
        if (!is) throw DataError("dataset file truncated while reading id");
        r.label = static_cast<int>(read_pod<std::uint32_t>(is, "label"));
        r.frames = static_cast<int>(read_pod<std::uint32_t>(is, "frame count"));
        r.dim = ds.dim;
        if (r.frames < 1) throw DataError("dataset: record '" + r.id + "' has no frames");
        r.data.resize(static_cast<std::size_t>(r.frames) * static_cast<std::size_t>(ds.dim));
        is.read(reinterpret_cast<char*>(r.data.data()),
                static_cast<std::streamsize>(r.data.size() * sizeof(float)));
        if (!is) throw DataError("dataset file truncated in record '" + r.id + "'");
        ds.records.push_back(std::move(r));
    }
    is.peek();
    if (!is.eof()) throw DataError("trailing bytes after last record: " + path);
    ds.validate();
    return ds;
}

void PromptBank::validate() const {
    if (dim <= 0) throw DataError("prompt bank: dim must be positive");
    if (classes.empty()) throw DataError("prompt bank: no classes");
    for (int c = 0; c < num_classes(); ++c) {
        const PromptClass& pc = classes[static_cast<std::size_t>(c)];
        if (pc.label != c)
            throw DataError("prompt bank: expected exactly one entry per class in label order");
        if (pc.embedding.size() != static_cast<std::size_t>(dim))
            throw DataError("prompt bank: class " + std::to_string(c) +
                            " embedding dim mismatch");
        if (pc.variants.size() != pc.variant_embeddings.size())
            throw DataError("prompt bank: class " + std::to_string(c) +
                            " variant texts/embeddings count mismatch");
        for (const auto& ve : pc.variant_embeddings)
            if (ve.size() != static_cast<std::size_t>(dim))
                throw DataError("prompt bank: class " + std::to_string(c) +
                                " variant embedding dim mismatch");
    }
}

void write_prompt_bank(const PromptBank& bank, const std::string& path) {
    bank.validate();
    json j;
    j["dim"] = bank.dim;
    j["classes"] = json::array();
    for (const PromptClass& pc : bank.classes) {
        json c;
        c["label"] = pc.label;
        c["text"] = pc.text;
        c["embedding"] = pc.embedding;
        c["variants"] = pc.variants;
        c["variant_embeddings"] = pc.variant_embeddings;
        j["classes"].push_back(std::move(c));
    }
    std::ofstream os(path);
    if (!os) throw DataError("cannot open for writing: " + path);
    os << j.dump(2) << "\n";
    if (!os) throw DataError("write failed: " + path);
}

PromptBank load_prompt_bank(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open prompt bank: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw DataError("prompt bank parse error: " + std::string(e.what()));
    }
    PromptBank bank;
    try {
        bank.dim = j.at("dim").get<int>();
        for (const json& c : j.at("classes")) {
            PromptClass pc;
            pc.label = c.at("label").get<int>();
            pc.text = c.at("text").get<std::string>();
            if (!c.contains("embedding"))
                throw DataError("prompt bank: class " + std::to_string(pc.label) +
                                " is missing an embedding");
            pc.embedding = c.at("embedding").get<std::vector<double>>();
            if (c.contains("variants")) pc.variants = c.at("variants").get<std::vector<std::string>>();
            if (c.contains("variant_embeddings"))
                pc.variant_embeddings =
                    c.at("variant_embeddings").get<std::vector<std::vector<double>>>();
            bank.classes.push_back(std::move(pc));
        }
    } catch (const json::exception& e) {
        throw DataError("prompt bank schema error: " + std::string(e.what()));
    }
    std::sort(bank.classes.begin(), bank.classes.end(),
              [](const PromptClass& a, const PromptClass& b) { return a.label < b.label; });
    bank.validate();
    return bank;
}

Tensor bank_epoch_view(const PromptBank& bank, bool randomize, Rng& rng) {
    const int C = bank.num_classes(), D = bank.dim;
    std::vector<double> data(static_cast<std::size_t>(C) * static_cast<std::size_t>(D));
    for (int c = 0; c < C; ++c) {
        const PromptClass& pc = bank.classes[static_cast<std::size_t>(c)];
        const std::vector<double>* src = &pc.embedding;
        if (randomize && !pc.variant_embeddings.empty()) {
            int v = rng.uniform_int(static_cast<int>(pc.variant_embeddings.size()));
            src = &pc.variant_embeddings[static_cast<std::size_t>(v)];
        }
        std::copy(src->begin(), src->end(),
                  data.begin() + static_cast<std::ptrdiff_t>(c) * D);
    }
    return Tensor::from({C, D}, std::move(data), false);
}

SynthResult synth_generate(const SynthSpec& spec) {
    if (spec.separation < 0.0) throw DataError("synth: separation must be >= 0");
    if (spec.num_classes < 1 || spec.per_class < 1 || spec.dim < 1)
        throw DataError("synth: counts and dim must be positive");
    if (spec.t_min < 1 || spec.t_max < spec.t_min) throw DataError("synth: bad t range");
    if (spec.num_classes > spec.dim)
        throw DataError("synth: dim must be >= num_classes for orthogonal class directions");

    Rng rng(mix_seed(spec.seed, 0x5e17));
    const int C = spec.num_classes, D = spec.dim;

    // Class directions: random Gaussian columns, Gram-Schmidt orthonormalized.
    std::vector<std::vector<double>> u(static_cast<std::size_t>(C),
                                       std::vector<double>(static_cast<std::size_t>(D)));
    for (int c = 0; c < C; ++c) {
        auto& col = u[static_cast<std::size_t>(c)];
        for (double& v : col) v = rng.normal();
        for (int prev = 0; prev < c; ++prev) {
            const auto& p = u[static_cast<std::size_t>(prev)];
            double dot = 0.0;
            for (int d = 0; d < D; ++d) dot += col[static_cast<std::size_t>(d)] * p[static_cast<std::size_t>(d)];
            for (int d = 0; d < D; ++d) col[static_cast<std::size_t>(d)] -= dot * p[static_cast<std::size_t>(d)];
        }
        double norm = 0.0;
        for (double v : col) norm += v * v;
        norm = std::sqrt(norm);
        if (norm < 1e-9) throw DataError("synth: degenerate class direction");
        for (double& v : col) v /= norm;
    }

    // Temporal frequencies in [0.2, 0.4] cycles per video: each class traces a
    // distinct partial oscillation whose time-mean stays aligned with u_c.
    std::vector<double> freq(static_cast<std::size_t>(C));
    for (double& f : freq) f = rng.range(0.2, 0.4);

    SynthResult out;
    out.bank.dim = D;
    Rng prompt_rng = rng.fork(1);
    constexpr int kVariants = 3;
    for (int c = 0; c < C; ++c) {
        PromptClass pc;
        pc.label = c;
        pc.text = "class " + std::to_string(c) + " prompt";
        pc.embedding.resize(static_cast<std::size_t>(D));
        for (int d = 0; d < D; ++d)
            pc.embedding[static_cast<std::size_t>(d)] =
                spec.separation * u[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] +
                0.05 * prompt_rng.normal();
        for (int v = 0; v < kVariants; ++v) {
            pc.variants.push_back("class " + std::to_string(c) + " variant " + std::to_string(v));
            std::vector<double> ve(static_cast<std::size_t>(D));
            for (int d = 0; d < D; ++d)
                ve[static_cast<std::size_t>(d)] =
                    spec.separation * u[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] +
                    0.05 * prompt_rng.normal();
            pc.variant_embeddings.push_back(std::move(ve));
        }
        out.bank.classes.push_back(std::move(pc));
    }

    out.dataset.dim = D;
    out.dataset.num_classes = C;
    Rng data_rng = rng.fork(2);
    constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < spec.per_class; ++i) {
            VideoRecord r;
            {
                std::ostringstream id;
                id << "c" << c << "_v";
                id.width(3);
                id.fill('0');
                id << i;
                r.id = id.str();
            }
            r.label = c;
            r.dim = D;
            r.frames = spec.t_min + data_rng.uniform_int(spec.t_max - spec.t_min + 1);
            r.data.resize(static_cast<std::size_t>(r.frames) * static_cast<std::size_t>(D));
            for (int t = 0; t < r.frames; ++t) {
                const double coef =
                    spec.separation *
                    std::cos(kTwoPi * freq[static_cast<std::size_t>(c)] * t / r.frames);
                for (int d = 0; d < D; ++d)
                    r.data[static_cast<std::size_t>(t) * D + d] = static_cast<float>(
                        coef * u[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)] +
                        data_rng.normal());
            }
            out.dataset.records.push_back(std::move(r));
        }
    }
    out.dataset.validate();
    out.bank.validate();
    return out;
}

FoldPlan stratified_folds(const Dataset& ds, int k, std::uint64_t seed, bool allow_sparse) {
    if (k < 2) throw DataError("stratified_folds: k must be >= 2");
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.num_classes));
    for (int i = 0; i < static_cast<int>(ds.records.size()); ++i)
        by_class[static_cast<std::size_t>(ds.records[static_cast<std::size_t>(i)].label)].push_back(i);
    for (int c = 0; c < ds.num_classes; ++c)
        if (static_cast<int>(by_class[static_cast<std::size_t>(c)].size()) < k && !allow_sparse)
            throw DataError("stratified_folds: class " + std::to_string(c) + " has fewer than " +
                            std::to_string(k) + " samples (pass allow_sparse to accept)");
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.folds.assign(static_cast<std::size_t>(k), {});
    Rng rng(mix_seed(seed, 0xf01d));
    for (int c = 0; c < ds.num_classes; ++c) {
        auto idx = by_class[static_cast<std::size_t>(c)];
        rng.shuffle(idx);
        for (std::size_t j = 0; j < idx.size(); ++j)
            plan.folds[j % static_cast<std::size_t>(k)].push_back(idx[j]);
    }
    for (auto& f : plan.folds) std::sort(f.begin(), f.end());
    return plan;
}

Tensor sample_clip(const VideoRecord& rec, int clip_len, ClipMode mode, Rng& rng) {
    if (clip_len < 1) throw DataError("sample_clip: clip length must be >= 1");
    const int T = rec.frames, D = rec.dim, L = clip_len;
    std::vector<double> data(static_cast<std::size_t>(L) * static_cast<std::size_t>(D));
    if (T >= L) {
        const int start = mode == ClipMode::train ? rng.uniform_int(T - L + 1) : (T - L) / 2;
        for (int t = 0; t < L; ++t)
            for (int d = 0; d < D; ++d)
                data[static_cast<std::size_t>(t) * D + d] = rec.at(start + t, d);
    } else {
        for (int t = 0; t < L; ++t) {
            const int src = std::min(t, T - 1); // repeat the last frame
            for (int d = 0; d < D; ++d)
                data[static_cast<std::size_t>(t) * D + d] = rec.at(src, d);
        }
    }
    return Tensor::from({L, D}, std::move(data), false);
}

int bin_ef(double ef_percent) {
    if (!std::isfinite(ef_percent) || ef_percent < 0.0 || ef_percent > 100.0)
        throw DataError("bin_ef: EF must lie in [0, 100]");
    if (ef_percent < 40.0) return 0;
    if (ef_percent <= 54.0) return 1;
    return 2;
}

std::vector<EfRow> read_ef_table(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open EF table: " + path);
    std::string line;
    if (!std::getline(is, line)) throw DataError("EF table is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "id,ef") throw DataError("EF table must start with header 'id,ef'");
    std::vector<EfRow> rows;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError("EF table line " + std::to_string(lineno) + ": missing comma");
        EfRow row;
        row.id = line.substr(0, comma);
        try {
            row.ef = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw DataError("EF table line " + std::to_string(lineno) + ": bad EF value");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace tpa
