#include "tpa/checkpoint.hpp"

#include "tpa/errors.hpp"

#include <cstring>
#include <fstream>

namespace tpa {

namespace {

constexpr char kMagic[4] = {'T', 'P', 'A', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const char* what) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw DataError(std::string("checkpoint truncated while reading ") + what);
    return v;
}

void write_string(std::ostream& os, const std::string& s) {
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is, const char* what) {
    const auto len = read_pod<std::uint32_t>(is, what);
    if (len > (1u << 26)) throw DataError("checkpoint: unreasonable string length");
    std::string s(len, '\0');
    is.read(s.data(), len);
    if (!is) throw DataError(std::string("checkpoint truncated while reading ") + what);
    return s;
}

} // namespace

Checkpoint make_checkpoint(const Config& cfg, int dim, int num_classes,
                           const FoldResult& fold) {
    Checkpoint ck;
    ck.config_json = cfg.to_json_text();
    ck.dim = dim;
    ck.num_classes = num_classes;
    ck.fold = fold.fold;
    ck.best_epoch = fold.best_epoch;
    ck.val_ids = fold.val_ids;
    ck.param_names = fold.param_names;
    ck.param_shapes = fold.param_shapes;
    ck.param_values = fold.best_params;
    return ck;
}

void write_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path);
    os.write(kMagic, 4);
    write_pod<std::uint32_t>(os, kVersion);
    write_string(os, ck.config_json);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ck.dim));
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ck.num_classes));
    write_pod<std::int32_t>(os, ck.fold);
    write_pod<std::int32_t>(os, ck.best_epoch);
    write_pod<std::uint64_t>(os, ck.val_ids.size());
    for (const std::string& id : ck.val_ids) write_string(os, id);
    write_pod<std::uint64_t>(os, ck.param_names.size());
    for (std::size_t i = 0; i < ck.param_names.size(); ++i) {
        write_string(os, ck.param_names[i]);
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(ck.param_shapes[i].size()));
        for (int d : ck.param_shapes[i]) write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(d));
        const auto& vals = ck.param_values[i];
        write_pod<std::uint64_t>(os, vals.size());
        os.write(reinterpret_cast<const char*>(vals.data()),
                 static_cast<std::streamsize>(vals.size() * sizeof(double)));
    }
    if (!os) throw DataError("write failed: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("bad magic in checkpoint file: " + path);
    const auto version = read_pod<std::uint32_t>(is, "version");
    if (version != kVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(version));
    Checkpoint ck;
    ck.config_json = read_string(is, "config");
    ck.dim = static_cast<int>(read_pod<std::uint32_t>(is, "dim"));
    ck.num_classes = static_cast<int>(read_pod<std::uint32_t>(is, "num_classes"));
    ck.fold = read_pod<std::int32_t>(is, "fold");
    ck.best_epoch = read_pod<std::int32_t>(is, "best_epoch");
    const auto id_count = read_pod<std::uint64_t>(is, "val id count");
    for (std::uint64_t i = 0; i < id_count; ++i) ck.val_ids.push_back(read_string(is, "val id"));
    const auto tensor_count = read_pod<std::uint64_t>(is, "tensor count");
    for (std::uint64_t i = 0; i < tensor_count; ++i) {
        ck.param_names.push_back(read_string(is, "tensor name"));
        const auto ndim = read_pod<std::uint32_t>(is, "tensor rank");
        std::vector<int> shape;
        for (std::uint32_t d = 0; d < ndim; ++d)
            shape.push_back(static_cast<int>(read_pod<std::uint32_t>(is, "tensor dim")));
        ck.param_shapes.push_back(std::move(shape));
        const auto count = read_pod<std::uint64_t>(is, "tensor size");
        std::vector<double> vals(count);
        is.read(reinterpret_cast<char*>(vals.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
        if (!is) throw DataError("checkpoint truncated in tensor values");
        ck.param_values.push_back(std::move(vals));
    }
    return ck;
}

TpaModel model_from_checkpoint(const Checkpoint& ck, Config* out_cfg) {
    Config cfg = Config::from_json_text(ck.config_json);
    if (out_cfg) *out_cfg = cfg;
    ClassifierConfig cls_cfg = cfg.classifier;
    cls_cfg.num_classes = ck.num_classes;
    TpaModel model(ck.dim, cfg.extractor, cls_cfg, cfg.cvaesm,
                   fold_init_seed(cfg.trainer.seed, ck.fold));
    const auto& items = model.params().items();
    if (items.size() != ck.param_names.size())
        throw DataError("checkpoint: parameter count disagrees with rebuilt model");
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].first != ck.param_names[i])
            throw DataError("checkpoint: parameter name mismatch at '" + ck.param_names[i] + "'");
        if (items[i].second.shape() != ck.param_shapes[i])
            throw DataError("checkpoint: parameter shape mismatch at '" + ck.param_names[i] + "'");
    }
    model.params().restore_values(ck.param_values);
    return model;
}

} // namespace tpa
