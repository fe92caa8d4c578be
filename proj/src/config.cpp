#include "tpa/config.hpp"

#include "tpa/errors.hpp"

#include "json.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace tpa {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError("config: section '" + section + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError("config: unknown key '" + section + "." + key + "'");
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& section) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value for '" + section + "." + std::string(key) + "'");
    }
}

ExtractorKind parse_kind(const std::string& s) {
    if (s == "framewise") return ExtractorKind::framewise;
    if (s == "cnn1d") return ExtractorKind::cnn1d;
    if (s == "multiscale") return ExtractorKind::multiscale;
    if (s == "tcn") return ExtractorKind::tcn;
    if (s == "gnn") return ExtractorKind::gnn;
    throw ConfigError("config: unknown extractor kind '" + s + "'");
}

std::string kind_name(ExtractorKind k) {
    switch (k) {
    case ExtractorKind::framewise: return "framewise";
    case ExtractorKind::cnn1d: return "cnn1d";
    case ExtractorKind::multiscale: return "multiscale";
    case ExtractorKind::tcn: return "tcn";
    case ExtractorKind::gnn: return "gnn";
    }
    return "?";
}

GnnGraph parse_graph(const std::string& s) {
    if (s == "forward") return GnnGraph::forward;
    if (s == "backward") return GnnGraph::backward;
    if (s == "undirected") return GnnGraph::undirected;
    throw ConfigError("config: unknown gnn graph '" + s + "'");
}

std::string graph_name(GnnGraph g) {
    switch (g) {
    case GnnGraph::forward: return "forward";
    case GnnGraph::backward: return "backward";
    case GnnGraph::undirected: return "undirected";
    }
    return "?";
}

} // namespace

Config Config::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("config: JSON parse error: " + std::string(e.what()));
    }
    check_keys(j, "<root>", {"data", "extractor", "classifier", "cvaesm", "trainer"});
    Config cfg;

    if (j.contains("data")) {
        const json& d = j["data"];
        check_keys(d, "data", {"dataset_path", "prompt_bank_path", "clip_len"});
        cfg.data.dataset_path = get_or<std::string>(d, "dataset_path", "", "data");
        cfg.data.prompt_bank_path = get_or<std::string>(d, "prompt_bank_path", "", "data");
        cfg.data.clip_len = get_or<int>(d, "clip_len", 16, "data");
    }
    if (j.contains("extractor")) {
        const json& e = j["extractor"];
        check_keys(e, "extractor",
                   {"kind", "hidden", "pooling", "kernel", "kernels", "tcn_kernel",
                    "tcn_dilations", "gnn_window", "gnn_passes", "gnn_fusion", "gnn_graphs"});
        cfg.extractor.kind = parse_kind(get_or<std::string>(e, "kind", "cnn1d", "extractor"));
        cfg.extractor.hidden = get_or<int>(e, "hidden", 256, "extractor");
        const std::string pooling = get_or<std::string>(e, "pooling", "mean", "extractor");
        if (pooling == "mean") cfg.extractor.pooling = Pooling::mean;
        else if (pooling == "max") cfg.extractor.pooling = Pooling::max;
        else throw ConfigError("config: extractor.pooling must be 'mean' or 'max'");
        cfg.extractor.kernel = get_or<int>(e, "kernel", 3, "extractor");
        cfg.extractor.kernels =
            get_or<std::vector<int>>(e, "kernels", {3, 5, 7}, "extractor");
        cfg.extractor.tcn_kernel = get_or<int>(e, "tcn_kernel", 3, "extractor");
        cfg.extractor.tcn_dilations =
            get_or<std::vector<int>>(e, "tcn_dilations", {1, 2, 4}, "extractor");
        cfg.extractor.gnn_window = get_or<int>(e, "gnn_window", 10, "extractor");
        cfg.extractor.gnn_passes = get_or<int>(e, "gnn_passes", 1, "extractor");
        const std::string fusion = get_or<std::string>(e, "gnn_fusion", "concat", "extractor");
        if (fusion == "concat") cfg.extractor.gnn_fusion = GnnFusion::concat;
        else if (fusion == "sum") cfg.extractor.gnn_fusion = GnnFusion::sum;
        else throw ConfigError("config: extractor.gnn_fusion must be 'concat' or 'sum'");
        if (e.contains("gnn_graphs")) {
            cfg.extractor.gnn_graphs.clear();
            const auto names = get_or<std::vector<std::string>>(e, "gnn_graphs", {}, "extractor");
            for (const std::string& s : names) cfg.extractor.gnn_graphs.push_back(parse_graph(s));
        }
    }
    if (j.contains("classifier")) {
        const json& c = j["classifier"];
        check_keys(c, "classifier", {"tau", "margin", "alpha", "randomize_prompts"});
        cfg.classifier.temperature = get_or<double>(c, "tau", 0.1, "classifier");
        cfg.classifier.margin = get_or<double>(c, "margin", 0.5, "classifier");
        cfg.classifier.alpha = get_or<double>(c, "alpha", 0.5, "classifier");
        cfg.classifier.randomize_prompts =
            get_or<bool>(c, "randomize_prompts", false, "classifier");
    }
    if (j.contains("cvaesm")) {
        const json& v = j["cvaesm"];
        check_keys(v, "cvaesm", {"enabled", "beta", "mc_samples"});
        cfg.cvaesm.enabled = get_or<bool>(v, "enabled", false, "cvaesm");
        cfg.cvaesm.beta = get_or<double>(v, "beta", 0.2, "cvaesm");
        cfg.cvaesm.mc_samples = get_or<int>(v, "mc_samples", 1, "cvaesm");
    }
    if (j.contains("trainer")) {
        const json& t = j["trainer"];
        check_keys(t, "trainer",
                   {"batch", "epochs", "lr", "sched_factor", "sched_patience",
                    "early_patience", "folds", "seed"});
        cfg.trainer.batch = get_or<int>(t, "batch", 16, "trainer");
        cfg.trainer.epochs = get_or<int>(t, "epochs", 40, "trainer");
        cfg.trainer.lr = get_or<double>(t, "lr", 1e-3, "trainer");
        cfg.trainer.sched_factor = get_or<double>(t, "sched_factor", 0.1, "trainer");
        cfg.trainer.sched_patience = get_or<int>(t, "sched_patience", 5, "trainer");
        cfg.trainer.early_patience = get_or<int>(t, "early_patience", 10, "trainer");
        cfg.trainer.folds = get_or<int>(t, "folds", 5, "trainer");
        cfg.trainer.seed = get_or<std::uint64_t>(t, "seed", 0, "trainer");
    }
    cfg.validate();
    return cfg;
}

Config Config::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open config: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return from_json_text(ss.str());
}

std::string Config::apply_overrides(const std::string& json_text,
                                    const std::vector<std::string>& sets) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError("config: JSON parse error: " + std::string(e.what()));
    }
    for (const std::string& s : sets) {
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects section.key=value, got '" + s + "'");
        const std::string path = s.substr(0, eq);
        const std::string value = s.substr(eq + 1);
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (true) {
            const std::size_t dot = path.find('.', start);
            if (dot == std::string::npos) {
                parts.push_back(path.substr(start));
                break;
            }
            parts.push_back(path.substr(start, dot - start));
            start = dot + 1;
        }
        if (parts.size() < 2) throw ConfigError("--set path must name a section key: " + path);
        json* cur = &j;
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) cur = &(*cur)[parts[i]];
        json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
        (*cur)[parts.back()] = parsed.is_discarded() ? json(value) : parsed;
    }
    return j.dump();
}

void Config::validate() const {
    if (data.clip_len < 1) throw ConfigError("config: data.clip_len must be >= 1");
    extractor.validate();
    if (!(classifier.temperature > 0.0)) throw ConfigError("config: classifier.tau must be > 0");
    if (classifier.margin < 0.0) throw ConfigError("config: classifier.margin must be >= 0");
    if (classifier.alpha < 0.0) throw ConfigError("config: classifier.alpha must be >= 0");
    cvaesm.validate();
    if (trainer.batch < 1) throw ConfigError("config: trainer.batch must be >= 1");
    if (trainer.epochs < 1) throw ConfigError("config: trainer.epochs must be >= 1");
    if (!(trainer.lr > 0.0)) throw ConfigError("config: trainer.lr must be > 0");
    if (!(trainer.sched_factor > 0.0 && trainer.sched_factor < 1.0))
        throw ConfigError("config: trainer.sched_factor must lie in (0, 1)");
    if (trainer.sched_patience < 1) throw ConfigError("config: trainer.sched_patience must be >= 1");
    if (trainer.early_patience < 1) throw ConfigError("config: trainer.early_patience must be >= 1");
    if (trainer.folds < 2) throw ConfigError("config: trainer.folds must be >= 2");
}

std::string Config::to_json_text() const {
    json j;
    j["data"]["dataset_path"] = data.dataset_path;
    j["data"]["prompt_bank_path"] = data.prompt_bank_path;
    j["data"]["clip_len"] = data.clip_len;
    j["extractor"]["kind"] = kind_name(extractor.kind);
    j["extractor"]["hidden"] = extractor.hidden;
    j["extractor"]["pooling"] = extractor.pooling == Pooling::mean ? "mean" : "max";
    j["extractor"]["kernel"] = extractor.kernel;
    j["extractor"]["kernels"] = extractor.kernels;
    j["extractor"]["tcn_kernel"] = extractor.tcn_kernel;
    j["extractor"]["tcn_dilations"] = extractor.tcn_dilations;
    j["extractor"]["gnn_window"] = extractor.gnn_window;
    j["extractor"]["gnn_passes"] = extractor.gnn_passes;
    j["extractor"]["gnn_fusion"] = extractor.gnn_fusion == GnnFusion::concat ? "concat" : "sum";
    {
        std::vector<std::string> gs;
        for (GnnGraph g : extractor.gnn_graphs) gs.push_back(graph_name(g));
        j["extractor"]["gnn_graphs"] = gs;
    }
    j["classifier"]["tau"] = classifier.temperature;
    j["classifier"]["margin"] = classifier.margin;
    j["classifier"]["alpha"] = classifier.alpha;
    j["classifier"]["randomize_prompts"] = classifier.randomize_prompts;
    j["cvaesm"]["enabled"] = cvaesm.enabled;
    j["cvaesm"]["beta"] = cvaesm.beta;
    j["cvaesm"]["mc_samples"] = cvaesm.mc_samples;
    j["trainer"]["batch"] = trainer.batch;
    j["trainer"]["epochs"] = trainer.epochs;
    j["trainer"]["lr"] = trainer.lr;
    j["trainer"]["sched_factor"] = trainer.sched_factor;
    j["trainer"]["sched_patience"] = trainer.sched_patience;
    j["trainer"]["early_patience"] = trainer.early_patience;
    j["trainer"]["folds"] = trainer.folds;
    j["trainer"]["seed"] = trainer.seed;
    return j.dump(2);
}

} // namespace tpa
