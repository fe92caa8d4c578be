#include "tpa/cli.hpp"

#include "tpa/checkpoint.hpp"
#include "tpa/errors.hpp"
#include "tpa/gradcheck.hpp"
#include "tpa/metrics.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace tpa::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitGradcheckFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

json bin_table_json(const std::vector<CalibrationBin>& bins) {
    json arr = json::array();
    for (const CalibrationBin& b : bins) {
        json jb;
        jb["lower"] = b.lower;
        jb["upper"] = b.upper;
        jb["count"] = b.count;
        jb["accuracy"] = b.accuracy;
        jb["confidence"] = b.confidence;
        arr.push_back(std::move(jb));
    }
    return arr;
}

json report_json(const CalibrationReport& rep) {
    json j;
    j["macro_f1"] = rep.macro_f1;
    j["auc"] = rep.auc;
    j["ece"] = rep.ece;
    j["aece"] = rep.aece;
    j["n"] = rep.n;
    j["auc_skipped"] = rep.auc_skipped;
    j["ece_bins"] = bin_table_json(rep.ece_bins);
    j["aece_bins"] = bin_table_json(rep.aece_bins);
    return j;
}

json fold_summary_json(const FoldResult& fold) {
    json j;
    j["fold"] = fold.fold;
    j["best_epoch"] = fold.best_epoch;
    j["epochs_run"] = fold.epochs_run;
    j["val"] = report_json(fold.val);
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path);
    os << text;
    if (!os) throw DataError("write failed: " + path);
}

struct LoadedData {
    Dataset dataset;
    PromptBank bank;
};

LoadedData load_data(const Config& cfg) {
    if (cfg.data.dataset_path.empty())
        throw DataError("config gives no data.dataset_path");
    if (cfg.data.prompt_bank_path.empty())
        throw DataError("config gives no data.prompt_bank_path");
    LoadedData d;
    d.dataset = read_dataset(cfg.data.dataset_path);
    d.bank = load_prompt_bank(cfg.data.prompt_bank_path);
    if (d.bank.dim != d.dataset.dim)
        throw DataError("prompt bank dim disagrees with dataset dim");
    if (d.bank.num_classes() != d.dataset.num_classes)
        throw DataError("prompt bank class count disagrees with dataset");
    return d;
}

int cmd_synth(const SynthSpec& spec, const std::string& out_dataset,
              const std::string& out_bank) {
    SynthResult r = synth_generate(spec);
    write_dataset(r.dataset, out_dataset);
    write_prompt_bank(r.bank, out_bank);
    std::cout << "synth: wrote " << r.dataset.records.size() << " records (D=" << r.dataset.dim
              << ", C=" << r.dataset.num_classes << ", " << spec.per_class
              << " per class) to " << out_dataset << "\n";
    std::cout << "synth: wrote " << r.bank.num_classes() << "-entry prompt bank to " << out_bank
              << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& sets,
              const std::string& out_dir, int parallel_folds) {
    std::ifstream is(config_path);
    if (!is) throw DataError("cannot open config: " + config_path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    text = Config::apply_overrides(text, sets);
    Config cfg = Config::from_json_text(text);

    LoadedData d = load_data(cfg);
    fs::create_directories(out_dir);
    CvResult cv = cross_validate(d.dataset, d.bank, cfg, parallel_folds);

    for (const FoldResult& fold : cv.folds) {
        const std::string stem = out_dir + "/fold_" + std::to_string(fold.fold);
        write_text(stem + ".json", fold_report_json(cfg, fold));
        write_checkpoint(make_checkpoint(cfg, d.dataset.dim, d.dataset.num_classes, fold),
                         stem + ".ckpt");
    }
    write_text(out_dir + "/aggregate.json", aggregate_report_json(cfg, cv));
    std::cout << "train: macro_f1 " << cv.macro_f1.mean << " +/- " << cv.macro_f1.stddev
              << ", auc " << cv.auc.mean << " +/- " << cv.auc.stddev << ", ece "
              << cv.ece.mean << ", aece " << cv.aece.mean << "\n";
    std::cout << "train: reports written to " << out_dir << "\n";
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& dataset_path, int mc_samples,
             int bins, const std::string& split, const std::string& report_out,
             const std::string& reliability_out) {
    Checkpoint ck = read_checkpoint(ckpt_path);
    Config cfg;
    TpaModel model = model_from_checkpoint(ck, &cfg);
    Dataset ds = read_dataset(dataset_path);
    if (ds.dim != ck.dim) throw DataError("eval: dataset dim disagrees with checkpoint");
    if (ds.num_classes != ck.num_classes)
        throw DataError("eval: dataset class count disagrees with checkpoint");
    PromptBank bank = load_prompt_bank(cfg.data.prompt_bank_path);
    if (bank.dim != ds.dim) throw DataError("eval: prompt bank dim disagrees with dataset");

    std::vector<int> indices;
    if (split == "stored") {
        for (const std::string& id : ck.val_ids) {
            bool found = false;
            for (int i = 0; i < static_cast<int>(ds.records.size()); ++i)
                if (ds.records[static_cast<std::size_t>(i)].id == id) {
                    indices.push_back(i);
                    found = true;
                    break;
                }
            if (!found) throw DataError("eval: stored validation id '" + id + "' not in dataset");
        }
        if (indices.empty()) throw DataError("eval: checkpoint stores no validation ids");
    } else if (split == "all") {
        for (int i = 0; i < static_cast<int>(ds.records.size()); ++i) indices.push_back(i);
    } else {
        throw ConfigError("eval: --split must be 'stored' or 'all'");
    }
    if (mc_samples < 1) throw ConfigError("eval: --mc-samples must be >= 1");

    Rng unused(0);
    Rng mc_rng(mix_seed(cfg.trainer.seed, 0xeca1));
    const Tensor bank_view = bank_epoch_view(bank, false, unused);
    Tensor prompts;
    {
        NoGradScope ng;
        prompts = model.project_bank(bank_view);
    }

    PredictionSet preds;
    json samples = json::array();
    for (int i : indices) {
        const VideoRecord& rec = ds.records[static_cast<std::size_t>(i)];
        Tensor clip = sample_clip(rec, cfg.data.clip_len, ClipMode::eval, unused);
        std::vector<double> probs = model.predict(clip, prompts);
        preds.add(probs, rec.label);
        TpaModel::Uncertainty u = model.predict_uncertainty(clip, prompts, mc_samples, mc_rng);
        const Prediction& p = preds.samples.back();
        json js;
        js["id"] = rec.id;
        js["label"] = rec.label;
        js["pred"] = p.predicted;
        js["confidence"] = p.confidence;
        js["entropy"] = u.entropy;
        double var_mean = 0.0;
        for (double v : u.variance) var_mean += v;
        js["variance_mean"] = var_mean / static_cast<double>(u.variance.size());
        samples.push_back(std::move(js));
    }
    CalibrationReport rep = evaluate_predictions(preds, bins);

    json out;
    out["config"] = json::parse(cfg.to_json_text());
    out["fold"] = ck.fold;
    out["best_epoch"] = ck.best_epoch;
    out["split"] = split;
    out["mc_samples"] = mc_samples;
    out["metrics"] = report_json(rep);
    out["samples"] = std::move(samples);
    const std::string report_text = out.dump(2) + "\n";
    if (!report_out.empty()) write_text(report_out, report_text);
    else std::cout << report_text;
    if (!reliability_out.empty()) reliability_export(rep.ece_bins, reliability_out);
    std::cerr << "eval: n=" << rep.n << " macro_f1=" << rep.macro_f1 << " auc=" << rep.auc
              << " ece=" << rep.ece << " aece=" << rep.aece << "\n";
    return 0;
}

int cmd_gradcheck(std::uint64_t seed, int trials, double tol) {
    std::vector<GradSuiteEntry> table = run_grad_suite(seed, trials, tol);
    bool all_pass = true;
    std::printf("%-28s %-6s %12s %9s %9s\n", "op", "status", "max_rel_err", "checked",
                "excluded");
    for (const GradSuiteEntry& e : table) {
        if (!e.pass) all_pass = false;
        std::printf("%-28s %-6s %12.3e %9d %9d\n", e.name.c_str(), e.pass ? "pass" : "FAIL",
                    e.max_rel_err, e.checked, e.excluded);
        if (!e.pass && !e.detail.empty()) std::printf("    worst: %s\n", e.detail.c_str());
    }
    std::printf("gradcheck: %s at tol %g over %d trials\n", all_pass ? "all passed" : "FAILURES",
                tol, trials);
    return all_pass ? 0 : kExitGradcheckFail;
}

} // namespace

std::string fold_report_json(const Config& cfg, const FoldResult& fold) {
    json j = fold_summary_json(fold);
    j["config"] = json::parse(cfg.to_json_text());
    j["val_ids"] = fold.val_ids;
    json trace = json::array();
    for (const EpochTrace& t : fold.trace) {
        json jt;
        jt["epoch"] = t.epoch;
        jt["train_loss"] = t.train_loss;
        jt["lr"] = t.lr;
        jt["macro_f1"] = t.macro_f1;
        jt["auc"] = t.auc;
        jt["ece"] = t.ece;
        jt["aece"] = t.aece;
        trace.push_back(std::move(jt));
    }
    j["trace"] = std::move(trace);
    return j.dump(2) + "\n";
}

std::string aggregate_report_json(const Config& cfg, const CvResult& cv) {
    json j;
    j["config"] = json::parse(cfg.to_json_text());
    auto stat = [](const MetricStats& s) {
        json js;
        js["mean"] = s.mean;
        js["std"] = s.stddev;
        return js;
    };
    j["aggregate"]["macro_f1"] = stat(cv.macro_f1);
    j["aggregate"]["auc"] = stat(cv.auc);
    j["aggregate"]["ece"] = stat(cv.ece);
    j["aggregate"]["aece"] = stat(cv.aece);
    json folds = json::array();
    for (const FoldResult& f : cv.folds) folds.push_back(fold_summary_json(f));
    j["folds"] = std::move(folds);
    return j.dump(2) + "\n";
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

int run(const std::vector<std::string>& args) {
    CLI::App app{"Temporal prompt alignment toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic embedding dataset");
    SynthSpec spec;
    std::string out_dataset = "synth.tpae", out_bank = "synth_bank.json";
    synth->add_option("--seed", spec.seed, "generator seed");
    synth->add_option("--classes", spec.num_classes, "number of classes");
    synth->add_option("--per-class", spec.per_class, "videos per class");
    synth->add_option("--dim", spec.dim, "embedding dimension");
    synth->add_option("--t-min", spec.t_min, "minimum video length");
    synth->add_option("--t-max", spec.t_max, "maximum video length");
    synth->add_option("--separation", spec.separation, "class separation strength");
    synth->add_option("--out-dataset", out_dataset, "output dataset path");
    synth->add_option("--out-bank", out_bank, "output prompt bank path");

    // train
    auto* train = app.add_subcommand("train", "cross-validated training from a JSON config");
    std::string config_path, out_dir = "runs";
    std::vector<std::string> sets;
    int parallel_folds = 1;
    train->add_option("--config", config_path, "JSON config path")->required();
    train->add_option("--out", out_dir, "output directory for reports and checkpoints");
    train->add_option("--set", sets, "override a config key, e.g. classifier.alpha=0");
    train->add_option("--parallel-folds", parallel_folds, "fold worker count");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string ckpt_path, dataset_path, split = "stored";
    std::string report_out, reliability_out;
    int mc_samples = 1, bins = 15;
    eval->add_option("--checkpoint", ckpt_path, "checkpoint path")->required();
    eval->add_option("--dataset", dataset_path, "dataset path")->required();
    eval->add_option("--mc-samples", mc_samples, "Monte Carlo samples for uncertainty");
    eval->add_option("--bins", bins, "calibration bin count");
    eval->add_option("--split", split, "'stored' validation ids or 'all' records");
    eval->add_option("--report-out", report_out, "write the JSON report here");
    eval->add_option("--reliability-out", reliability_out, "write the reliability CSV here");

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");
    std::uint64_t gc_seed = 0;
    double tol = 1e-4;
    int trials = 10;
    gradcheck->add_option("--seed", gc_seed, "base seed");
    gradcheck->add_option("--tolerance", tol, "max relative error allowed");
    gradcheck->add_option("--trials", trials, "random seeds per op");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (synth->parsed()) return cmd_synth(spec, out_dataset, out_bank);
        if (train->parsed()) return cmd_train(config_path, sets, out_dir, parallel_folds);
        if (eval->parsed())
            return cmd_eval(ckpt_path, dataset_path, mc_samples, bins, split, report_out,
                            reliability_out);
        if (gradcheck->parsed()) return cmd_gradcheck(gc_seed, trials, tol);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}

} // namespace tpa::cli
