#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "json.hpp"
#include "tpa/checkpoint.hpp"
#include "tpa/cli.hpp"
#include "tpa/config.hpp"
#include "tpa/errors.hpp"
#include "tpa/metrics.hpp"

#include <filesystem>
#include <fstream>
#include <unistd.h>

using namespace tpa;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Sandbox {
    fs::path dir;
    Sandbox() {
        dir = fs::temp_directory_path() /
              ("tpa_cli_" + std::to_string(::getpid()) + "_" +
               std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    void write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name)) << text;
    }
    std::string read(const std::string& name) const {
        std::ifstream is(path(name), std::ios::binary);
        return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
    }
};

int run_cli(const std::vector<std::string>& args) { return cli::run(args); }

// Small synthetic inputs shared by the CLI subcases.
void make_inputs(const Sandbox& sb, const std::string& ds = "ds.tpae",
                 const std::string& bank = "bank.json") {
    REQUIRE(run_cli({"synth", "--seed", "3", "--classes", "2", "--per-class", "10", "--dim",
                     "8", "--t-min", "10", "--t-max", "14", "--separation", "4",
                     "--out-dataset", sb.path(ds), "--out-bank", sb.path(bank)}) == 0);
}

std::string fast_cfg(const Sandbox& sb) {
    json j;
    j["data"]["dataset_path"] = sb.path("ds.tpae");
    j["data"]["prompt_bank_path"] = sb.path("bank.json");
    j["data"]["clip_len"] = 8;
    j["extractor"]["kind"] = "cnn1d";
    j["extractor"]["hidden"] = 12;
    j["trainer"]["epochs"] = 2;
    j["trainer"]["batch"] = 8;
    return j.dump();
}

} // namespace

TEST_CASE("config parsing") {
    SUBCASE("defaults materialize") {
        Config cfg = Config::from_json_text("{}");
        CHECK(cfg.data.clip_len == 16);
        CHECK(cfg.extractor.kind == ExtractorKind::cnn1d);
        CHECK(cfg.extractor.hidden == 256);
        CHECK(cfg.classifier.temperature == 0.1);
        CHECK(cfg.classifier.margin == 0.5);
        CHECK(cfg.classifier.alpha == 0.5);
        CHECK_FALSE(cfg.cvaesm.enabled);
        CHECK(cfg.cvaesm.beta == 0.2);
        CHECK(cfg.trainer.batch == 16);
        CHECK(cfg.trainer.epochs == 40);
        CHECK(cfg.trainer.lr == 1e-3);
        CHECK(cfg.trainer.sched_factor == 0.1);
        CHECK(cfg.trainer.sched_patience == 5);
        CHECK(cfg.trainer.early_patience == 10);
        CHECK(cfg.trainer.folds == 5);
    }
    SUBCASE("unknown keys are rejected at every level") {
        CHECK_THROWS_AS(Config::from_json_text(R"({"trainer": {"learning_rate": 0.1}})"),
                        ConfigError);
        CHECK_THROWS_AS(Config::from_json_text(R"({"optimizer": {}})"), ConfigError);
        CHECK_THROWS_AS(Config::from_json_text(R"({"classifier": {"taus": 0.1}})"), ConfigError);
    }
    SUBCASE("bad values are rejected") {
        CHECK_THROWS_AS(Config::from_json_text(R"({"classifier": {"tau": 0}})"), ConfigError);
        CHECK_THROWS_AS(Config::from_json_text(R"({"trainer": {"folds": 1}})"), ConfigError);
        CHECK_THROWS_AS(Config::from_json_text(R"({"extractor": {"kind": "lstm"}})"), ConfigError);
        CHECK_THROWS_AS(Config::from_json_text(R"({"trainer": {"epochs": "many"}})"), ConfigError);
    }
    SUBCASE("echo round-trips") {
        Config cfg = Config::from_json_text(R"({"classifier": {"alpha": 0.25}})");
        Config back = Config::from_json_text(cfg.to_json_text());
        CHECK(back.classifier.alpha == 0.25);
        CHECK(back.to_json_text() == cfg.to_json_text());
    }
    SUBCASE("--set overrides") {
        std::string text =
            Config::apply_overrides("{}", {"classifier.alpha=0", "extractor.kind=gnn",
                                           "trainer.epochs=7"});
        Config cfg = Config::from_json_text(text);
        CHECK(cfg.classifier.alpha == 0.0);
        CHECK(cfg.extractor.kind == ExtractorKind::gnn);
        CHECK(cfg.trainer.epochs == 7);
        CHECK_THROWS_AS(Config::apply_overrides("{}", {"alphaonly"}), ConfigError);
    }
}

TEST_CASE("cli synth determinism and summary") {
    Sandbox sb;
    make_inputs(sb, "a.tpae", "a.json");
    make_inputs(sb, "b.tpae", "b.json");
    CHECK(sb.read("a.tpae") == sb.read("b.tpae"));
    CHECK(sb.read("a.json") == sb.read("b.json"));
}

TEST_CASE("cli exit codes") {
    Sandbox sb;
    SUBCASE("config schema violation exits 2") {
        sb.write("bad.json", R"({"trainer": {"nope": 1}})");
        CHECK(run_cli({"train", "--config", sb.path("bad.json"), "--out", sb.path("out")}) == 2);
    }
    SUBCASE("missing prompt bank exits 3") {
        make_inputs(sb);
        json j = json::parse(fast_cfg(sb));
        j["data"]["prompt_bank_path"] = sb.path("missing_bank.json");
        sb.write("cfg.json", j.dump());
        CHECK(run_cli({"train", "--config", sb.path("cfg.json"), "--out", sb.path("out")}) == 3);
    }
    SUBCASE("diverging loss exits 4") {
        make_inputs(sb);
        sb.write("cfg.json", fast_cfg(sb));
        CHECK(run_cli({"train", "--config", sb.path("cfg.json"), "--set", "trainer.lr=1e300",
                       "--out", sb.path("out")}) == 4);
    }
}

TEST_CASE("cli train and eval workflow") {
    Sandbox sb;
    make_inputs(sb);
    sb.write("cfg.json", fast_cfg(sb));
    REQUIRE(run_cli({"train", "--config", sb.path("cfg.json"), "--set", "classifier.alpha=0",
                     "--out", sb.path("run")}) == 0);

    SUBCASE("reports echo the resolved config and cover every fold") {
        json agg = json::parse(sb.read("run/aggregate.json"));
        CHECK(agg["config"]["classifier"]["alpha"] == 0.0);
        CHECK(agg["config"]["trainer"]["epochs"] == 2);
        CHECK(agg["folds"].size() == 5);
        CHECK(agg["aggregate"].contains("macro_f1"));
        CHECK(fs::exists(sb.path("run/fold_4.ckpt")));
    }
    SUBCASE("eval reproduces the stored best-epoch metrics exactly") {
        json fold = json::parse(sb.read("run/fold_2.json"));
        REQUIRE(run_cli({"eval", "--checkpoint", sb.path("run/fold_2.ckpt"), "--dataset",
                         sb.path("ds.tpae"), "--report-out", sb.path("eval.json"),
                         "--reliability-out", sb.path("rel.csv")}) == 0);
        json ev = json::parse(sb.read("eval.json"));
        CHECK(ev["metrics"]["macro_f1"] == fold["val"]["macro_f1"]);
        CHECK(ev["metrics"]["auc"] == fold["val"]["auc"]);
        CHECK(ev["metrics"]["ece"] == fold["val"]["ece"]);
        CHECK(ev["metrics"]["aece"] == fold["val"]["aece"]);
        CHECK(ev["metrics"]["n"] == fold["val"]["n"]);

        // mc_samples=1 keeps the variance column at zero
        for (const json& s : ev["samples"]) CHECK(s["variance_mean"] == 0.0);

        // reliability CSV has one row per bin
        auto bins = reliability_parse(sb.path("rel.csv"));
        CHECK(bins.size() == 15);
    }
    SUBCASE("eval over the full dataset and custom bins") {
        REQUIRE(run_cli({"eval", "--checkpoint", sb.path("run/fold_0.ckpt"), "--dataset",
                         sb.path("ds.tpae"), "--split", "all", "--bins", "7", "--mc-samples",
                         "3", "--report-out", sb.path("eval_all.json"), "--reliability-out",
                         sb.path("rel7.csv")}) == 0);
        json ev = json::parse(sb.read("eval_all.json"));
        CHECK(ev["samples"].size() == 20);
        CHECK(reliability_parse(sb.path("rel7.csv")).size() == 7);
    }
    SUBCASE("checkpoint round-trip preserves parameters") {
        Checkpoint ck = read_checkpoint(sb.path("run/fold_1.ckpt"));
        CHECK(ck.fold == 1);
        CHECK(ck.dim == 8);
        CHECK(ck.num_classes == 2);
        CHECK_FALSE(ck.param_names.empty());
        write_checkpoint(ck, sb.path("copy.ckpt"));
        CHECK(sb.read("run/fold_1.ckpt") == sb.read("copy.ckpt"));
        // dimension mismatch is a data error
        REQUIRE(run_cli({"synth", "--seed", "3", "--classes", "2", "--per-class", "6", "--dim",
                         "9", "--out-dataset", sb.path("wide.tpae"), "--out-bank",
                         sb.path("wide_bank.json")}) == 0);
        CHECK(run_cli({"eval", "--checkpoint", sb.path("run/fold_1.ckpt"), "--dataset",
                       sb.path("wide.tpae")}) == 3);
    }
}

TEST_CASE("cli train determinism, byte identical reports") {
    Sandbox sb;
    make_inputs(sb);
    sb.write("cfg.json", fast_cfg(sb));
    REQUIRE(run_cli({"train", "--config", sb.path("cfg.json"), "--out", sb.path("r1")}) == 0);
    REQUIRE(run_cli({"train", "--config", sb.path("cfg.json"), "--out", sb.path("r2")}) == 0);
    CHECK(sb.read("r1/aggregate.json") == sb.read("r2/aggregate.json"));
    CHECK(sb.read("r1/fold_0.json") == sb.read("r2/fold_0.json"));
    CHECK(sb.read("r1/fold_0.ckpt") == sb.read("r2/fold_0.ckpt"));

    REQUIRE(run_cli({"train", "--config", sb.path("cfg.json"), "--parallel-folds", "3", "--out",
                     sb.path("r3")}) == 0);
    CHECK(sb.read("r1/aggregate.json") == sb.read("r3/aggregate.json"));
}

TEST_CASE("cli gradcheck") {
    CHECK(run_cli({"gradcheck", "--trials", "2"}) == 0);
    // tightening past finite-difference noise must surface failures
    CHECK(run_cli({"gradcheck", "--trials", "1", "--tolerance", "1e-12"}) == 1);
}
