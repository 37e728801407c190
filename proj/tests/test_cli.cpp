#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "sciforge/cli.hpp"
#include "sciforge/dataset_ops.hpp"
#include "sciforge/util/io.hpp"

using namespace sciforge;
using sciforge::testing::TempDir;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out;
    const int code = cli::run(args, out);
    return {code, out.str()};
}

}  // namespace

TEST(Cli, SiblingNames) {
    EXPECT_EQ(cli::sibling("out/a.jsonl", "manifest", ".json"), std::filesystem::path("out/a.manifest.json"));
    EXPECT_EQ(cli::sibling("b", "errors", ".jsonl"), std::filesystem::path("b.errors.jsonl"));
}

TEST(Cli, CreationTimeFromConfig) {
    cli::RunConfig c;
    c.set("run.created_at", "2024-01-01T00:00:00Z");
    EXPECT_EQ(cli::creation_time(c), "2024-01-01T00:00:00Z");
}

TEST(Cli, ConfigParsingAndUnknownKeys) {
    const auto c = cli::RunConfig::parse("[gateway]\nmode = replay\n[train]\nepochs = 4\n[bogus]\nx = 1\n");
    EXPECT_EQ(*c.get("gateway.mode"), "replay");
    EXPECT_EQ(cli::unknown_keys(c), (std::vector<std::string>{"bogus.x"}));
}

TEST(Cli, SettingsCollectEveryViolation) {
    cli::RunConfig c;
    c.set("dedup.threshold", "1.5");
    c.set("chunk.budget", "zero");
    c.set("gateway.mode", "live");
    cli::Settings s(c);
    s.real("dedup.threshold", 0.95, 0.0, 1.0, true);
    s.count("chunk.budget", 1400, 8);
    s.choice("gateway.mode", "passthrough", {"record", "replay", "passthrough"});
    s.seed(true);
    EXPECT_EQ(s.violations().size(), 4u);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, cli::usage);
    EXPECT_EQ(run({"frobnicate"}).code, cli::usage);
    TempDir dir("cli-usage");
    // mix without inputs or seed lists both problems and does nothing.
    EXPECT_EQ(run({"mix", "--out", (dir / "m.jsonl").string()}).code, cli::usage);
    EXPECT_FALSE(std::filesystem::exists(dir / "m.jsonl"));
    sciforge::io::write_file(dir / "bad.cfg", "[nonsense]\nkey = 1\n");
    EXPECT_EQ(run({"validate", "--config", (dir / "bad.cfg").string(), "--in", (dir / "x").string()}).code,
              cli::usage);
}

TEST(Cli, BuildFairValidateAndVerify) {
    TempDir dir("cli-fair");
    sciforge::io::write_file(dir / "glass.csv", "composition,gfa\nCr20Ni61P19,True\nZr5,False\nBad,maybe\n");
    const auto out = (dir / "glass.jsonl").string();
    const auto r = run({"build-fair", "--spec", "matbench_glass", "--in", (dir / "glass.csv").string(), "--out", out,
                        "--created-at", "2024-01-01T00:00:00Z"});
    EXPECT_EQ(r.code, cli::ok);
    const auto recs = dataset::read_jsonl(out);
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].output, "Yes, Cr20Ni61P19 has glass-forming ability.");
    EXPECT_EQ(recs[0].source, "matbench_glass:0");
    EXPECT_TRUE(std::filesystem::exists(dir / "glass.errors.jsonl"));
    const auto manifest = dir / "glass.manifest.json";
    ASSERT_TRUE(std::filesystem::exists(manifest));
    const auto m = nlohmann::json::parse(sciforge::io::read_file(manifest));
    EXPECT_EQ(m["total"], 2);
    EXPECT_EQ(m["created_at"], "2024-01-01T00:00:00Z");

    const auto v = run({"validate", "--in", out});
    EXPECT_EQ(v.code, cli::ok);
    EXPECT_EQ(nlohmann::json::parse(v.out)["records"], 2);

    EXPECT_EQ(run({"verify", "--manifest", manifest.string()}).code, cli::ok);
    sciforge::io::write_file(out, "{}\n");
    EXPECT_EQ(run({"verify", "--manifest", manifest.string()}).code, cli::failed);
    EXPECT_EQ(run({"validate", "--in", out}).code, cli::failed);
}

TEST(Cli, EvaluateMae) {
    TempDir dir("cli-eval");
    dataset::write_jsonl(dir / "gold.jsonl", {{"i", "", "-3.8", "esol", ""}, {"i", "", "1.0", "esol", ""}});
    sciforge::io::write_file(dir / "pred.jsonl",
                             R"({"record_id":"1","output":"-3.3"})"
                             "\n"
                             R"({"record_id":"2","output":"The value is 2.0"})"
                             "\n");
    const auto r = run({"evaluate", "--gold", (dir / "gold.jsonl").string(), "--pred", (dir / "pred.jsonl").string(),
                        "--out", (dir / "report.json").string()});
    EXPECT_EQ(r.code, cli::ok);
    EXPECT_NE(r.out.find("esol"), std::string::npos);
    const auto rep = nlohmann::json::parse(sciforge::io::read_file(dir / "report.json"));
    const auto& first = rep.is_array() ? rep[0] : rep["reports"][0];
    EXPECT_EQ(first["metric"], "mae");
    EXPECT_NEAR(first["value"].get<double>(), 0.75, 1e-12);
}

TEST(Cli, ReplayWithoutTranscriptFails) {
    TempDir dir("cli-replay");
    sciforge::io::write_file(dir / "papers.jsonl",
                             R"({"id":"p1","title":"T","body":"Graphene nanoribbons were grown on copper.","categories":[],"source_path":""})"
                             "\n");
    const auto r = run({"sig-build", "--in", (dir / "papers.jsonl").string(), "--out",
                        (dir / "qa.jsonl").string(), "--mode", "replay", "--transcript",
                        (dir / "absent.jsonl").string()});
    EXPECT_NE(r.code, cli::ok);
}

TEST(Cli, EmitTrainConfigAndOverrides) {
    TempDir dir("cli-train");
    EXPECT_EQ(run({"emit-train-config", "--out", (dir / "t.cfg").string()}).code, cli::ok);
    EXPECT_EQ(sciforge::io::read_file(dir / "t.cfg"), dataset::to_text(dataset::TrainingConfig{}));
    EXPECT_EQ(run({"emit-train-config", "--out", (dir / "u.cfg").string(), "--param", "epochs=5", "--param",
                   "precision=fp16"})
                  .code,
              cli::ok);
    const auto u = dataset::parse_training_config(sciforge::io::read_file(dir / "u.cfg"));
    EXPECT_EQ(u.epochs, 5);
    EXPECT_EQ(u.precision, "fp16");
    EXPECT_NE(run({"emit-train-config", "--out", (dir / "v.cfg").string(), "--param", "warmup_ratio=2"}).code,
              cli::ok);
}

TEST(Cli, MixRepeatedInputs) {
    TempDir dir("cli-mix");
    dataset::write_jsonl(dir / "a.jsonl", {{"i", "", "a", "a", ""}});
    dataset::write_jsonl(dir / "b.jsonl", {{"i", "", "b", "b", ""}, {"i", "", "c", "b", ""}});
    const auto r = run({"mix", "--in", (dir / "a.jsonl").string(), "--in", (dir / "b.jsonl").string(), "--out",
                        (dir / "m.jsonl").string(), "--seed", "3"});
    EXPECT_EQ(r.code, cli::ok);
    EXPECT_EQ(dataset::read_jsonl(dir / "m.jsonl").size(), 3u);
}
