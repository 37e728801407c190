#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sciforge/dataset_ops.hpp"
#include "sciforge/util/io.hpp"

using namespace sciforge;
using namespace sciforge::dataset;
using sciforge::testing::TempDir;

namespace {

InstructionRecord rec(std::string out, std::string task = "t") {
    return {"Do it", "", std::move(out), std::move(task), ""};
}

}  // namespace

TEST(Record, JsonlLineKeyOrder) {
    const InstructionRecord r{"I", "in", "out", "esol", "esol:3"};
    EXPECT_EQ(to_jsonl_line(r), R"({"instruction":"I","input":"in","output":"out","task":"esol","source":"esol:3"})");
    EXPECT_EQ(record_from_json(nlohmann::json::parse(to_jsonl_line(r))), r);
    EXPECT_THROW(record_from_json(nlohmann::json::parse(R"({"instruction":"I"})")), std::invalid_argument);
}

TEST(Jsonl, RoundTripAndErrorsNameLine) {
    TempDir dir("ds-jsonl");
    const std::vector<InstructionRecord> rs{rec("a"), rec("b\nc", "u")};
    write_jsonl(dir / "x.jsonl", rs);
    EXPECT_EQ(read_jsonl(dir / "x.jsonl"), rs);
    io::write_file(dir / "bad.jsonl", to_jsonl(rs) + "\n{oops\n");
    try {
        read_jsonl(dir / "bad.jsonl");
        FAIL();
    } catch (const DatasetError& e) {
        EXPECT_EQ(e.line(), 4u);
    }
}

TEST(Jsonl, ArrayConversionRoundTrip) {
    TempDir dir("ds-array");
    const std::vector<InstructionRecord> rs{rec("a"), rec("b")};
    write_jsonl(dir / "x.jsonl", rs);
    jsonl_to_array(dir / "x.jsonl", dir / "x.json");
    EXPECT_TRUE(nlohmann::json::parse(io::read_file(dir / "x.json")).is_array());
    array_to_jsonl(dir / "x.json", dir / "y.jsonl");
    EXPECT_EQ(io::read_file(dir / "x.jsonl"), io::read_file(dir / "y.jsonl"));
}

TEST(Validate, ReportsEachKind) {
    const std::string content =
        R"({"instruction":"I","input":"","output":"o"})"
        "\n\n"
        "not json\n"
        "[1]\n"
        R"({"input":"","output":"o"})"
        "\n"
        R"({"instruction":"I","output":""})"
        "\n"
        R"({"instruction":"I","output":5})"
        "\n";
    const auto rep = validate_text(content);
    EXPECT_EQ(rep.records, 1u);
    EXPECT_EQ(rep.blank_lines, 1u);
    EXPECT_FALSE(rep.ok());
    EXPECT_EQ(rep.counts.at("invalid-json"), 1u);
    EXPECT_EQ(rep.counts.at("not-an-object"), 1u);
    EXPECT_EQ(rep.counts.at("missing-instruction"), 1u);
    EXPECT_EQ(rep.counts.at("empty-output"), 1u);
    EXPECT_EQ(rep.counts.at("wrong-type-output"), 1u);
    EXPECT_EQ(rep.violations[0].line, 3u);
    EXPECT_TRUE(validate_text(to_jsonl({rec("a")})).ok());
}

TEST(Manifest, VerifyDetectsTamperingAndMissing) {
    TempDir dir("ds-manifest");
    write_jsonl(dir / "in.jsonl", {rec("a")});
    write_jsonl(dir / "out.jsonl", {rec("a"), rec("b", "u")});
    DatasetManifest m;
    m.stage = "test";
    m.seed = 7;
    m.inputs.push_back(digest_input(dir / "in.jsonl"));
    m.outputs.push_back(digest_output(dir / "out.jsonl", dir / "m.json"));
    count_tasks(m, read_jsonl(dir / "out.jsonl"));
    EXPECT_EQ(m.total, 2u);
    EXPECT_EQ(m.per_task.at("u"), 1u);
    EXPECT_EQ(m.outputs[0].path, "out.jsonl");
    write_manifest(dir / "m.json", m);
    EXPECT_TRUE(verify_manifest(dir / "m.json").empty());

    const auto back = manifest_from_json(nlohmann::json::parse(io::read_file(dir / "m.json")));
    EXPECT_EQ(back.outputs, m.outputs);
    EXPECT_EQ(*back.seed, 7u);

    io::write_file(dir / "out.jsonl", "tampered\n");
    auto issues = verify_manifest(dir / "m.json");
    ASSERT_EQ(issues.size(), 1u);
    EXPECT_EQ(issues[0].problem, "digest-mismatch");
    std::filesystem::remove(dir / "in.jsonl");
    issues = verify_manifest(dir / "m.json");
    ASSERT_EQ(issues.size(), 2u);
}

TEST(Mix, WeightsAndDeterminism) {
    TempDir dir("ds-mix");
    std::vector<InstructionRecord> a, b;
    for (int i = 0; i < 10; ++i) a.push_back(rec("a" + std::to_string(i), "a"));
    for (int i = 0; i < 4; ++i) b.push_back(rec("b" + std::to_string(i), "b"));
    write_jsonl(dir / "a.jsonl", a);
    write_jsonl(dir / "b.jsonl", b);

    const auto plain = mix({dir / "a.jsonl", dir / "b.jsonl"}, {});
    EXPECT_EQ(plain.records.size(), 14u);

    MixOptions o;
    o.weights = {0.5, 2.5};
    o.seed = 11;
    const auto r1 = mix({dir / "a.jsonl", dir / "b.jsonl"}, o);
    const auto r2 = mix({dir / "a.jsonl", dir / "b.jsonl"}, o);
    EXPECT_EQ(r1.records, r2.records);
    EXPECT_EQ(r1.manifest.per_task.at("a"), 5u);
    EXPECT_EQ(r1.manifest.per_task.at("b"), 10u);
    std::map<std::string, int> copies;
    for (const auto& r : r1.records) ++copies[r.output];
    for (const auto& r : b) EXPECT_GE(copies[r.output], 2);

    o.weights = {1.0};
    EXPECT_THROW(mix({dir / "a.jsonl", dir / "b.jsonl"}, o), std::invalid_argument);
    o.weights = {-1.0, 1.0};
    EXPECT_THROW(mix({dir / "a.jsonl", dir / "b.jsonl"}, o), std::invalid_argument);
}

TEST(TrainingConfig, DefaultTextIsExact) {
    EXPECT_EQ(to_text(TrainingConfig{}),
              "epochs=3\n"
              "train_batch_size=4\n"
              "eval_batch_size=4\n"
              "gradient_accumulation_steps=8\n"
              "learning_rate=2e-5\n"
              "weight_decay=0\n"
              "warmup_ratio=0.03\n"
              "precision=bf16\n");
    EXPECT_TRUE(check(TrainingConfig{}).empty());
}

TEST(TrainingConfig, OverridesAndChecks) {
    auto c = with_overrides(TrainingConfig{}, {{"epochs", "5"}, {"learning_rate", "1e-4"}});
    EXPECT_EQ(c.epochs, 5);
    EXPECT_EQ(format_real(c.learning_rate), "1e-4");
    EXPECT_THROW(with_overrides(TrainingConfig{}, {{"epoch", "5"}}), std::invalid_argument);
    EXPECT_THROW(with_overrides(TrainingConfig{}, {{"epochs", "x"}}), std::invalid_argument);
    c.warmup_ratio = 1.5;
    c.precision = "int4";
    EXPECT_EQ(check(c).size(), 2u);
    TempDir dir("ds-train");
    EXPECT_THROW(emit_training_config(dir / "t.cfg", c), std::invalid_argument);
    emit_training_config(dir / "t.cfg", TrainingConfig{});
    const auto back = parse_training_config(io::read_file(dir / "t.cfg"));
    EXPECT_EQ(to_text(back), to_text(TrainingConfig{}));
}

TEST(TrainingConfig, FormatReal) {
    EXPECT_EQ(format_real(2e-5), "2e-5");
    EXPECT_EQ(format_real(0.03), "0.03");
    EXPECT_EQ(format_real(0.0), "0");
    EXPECT_EQ(format_real(1e21), "1e21");
}
