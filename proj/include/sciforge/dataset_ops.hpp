#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sciforge/instruction_record.hpp"

namespace sciforge::dataset {

namespace fs = std::filesystem;

class DatasetError : public std::runtime_error {
public:
    DatasetError(std::string file, std::size_t line, const std::string& what)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
          file_(std::move(file)),
          line_(line) {}
    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

// Reads an instruction JSONL file. Blank lines are skipped; any malformed
// line throws DatasetError naming the file and 1-based line number.
std::vector<InstructionRecord> read_jsonl(const fs::path& path);
void write_jsonl(const fs::path& path, const std::vector<InstructionRecord>& records);
std::string to_jsonl(const std::vector<InstructionRecord>& records);

// Interop with trainers that expect one JSON array.
void jsonl_to_array(const fs::path& in, const fs::path& out);
void array_to_jsonl(const fs::path& in, const fs::path& out);

struct FileDigest {
    std::string path;
    std::string sha256;
    friend bool operator==(const FileDigest&, const FileDigest&) = default;
};

// Written next to every stage output. Input paths are stored absolute,
// output paths relative to the manifest's directory.
struct DatasetManifest {
    std::string stage;
    std::map<std::string, std::size_t> per_task;
    std::size_t total = 0;
    std::optional<std::uint64_t> seed;
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;
    std::string created_at;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
};

nlohmann::ordered_json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);

// Fills per_task/total from the records.
void count_tasks(DatasetManifest& m, const std::vector<InstructionRecord>& records);
FileDigest digest_input(const fs::path& path);
FileDigest digest_output(const fs::path& path, const fs::path& manifest_path);
void write_manifest(const fs::path& manifest_path, const DatasetManifest& m);

struct VerifyIssue {
    std::string path;
    std::string problem;  // "missing" or "digest-mismatch"
};
std::vector<VerifyIssue> verify_manifest(const fs::path& manifest_path);

struct MixOptions {
    // One weight per input, or empty for plain concatenation. A weight w keeps
    // round(w * n) records of an n-record file: whole copies first, then a
    // seeded subsample for the remainder.
    std::vector<double> weights;
    std::uint64_t seed = 0;
};

struct MixResult {
    std::vector<InstructionRecord> records;
    DatasetManifest manifest;
};

MixResult mix(const std::vector<fs::path>& inputs, const MixOptions& options);

struct Violation {
    std::size_t line = 0;
    std::string kind;
    std::string detail;
};

struct ValidationReport {
    std::size_t lines = 0;
    std::size_t records = 0;
    std::size_t blank_lines = 0;
    std::vector<Violation> violations;
    std::map<std::string, std::size_t> counts;

    bool ok() const noexcept { return violations.empty(); }
};

ValidationReport validate(const fs::path& path);
ValidationReport validate_text(std::string_view content);
nlohmann::ordered_json to_json(const ValidationReport& report);

struct TrainingConfig {
    int epochs = 3;
    int train_batch_size = 4;
    int eval_batch_size = 4;
    int gradient_accumulation_steps = 8;
    double learning_rate = 2e-5;
    double weight_decay = 0.0;
    double warmup_ratio = 0.03;
    std::string precision = "bf16";
};

// Empty when the invariants hold.
std::vector<std::string> check(const TrainingConfig& config);
// Applies `key=value` overrides; unknown keys or bad values throw.
TrainingConfig with_overrides(TrainingConfig base, const std::map<std::string, std::string>& overrides);
std::string to_text(const TrainingConfig& config);
TrainingConfig parse_training_config(std::string_view text);
void emit_training_config(const fs::path& out, const TrainingConfig& config);

// Compact real formatting: 2e-05 -> "2e-5", 0.03 -> "0.03", 0 -> "0".
std::string format_real(double value);

}  // namespace sciforge::dataset
