#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sciforge/instruction_record.hpp"

namespace sciforge::fair {

namespace fs = std::filesystem;

enum class TaskKind { classification, regression, inverse_design };
enum class LabelType { boolean, categorical };

std::string to_string(TaskKind k);

// `{column}` or `{column:.N}` (round to N decimals). `{{` and `}}` are literal braces.
class Template {
public:
    struct Segment {
        std::string literal;
        std::string column;  // empty for literal segments
        std::optional<int> decimals;
    };

    Template() = default;
    // Throws std::invalid_argument on unbalanced braces or a bad format spec.
    static Template parse(std::string_view source);

    const std::string& source() const noexcept { return source_; }
    const std::vector<Segment>& segments() const noexcept { return segments_; }
    std::vector<std::string> columns() const;

private:
    std::string source_;
    std::vector<Segment> segments_;
};

// The placeholder naming the rendered target value.
inline constexpr std::string_view kTargetPlaceholder = "target";

struct TaskSpec {
    std::string dataset_name;
    TaskKind task_kind = TaskKind::regression;
    LabelType label_type = LabelType::categorical;
    std::string description;
    Template instruction_template;
    Template input_template;
    Template output_template;
    std::vector<std::string> input_columns;
    std::string target_column;
    // raw label -> phrase template; for boolean specs the keys are "true"/"false".
    std::map<std::string, Template> label_map;
    std::optional<int> decimals;
    std::optional<std::string> positive_label;
    bool reconstructed = false;
    std::string note;
};

class SpecError : public std::runtime_error {
public:
    SpecError(const std::string& origin, std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

// Key-value spec text. Every violation is collected before throwing SpecError.
TaskSpec parse_task_spec(std::string_view content, const std::string& origin = "<spec>");
TaskSpec load_task_spec(const fs::path& path);
// `name_or_path` is a file path, or a dataset name looked up as <dir>/<name>.spec.
TaskSpec find_task_spec(const std::string& name_or_path, const fs::path& spec_dir);
std::vector<TaskSpec> load_all_specs(const fs::path& spec_dir);

struct FairRow {
    std::map<std::string, std::string> values;
    std::size_t row_index = 0;
};

// CSV with header, or a JSON array of objects (by extension).
std::vector<FairRow> load_rows(const fs::path& path);

struct RowError {
    std::size_t row_index = 0;
    std::string message;
};

struct BuildResult {
    std::vector<InstructionRecord> records;
    std::vector<RowError> errors;
};

BuildResult build_classification(const std::vector<FairRow>& rows, const TaskSpec& spec);
BuildResult build_regression(const std::vector<FairRow>& rows, const TaskSpec& spec);
BuildResult build_inverse_design(const std::vector<FairRow>& rows, const TaskSpec& spec);
// Dispatches on spec.task_kind.
BuildResult build(const std::vector<FairRow>& rows, const TaskSpec& spec);

// Half-away-from-zero rounding of the shortest decimal form of `x` to `d`
// places, written without exponent and without trailing fractional zeros.
// Throws std::invalid_argument for NaN or infinity.
std::string round_decimal(double x, int d);
// Same rule applied directly to decimal text such as "1.005" or "7.7e-05".
std::string round_decimal_text(std::string_view decimal, int d);

// "true"/"false" for the usual spellings (true/false, yes/no, 1/0, t/f).
std::optional<bool> parse_bool(std::string_view raw);

}  // namespace sciforge::fair
