#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sciforge::eval {

namespace fs = std::filesystem;

enum class AnswerKind { choice, boolean, number, label, unparsed };
std::string to_string(AnswerKind k);

struct ParsedAnswer {
    AnswerKind kind = AnswerKind::unparsed;
    char letter = 0;          // choice: 'A'..'D'
    std::string choice_text;  // choice: normalized answer text after the letter
    bool truth = false;       // boolean
    double number = 0.0;      // number
    std::string number_text;  // number: the matched token, as written
    std::string label;        // label: trimmed, whitespace-collapsed, lowercased
    std::string confidence_note;
};

// Never throws; anything that does not fit `expected` comes back unparsed.
ParsedAnswer parse_answer(std::string_view raw, AnswerKind expected);

// Answer text of a choice as compared in strict mode: whatever follows "(X)"
// up to the first sentence break, trailing period removed, lowercased.
std::string normalize_choice_text(std::string_view after_letter);

enum class Metric { accuracy, f1_binary, f1_macro, mae };
std::string to_string(Metric m);
std::optional<Metric> parse_metric(std::string_view s);

enum class AccuracyMode { strict, lenient };
enum class UnparsedPolicy { exclude, penalty };
std::optional<UnparsedPolicy> parse_policy(std::string_view s);

struct MetricReport {
    std::string task;
    Metric metric = Metric::accuracy;
    double value = 0.0;
    std::size_t n = 0;
    std::size_t unparsed_count = 0;
    // accuracy: the letter-only score next to the strict one.
    std::optional<double> lenient_value;
    // mae: pairs that entered the mean.
    std::optional<std::size_t> included;
    std::vector<std::string> notes;
};

nlohmann::ordered_json to_json(const MetricReport& r);

class EvalError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metric functions over aligned lists (gold[i] pairs with preds[i]).
// Size mismatches and empty inputs throw EvalError.
MetricReport accuracy(const std::vector<ParsedAnswer>& gold, const std::vector<ParsedAnswer>& preds,
                      AccuracyMode mode = AccuracyMode::strict);
// Unparsed predictions count as the negative class.
MetricReport f1_binary(const std::vector<bool>& gold, const std::vector<ParsedAnswer>& preds,
                       bool positive_label = true);
// One-vs-rest F1 per gold class, unweighted mean.
MetricReport f1_macro(const std::vector<std::string>& gold, const std::vector<ParsedAnswer>& preds);
// With the penalty policy an unparsed prediction costs `penalty`, by default
// the spread of the gold values.
MetricReport mae(const std::vector<double>& gold, const std::vector<ParsedAnswer>& preds,
                 UnparsedPolicy policy = UnparsedPolicy::exclude, std::optional<double> penalty = std::nullopt);

struct GoldRecord {
    std::string record_id;
    std::string output;
    std::string task;
};

struct PredictionRecord {
    std::string record_id;
    std::string raw_output;
};

// Gold is instruction JSONL; record_id is the record's "id" field when
// present, else its 1-based line number.
std::vector<GoldRecord> load_gold(const fs::path& path);
// JSONL of {"record_id": ..., "output": ...}.
std::vector<PredictionRecord> load_predictions(const fs::path& path);

struct Alignment {
    std::vector<const GoldRecord*> gold;
    std::vector<std::string> predicted;
};
// Every gold record needs exactly one prediction and vice versa.
Alignment align(const std::vector<GoldRecord>& gold, const std::vector<PredictionRecord>& preds);

// Guesses the metric from the gold outputs of one task.
Metric infer_metric(const std::vector<std::string>& gold_outputs);

struct EvaluateOptions {
    std::optional<Metric> metric;  // inferred per task when unset
    AccuracyMode accuracy_mode = AccuracyMode::strict;
    bool positive_label = true;
    UnparsedPolicy unparsed = UnparsedPolicy::exclude;
    std::optional<double> penalty;
};

// One report per task, in order of first appearance in the gold file.
std::vector<MetricReport> evaluate(const std::vector<GoldRecord>& gold, const std::vector<PredictionRecord>& preds,
                                   const EvaluateOptions& options = {});

std::string format_table(const std::vector<MetricReport>& reports);

}  // namespace sciforge::eval
