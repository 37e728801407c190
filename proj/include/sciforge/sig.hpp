#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sciforge/corpus.hpp"
#include "sciforge/instruction_record.hpp"
#include "sciforge/llm_gateway.hpp"

namespace sciforge::sig {

inline constexpr std::string_view kDefaultConstraints =
    "Don't ask very simple questions, like definition questions (e.g. What is XXX). "
    "You should generate more complex problems. Answer using the data from provided information. "
    "Add detail to answers as much as possible, such as answer the specific chemical elements and numbers.";

struct SigPrompt {
    std::vector<std::string> keywords;
    int n_pairs = 10;
    std::string constraints_text{kDefaultConstraints};
};

// `Please generate N scientific Q&A (prompts with outputs) related with "k1", "k2". <constraints>`
// Keywords are double-quoted with `"` and `\` backslash-escaped.
std::string render_prompt(const SigPrompt& prompt);

// Corpus document frequencies for keyword salience.
struct TermStats {
    std::size_t documents = 0;
    std::map<std::string, std::size_t> document_frequency;
};

TermStats collect_term_stats(const std::vector<std::string>& texts);
std::vector<std::string> keyword_terms(std::string_view text);
bool is_stopword(std::string_view term);

struct KeywordResult {
    std::vector<std::string> keywords;
    bool fewer_than_requested = false;
};

// Top-k lowercase terms by tf * (ln((1 + N) / (1 + df)) + 1); ties by term.
// Without stats every idf is 1 and ranking is by frequency alone.
KeywordResult extract_keywords(std::string_view text, std::size_t k, const TermStats* stats = nullptr);

struct QAPair {
    std::string question;
    std::string answer;
    int ordinal = 0;
    std::string source_doc;

    friend bool operator==(const QAPair&, const QAPair&) = default;
};

struct ParseDiagnostic {
    std::size_t line = 0;  // 1-based line in the completion
    std::string kind;
    std::string text;
};

struct QaParse {
    std::vector<QAPair> pairs;
    std::vector<ParseDiagnostic> diagnostics;
};

// Reads `Qn:` / `An:` line blocks. A block runs until the next marker line;
// continuation lines belong to it. Unpaired or malformed blocks are skipped
// and reported. Duplicate ordinals (concatenated completions) are renumbered 1..N.
QaParse parse_qa(std::string_view completion, std::string_view source_doc = {});

// Inverse of parse_qa for pairs with distinct ordinals.
std::string serialize_qa(const std::vector<QAPair>& pairs);

struct SigTrainingExample {
    std::string instruction;
    std::string input;
    std::string output;
    std::string source_doc;
    std::vector<QAPair> pairs;
};

InstructionRecord to_instruction_record(const SigTrainingExample& ex);

// Each pair becomes {instruction: question, input: "", output: answer}.
std::vector<InstructionRecord> qa_to_instructions(const std::vector<QAPair>& pairs);

struct SigOptions {
    int n_pairs = 10;
    std::size_t keywords = 15;
    std::string constraints{kDefaultConstraints};
    // Whitespace-token budget per request, prompt included.
    std::size_t budget = 1400;
    std::string model_name = "gpt-4";
    double temperature = 0.7;
    int max_output_tokens = 1024;
    std::size_t max_in_flight = 4;
};

// The requests sent for one paper: one per chunk, in chunk order.
std::vector<llm::ChatRequest> paper_requests(const corpus::PaperDocument& paper, const SigOptions& options,
                                             const TermStats* stats, std::string* prompt_out = nullptr);

struct PaperFailure {
    std::string paper_id;
    std::string message;
};

struct PaperDiagnostic {
    std::string paper_id;
    ParseDiagnostic diagnostic;
};

struct SeedSetResult {
    std::vector<SigTrainingExample> examples;  // input paper order
    std::vector<PaperFailure> failures;
    std::vector<std::string> zero_pair_papers;
    std::vector<PaperDiagnostic> diagnostics;
};

// Papers run concurrently (at most max_in_flight); a paper's chunks are sent
// one after another in index order and their completions concatenated.
SeedSetResult build_seed_set(const std::vector<corpus::PaperDocument>& papers, llm::Gateway& gateway,
                             const SigOptions& options, const TermStats* stats = nullptr);

struct SeedPartition {
    std::vector<corpus::PaperDocument> seeds;
    std::vector<corpus::PaperDocument> training;
};

// round(fraction * n) papers (at least one when fraction > 0) by seeded shuffle;
// both halves keep input order.
SeedPartition select_seeds(const std::vector<corpus::PaperDocument>& papers, double fraction, std::uint64_t seed);
// Throws std::invalid_argument for an id not in `papers`.
SeedPartition select_seeds(const std::vector<corpus::PaperDocument>& papers, const std::vector<std::string>& ids);

nlohmann::ordered_json to_json(const PaperDiagnostic& d);

}  // namespace sciforge::sig
