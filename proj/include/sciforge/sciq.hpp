#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sciforge/instruction_record.hpp"

namespace sciforge::sciq {

struct SciqRecord {
    std::string question;
    std::array<std::string, 4> options;
    int correct_index = 0;
    std::string support;
};

// Empty when the record is well formed.
std::optional<std::string> check(const SciqRecord& r);

struct RecordError {
    std::size_t index = 0;  // position in the input
    std::string message;
};

struct LoadResult {
    std::vector<SciqRecord> records;
    std::vector<nlohmann::json> raw;  // the source objects, parallel to records
    std::vector<RecordError> errors;
};

// JSON array in the public SciQ layout (question, distractor1-3,
// correct_answer, support) or with explicit `options` + `correct_index`.
// Public-layout options are lettered distractor1, distractor2, distractor3,
// correct_answer.
LoadResult load(const std::filesystem::path& path);
LoadResult from_json(const nlohmann::json& array);

enum class Pattern { open_book_single, closed_book_explained, multi_turn };
std::string to_string(Pattern p);

struct MixRatio {
    double open_book = 1.0;
    double closed_book = 1.0;
    double multi_turn = 1.0;
};
// "1:1:1"
MixRatio parse_mix(std::string_view s);

inline constexpr std::string_view kOpenBookInstruction =
    "Read the following paragraph and choose an answer for a multiple choice question about the paragraph";
inline constexpr std::string_view kClosedBookPrefix = "Choose an answer for this multiple choice question and explain: ";
inline constexpr std::string_view kDialoguePrefix = "<user>: Choose an answer for this multiple choice question: ";
inline constexpr std::string_view kDialogueFollowUp = "<user>: Can you explain why?";

char option_letter(int index);
// "(A) x (B) y (C) z (D) w"
std::string lettered_options(const SciqRecord& r);
// "(D) oxidants."
std::string answer_line(const SciqRecord& r);

struct RenderOptions {
    // Appends " <support>" to closed-book outputs as the explanation.
    bool explanation_in_output = false;
};

InstructionRecord render(const SciqRecord& r, Pattern p, const RenderOptions& options = {},
                         std::string_view source = {});

// Exact quotas by largest remainder (ties to the earlier pattern), then a
// seeded shuffle of the quota list. Records with empty support are forced to
// the open-book pattern.
std::vector<Pattern> assign_patterns(const std::vector<SciqRecord>& records, const MixRatio& mix, std::uint64_t seed);

struct BuildOptions {
    MixRatio mix;
    std::uint64_t seed = 0;
    bool shuffle_options = false;
    RenderOptions render;
};

struct BuildResult {
    std::vector<InstructionRecord> records;
    std::vector<Pattern> patterns;  // parallel to records
    std::vector<RecordError> errors;
};

BuildResult build_sciq_instructions(const std::vector<SciqRecord>& records, const BuildOptions& options);

// Seeded split; both sides keep input order. Requires 0 < test_size < n.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};
SplitIndices split_train_test(std::size_t n, std::size_t test_size, std::uint64_t seed);

}  // namespace sciforge::sciq
