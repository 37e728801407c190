#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace sciforge {

// One supervised fine-tuning example. Every builder in the toolkit emits these.
struct InstructionRecord {
    std::string instruction;
    std::string input;
    std::string output;
    std::string task;
    std::string source;

    friend bool operator==(const InstructionRecord&, const InstructionRecord&) = default;
};

nlohmann::ordered_json to_json(const InstructionRecord& record);
// Single line, no trailing newline. Key order: instruction, input, output, task, source.
std::string to_jsonl_line(const InstructionRecord& record);
// Throws std::invalid_argument when required fields are absent or mistyped.
InstructionRecord record_from_json(const nlohmann::json& j);

}  // namespace sciforge
