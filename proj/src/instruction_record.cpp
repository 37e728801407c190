#include "sciforge/instruction_record.hpp"

#include <stdexcept>

namespace sciforge {

nlohmann::ordered_json to_json(const InstructionRecord& r) {
    nlohmann::ordered_json j;
    j["instruction"] = r.instruction;
    j["input"] = r.input;
    j["output"] = r.output;
    j["task"] = r.task;
    j["source"] = r.source;
    return j;
}

std::string to_jsonl_line(const InstructionRecord& record) { return to_json(record).dump(); }

InstructionRecord record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
    auto str = [&](const char* key, bool required) -> std::string {
        const auto it = j.find(key);
        if (it == j.end()) {
            if (required) throw std::invalid_argument(std::string("missing field `") + key + "`");
            return {};
        }
        if (!it->is_string()) throw std::invalid_argument(std::string("field `") + key + "` is not a string");
        return it->get<std::string>();
    };
    InstructionRecord r;
    r.instruction = str("instruction", true);
    r.input = str("input", false);
    r.output = str("output", true);
    r.task = str("task", false);
    r.source = str("source", false);
    return r;
}

}  // namespace sciforge
