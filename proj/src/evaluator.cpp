#include "sciforge/evaluator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "sciforge/util/io.hpp"
#include "sciforge/util/text.hpp"

namespace sciforge::eval {

std::string to_string(AnswerKind k) {
    switch (k) {
        case AnswerKind::choice: return "choice";
        case AnswerKind::boolean: return "boolean";
        case AnswerKind::number: return "number";
        case AnswerKind::label: return "label";
        case AnswerKind::unparsed: return "unparsed";
    }
    return "unparsed";
}

std::string to_string(Metric m) {
    switch (m) {
        case Metric::accuracy: return "accuracy";
        case Metric::f1_binary: return "f1_binary";
        case Metric::f1_macro: return "f1_macro";
        case Metric::mae: return "mae";
    }
    return "accuracy";
}

std::optional<Metric> parse_metric(std::string_view s) {
    if (s == "accuracy") return Metric::accuracy;
    if (s == "f1_binary" || s == "f1") return Metric::f1_binary;
    if (s == "f1_macro") return Metric::f1_macro;
    if (s == "mae") return Metric::mae;
    return std::nullopt;
}

std::optional<UnparsedPolicy> parse_policy(std::string_view s) {
    if (s == "exclude") return UnparsedPolicy::exclude;
    if (s == "penalty") return UnparsedPolicy::penalty;
    return std::nullopt;
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

ParsedAnswer unparsed(std::string note) {
    ParsedAnswer a;
    a.confidence_note = std::move(note);
    return a;
}

ParsedAnswer parse_choice(std::string_view s) {
    for (std::size_t i = 0; i + 2 < s.size(); ++i) {
        if (s[i] != '(' || s[i + 2] != ')') continue;
        const char c = static_cast<char>(s[i + 1] & ~0x20);
        if (c < 'A' || c > 'D') continue;
        ParsedAnswer a;
        a.kind = AnswerKind::choice;
        a.letter = c;
        a.choice_text = normalize_choice_text(s.substr(i + 3));
        return a;
    }
    return unparsed("no (A)-(D) option marker");
}

ParsedAnswer parse_boolean(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && !is_alpha(s[i])) {
        // Leading punctuation and quotes are tolerated, digits are not.
        if (is_digit(s[i])) return unparsed("no leading yes/no");
        ++i;
    }
    std::size_t j = i;
    while (j < s.size() && is_alpha(s[j])) ++j;
    const auto word = text::to_lower(s.substr(i, j - i));
    ParsedAnswer a;
    a.kind = AnswerKind::boolean;
    if (word == "yes") {
        a.truth = true;
        return a;
    }
    if (word == "no") {
        a.truth = false;
        return a;
    }
    return unparsed("no leading yes/no");
}

ParsedAnswer parse_number(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::size_t start = i;
        std::size_t p = i;
        if (s[p] == '-' || s[p] == '+') ++p;
        const bool digit_here = p < s.size() && is_digit(s[p]);
        const bool dot_digit = p + 1 < s.size() && s[p] == '.' && is_digit(s[p + 1]);
        if (!digit_here && !dot_digit) continue;
        while (p < s.size() && is_digit(s[p])) ++p;
        if (p + 1 < s.size() && s[p] == '.' && is_digit(s[p + 1])) {
            ++p;
            while (p < s.size() && is_digit(s[p])) ++p;
        } else if (p < s.size() && s[p] == '.' && digit_here) {
            ++p;  // "3." is still a number
        }
        if (p < s.size() && (s[p] == 'e' || s[p] == 'E')) {
            std::size_t q = p + 1;
            if (q < s.size() && (s[q] == '-' || s[q] == '+')) ++q;
            if (q < s.size() && is_digit(s[q])) {
                while (q < s.size() && is_digit(s[q])) ++q;
                p = q;
            }
        }
        std::string token(s.substr(start, p - start));
        auto value = text::parse_double(token);
        if (!value) {
            ParsedAnswer a = unparsed("number out of range: " + token);
            return a;
        }
        ParsedAnswer a;
        a.kind = AnswerKind::number;
        a.number = *value;
        a.number_text = std::move(token);
        return a;
    }
    return unparsed("no numeric token");
}

ParsedAnswer parse_label(std::string_view s) {
    auto label = text::to_lower(text::collapse_whitespace(s));
    if (label.empty()) return unparsed("empty output");
    ParsedAnswer a;
    a.kind = AnswerKind::label;
    a.label = std::move(label);
    return a;
}

void require_aligned(std::size_t gold, std::size_t preds) {
    if (gold != preds) {
        throw EvalError("gold and prediction lists differ in length (" + std::to_string(gold) + " vs " +
                        std::to_string(preds) + ")");
    }
    if (gold == 0) throw EvalError("nothing to evaluate");
}

}  // namespace

std::string normalize_choice_text(std::string_view after) {
    auto s = text::trim_view(after);
    std::size_t cut = s.size();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\n' || (s[i] == '.' && i + 1 < s.size() && text::is_space(s[i + 1]))) {
            cut = i;
            break;
        }
    }
    auto head = text::trim_view(s.substr(0, cut));
    while (!head.empty() && head.back() == '.') head.remove_suffix(1);
    return text::to_lower(text::collapse_whitespace(head));
}

ParsedAnswer parse_answer(std::string_view raw, AnswerKind expected) {
    switch (expected) {
        case AnswerKind::choice: return parse_choice(raw);
        case AnswerKind::boolean: return parse_boolean(raw);
        case AnswerKind::number: return parse_number(raw);
        case AnswerKind::label: return parse_label(raw);
        case AnswerKind::unparsed: break;
    }
    return unparsed("no expected kind");
}

nlohmann::ordered_json to_json(const MetricReport& r) {
    nlohmann::ordered_json j;
    j["task"] = r.task;
    j["metric"] = to_string(r.metric);
    j["value"] = r.value;
    j["n"] = r.n;
    j["unparsed_count"] = r.unparsed_count;
    if (r.lenient_value) j["lenient_value"] = *r.lenient_value;
    if (r.included) j["included"] = *r.included;
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

MetricReport accuracy(const std::vector<ParsedAnswer>& gold, const std::vector<ParsedAnswer>& preds,
                      AccuracyMode mode) {
    require_aligned(gold.size(), preds.size());
    MetricReport r;
    r.metric = Metric::accuracy;
    r.n = gold.size();
    std::size_t strict = 0;
    std::size_t lenient = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (gold[i].kind != AnswerKind::choice) {
            throw EvalError("gold answer " + std::to_string(i) + " is not a multiple-choice answer");
        }
        if (preds[i].kind != AnswerKind::choice) {
            ++r.unparsed_count;
            continue;
        }
        if (preds[i].letter != gold[i].letter) continue;
        ++lenient;
        if (gold[i].choice_text.empty() || preds[i].choice_text == gold[i].choice_text) ++strict;
    }
    const double n = static_cast<double>(r.n);
    r.lenient_value = static_cast<double>(lenient) / n;
    r.value = mode == AccuracyMode::strict ? static_cast<double>(strict) / n : *r.lenient_value;
    if (mode == AccuracyMode::lenient) r.notes.push_back("letter-only matching");
    return r;
}

MetricReport f1_binary(const std::vector<bool>& gold, const std::vector<ParsedAnswer>& preds, bool positive) {
    require_aligned(gold.size(), preds.size());
    MetricReport r;
    r.metric = Metric::f1_binary;
    r.n = gold.size();
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        bool predicted_positive = false;
        if (preds[i].kind == AnswerKind::boolean) {
            predicted_positive = preds[i].truth == positive;
        } else {
            ++r.unparsed_count;
        }
        const bool gold_positive = gold[i] == positive;
        if (predicted_positive && gold_positive) ++tp;
        else if (predicted_positive) ++fp;
        else if (gold_positive) ++fn;
    }
    if (tp + fn == 0) r.notes.push_back("no positive instances");
    if (tp + fp == 0) r.notes.push_back("no positive predictions");
    if (tp == 0) {
        r.value = 0.0;
        return r;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    r.value = 2.0 * precision * recall / (precision + recall);
    return r;
}

MetricReport f1_macro(const std::vector<std::string>& gold, const std::vector<ParsedAnswer>& preds) {
    require_aligned(gold.size(), preds.size());
    MetricReport r;
    r.metric = Metric::f1_macro;
    r.n = gold.size();
    std::map<std::string, std::size_t> tp, fp, fn;
    for (const auto& g : gold) tp[g];
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const bool parsed = preds[i].kind == AnswerKind::label;
        if (!parsed) ++r.unparsed_count;
        if (parsed && preds[i].label == gold[i]) {
            ++tp[gold[i]];
            continue;
        }
        ++fn[gold[i]];
        if (parsed && tp.count(preds[i].label)) ++fp[preds[i].label];
    }
    double sum = 0.0;
    for (const auto& [cls, t] : tp) {
        const double denom = static_cast<double>(2 * t + fp[cls] + fn[cls]);
        sum += denom > 0 ? 2.0 * static_cast<double>(t) / denom : 0.0;
    }
    r.value = sum / static_cast<double>(tp.size());
    return r;
}

MetricReport mae(const std::vector<double>& gold, const std::vector<ParsedAnswer>& preds, UnparsedPolicy policy,
                 std::optional<double> penalty) {
    require_aligned(gold.size(), preds.size());
    MetricReport r;
    r.metric = Metric::mae;
    r.n = gold.size();
    if (policy == UnparsedPolicy::penalty && !penalty) {
        const auto [lo, hi] = std::minmax_element(gold.begin(), gold.end());
        penalty = *hi - *lo;
    }
    double sum = 0.0;
    std::size_t included = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (preds[i].kind != AnswerKind::number) {
            ++r.unparsed_count;
            if (policy == UnparsedPolicy::penalty) {
                sum += std::abs(*penalty);
                ++included;
            }
            continue;
        }
        sum += std::abs(gold[i] - preds[i].number);
        ++included;
    }
    if (included == 0) throw EvalError("mae: no parsed predictions to average");
    r.included = included;
    r.value = sum / static_cast<double>(included);
    if (policy == UnparsedPolicy::penalty && r.unparsed_count) {
        std::ostringstream os;
        os << "unparsed predictions charged " << *penalty;
        r.notes.push_back(os.str());
    }
    return r;
}

namespace {

std::string id_string(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    throw std::invalid_argument("record id must be a string or integer");
}

template <typename Fn>
void for_each_line(const fs::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw EvalError("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim_view(line).empty()) continue;
        try {
            fn(nlohmann::json::parse(line), line_no);
        } catch (const std::exception& e) {
            throw EvalError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
}

}  // namespace

std::vector<GoldRecord> load_gold(const fs::path& path) {
    std::vector<GoldRecord> out;
    for_each_line(path, [&](const nlohmann::json& j, std::size_t line_no) {
        if (!j.is_object() || !j.contains("output") || !j["output"].is_string()) {
            throw std::invalid_argument("gold record needs a string \"output\"");
        }
        GoldRecord g;
        g.record_id = j.contains("id") ? id_string(j["id"]) : std::to_string(line_no);
        g.output = j["output"].get<std::string>();
        if (j.contains("task") && j["task"].is_string()) g.task = j["task"].get<std::string>();
        out.push_back(std::move(g));
    });
    return out;
}

std::vector<PredictionRecord> load_predictions(const fs::path& path) {
    std::vector<PredictionRecord> out;
    for_each_line(path, [&](const nlohmann::json& j, std::size_t) {
        if (!j.is_object() || !j.contains("record_id") || !j.contains("output") || !j["output"].is_string()) {
            throw std::invalid_argument("prediction needs \"record_id\" and a string \"output\"");
        }
        out.push_back({id_string(j["record_id"]), j["output"].get<std::string>()});
    });
    return out;
}

Alignment align(const std::vector<GoldRecord>& gold, const std::vector<PredictionRecord>& preds) {
    std::unordered_map<std::string, const PredictionRecord*> by_id;
    for (const auto& p : preds) {
        if (!by_id.emplace(p.record_id, &p).second) throw EvalError("duplicate prediction for record " + p.record_id);
    }
    std::set<std::string> gold_ids;
    Alignment a;
    std::vector<std::string> missing;
    for (const auto& g : gold) {
        if (!gold_ids.insert(g.record_id).second) throw EvalError("duplicate gold record id " + g.record_id);
        const auto it = by_id.find(g.record_id);
        if (it == by_id.end()) {
            missing.push_back(g.record_id);
            continue;
        }
        a.gold.push_back(&g);
        a.predicted.push_back(it->second->raw_output);
    }
    std::vector<std::string> unknown;
    for (const auto& p : preds) {
        if (!gold_ids.count(p.record_id)) unknown.push_back(p.record_id);
    }
    auto sample = [](const std::vector<std::string>& ids) {
        std::vector<std::string> head(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(ids.size(), 5)));
        return text::join(head, ", ") + (ids.size() > 5 ? ", ..." : "");
    };
    if (!missing.empty() || !unknown.empty()) {
        std::string msg = "record id mismatch:";
        if (!missing.empty()) msg += " " + std::to_string(missing.size()) + " gold record(s) without prediction (" + sample(missing) + ")";
        if (!unknown.empty()) msg += " " + std::to_string(unknown.size()) + " prediction(s) with unknown id (" + sample(unknown) + ")";
        throw EvalError(msg);
    }
    return a;
}

Metric infer_metric(const std::vector<std::string>& gold_outputs) {
    auto all = [&](auto pred) { return std::all_of(gold_outputs.begin(), gold_outputs.end(), pred); };
    if (all([](const std::string& s) {
            const auto t = text::trim_view(s);
            return t.size() >= 3 && t[0] == '(' && t[2] == ')' && parse_choice(t).kind == AnswerKind::choice;
        })) {
        return Metric::accuracy;
    }
    if (all([](const std::string& s) { return parse_boolean(s).kind == AnswerKind::boolean; })) return Metric::f1_binary;
    if (all([](const std::string& s) { return text::parse_double(s).has_value(); })) return Metric::mae;
    return Metric::f1_macro;
}

std::vector<MetricReport> evaluate(const std::vector<GoldRecord>& gold, const std::vector<PredictionRecord>& preds,
                                   const EvaluateOptions& options) {
    const auto aligned = align(gold, preds);
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::size_t>> by_task;
    for (std::size_t i = 0; i < aligned.gold.size(); ++i) {
        const auto& task = aligned.gold[i]->task;
        if (!by_task.count(task)) order.push_back(task);
        by_task[task].push_back(i);
    }
    std::vector<MetricReport> reports;
    for (const auto& task : order) {
        const auto& idx = by_task[task];
        std::vector<std::string> gold_out;
        std::vector<std::string> pred_out;
        for (auto i : idx) {
            gold_out.push_back(aligned.gold[i]->output);
            pred_out.push_back(aligned.predicted[i]);
        }
        const Metric metric = options.metric ? *options.metric : infer_metric(gold_out);
        auto gold_parse = [&](AnswerKind kind) {
            std::vector<ParsedAnswer> out;
            for (std::size_t k = 0; k < gold_out.size(); ++k) {
                auto a = parse_answer(gold_out[k], kind);
                if (a.kind != kind) {
                    throw EvalError("task `" + task + "`: gold record " + aligned.gold[idx[k]]->record_id +
                                    " does not parse as " + to_string(kind));
                }
                out.push_back(std::move(a));
            }
            return out;
        };
        auto pred_parse = [&](AnswerKind kind) {
            std::vector<ParsedAnswer> out;
            for (const auto& p : pred_out) out.push_back(parse_answer(p, kind));
            return out;
        };
        MetricReport report;
        switch (metric) {
            case Metric::accuracy:
                report = accuracy(gold_parse(AnswerKind::choice), pred_parse(AnswerKind::choice), options.accuracy_mode);
                break;
            case Metric::f1_binary: {
                std::vector<bool> g;
                for (const auto& a : gold_parse(AnswerKind::boolean)) g.push_back(a.truth);
                report = f1_binary(g, pred_parse(AnswerKind::boolean), options.positive_label);
                break;
            }
            case Metric::f1_macro: {
                std::vector<std::string> g;
                for (const auto& a : gold_parse(AnswerKind::label)) g.push_back(a.label);
                report = f1_macro(g, pred_parse(AnswerKind::label));
                break;
            }
            case Metric::mae: {
                std::vector<double> g;
                for (const auto& a : gold_parse(AnswerKind::number)) g.push_back(a.number);
                report = mae(g, pred_parse(AnswerKind::number), options.unparsed, options.penalty);
                break;
            }
        }
        report.task = task;
        reports.push_back(std::move(report));
    }
    return reports;
}

std::string format_table(const std::vector<MetricReport>& reports) {
    std::size_t w = 4;
    for (const auto& r : reports) w = std::max(w, r.task.size());
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(w)) << "task" << "  " << std::setw(9) << "metric" << "  "
       << std::setw(10) << "value" << "  " << std::setw(6) << "n" << "  unparsed\n";
    for (const auto& r : reports) {
        std::ostringstream v;
        v << std::fixed << std::setprecision(4) << r.value;
        os << std::left << std::setw(static_cast<int>(w)) << (r.task.empty() ? "-" : r.task) << "  " << std::setw(9)
           << to_string(r.metric) << "  " << std::setw(10) << v.str() << "  " << std::setw(6) << r.n << "  "
           << r.unparsed_count;
        if (r.lenient_value) {
            os << "  (letter-only " << std::fixed << std::setprecision(4) << *r.lenient_value << ")";
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace sciforge::eval
