#include "sciforge/fair.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "sciforge/util/csv.hpp"
#include "sciforge/util/io.hpp"
#include "sciforge/util/kvconfig.hpp"
#include "sciforge/util/text.hpp"

namespace sciforge::fair {

std::string to_string(TaskKind k) {
    switch (k) {
        case TaskKind::classification: return "classification";
        case TaskKind::regression: return "regression";
        case TaskKind::inverse_design: return "inverse_design";
    }
    return "regression";
}

Template Template::parse(std::string_view src) {
    Template t;
    t.source_ = std::string(src);
    std::string literal;
    auto flush = [&] {
        if (!literal.empty()) t.segments_.push_back({std::move(literal), "", std::nullopt});
        literal.clear();
    };
    for (std::size_t i = 0; i < src.size(); ++i) {
        const char c = src[i];
        if (c == '{' && i + 1 < src.size() && src[i + 1] == '{') {
            literal += '{';
            ++i;
        } else if (c == '}' && i + 1 < src.size() && src[i + 1] == '}') {
            literal += '}';
            ++i;
        } else if (c == '{') {
            const auto close = src.find('}', i);
            if (close == std::string_view::npos) throw std::invalid_argument("unclosed `{` in template `" + t.source_ + "`");
            const auto inner = src.substr(i + 1, close - i - 1);
            Segment seg;
            const auto colon = inner.find(':');
            seg.column = text::trim(inner.substr(0, colon));
            if (seg.column.empty()) throw std::invalid_argument("empty placeholder in template `" + t.source_ + "`");
            if (colon != std::string_view::npos) {
                const auto fmt = text::trim(inner.substr(colon + 1));
                const auto n = fmt.size() > 1 && fmt[0] == '.' ? text::parse_int(fmt.substr(1)) : std::nullopt;
                if (!n || *n < 0 || *n > 17) {
                    throw std::invalid_argument("bad format `" + fmt + "` in template `" + t.source_ + "`");
                }
                seg.decimals = static_cast<int>(*n);
            }
            flush();
            t.segments_.push_back(std::move(seg));
            i = close;
        } else if (c == '}') {
            throw std::invalid_argument("stray `}` in template `" + t.source_ + "`");
        } else {
            literal += c;
        }
    }
    flush();
    return t;
}

std::vector<std::string> Template::columns() const {
    std::vector<std::string> out;
    for (const auto& s : segments_) {
        if (!s.column.empty()) out.push_back(s.column);
    }
    return out;
}

SpecError::SpecError(const std::string& origin, std::vector<std::string> violations)
    : std::runtime_error(origin + ": invalid task spec:\n  - " + text::join(violations, "\n  - ")),
      violations_(std::move(violations)) {}

TaskSpec parse_task_spec(std::string_view content, const std::string& origin) {
    const auto doc = kv::Document::parse(content, origin);
    std::vector<std::string> v;
    TaskSpec spec;

    static const std::set<std::string> known = {
        "dataset_name", "task_kind", "label_type", "description", "instruction_template", "input_template",
        "output_template", "input_columns", "target_column", "decimals", "positive_label", "reconstructed", "note"};
    for (const auto& [key, entry] : doc.entries()) {
        if (!known.count(key) && key.rfind("label.", 0) != 0) {
            v.push_back("unknown key `" + key + "` (line " + std::to_string(entry.line) + ")");
        }
    }

    auto required = [&](const std::string& key) {
        auto val = doc.get(key);
        if (!val || val->empty()) {
            v.push_back("missing `" + key + "`");
            return std::string{};
        }
        return *val;
    };
    auto tmpl = [&](const std::string& key, const std::string& src) {
        try {
            return Template::parse(src);
        } catch (const std::invalid_argument& e) {
            v.push_back("`" + key + "`: " + e.what());
            return Template{};
        }
    };

    spec.dataset_name = required("dataset_name");
    const auto kind = required("task_kind");
    if (kind == "classification") spec.task_kind = TaskKind::classification;
    else if (kind == "regression") spec.task_kind = TaskKind::regression;
    else if (kind == "inverse_design") spec.task_kind = TaskKind::inverse_design;
    else if (!kind.empty()) v.push_back("unknown task_kind `" + kind + "`");

    const auto label_type = doc.get_or("label_type", "categorical");
    if (label_type == "boolean") spec.label_type = LabelType::boolean;
    else if (label_type == "categorical") spec.label_type = LabelType::categorical;
    else v.push_back("unknown label_type `" + label_type + "`");

    spec.description = doc.get_or("description", "");
    spec.note = doc.get_or("note", "");
    spec.instruction_template = tmpl("instruction_template", required("instruction_template"));
    spec.input_template = tmpl("input_template", doc.get_or("input_template", ""));
    spec.output_template = tmpl("output_template", doc.get_or("output_template", "{target}"));
    for (const auto& c : text::split(doc.get_or("input_columns", ""), ',')) {
        auto t = text::trim(c);
        if (!t.empty()) spec.input_columns.push_back(std::move(t));
    }
    spec.target_column = required("target_column");

    for (const auto& [raw, phrase] : doc.with_prefix("label")) {
        const auto key = spec.label_type == LabelType::boolean
                             ? (parse_bool(raw) ? (*parse_bool(raw) ? "true" : "false") : raw)
                             : raw;
        spec.label_map.emplace(key, tmpl("label." + raw, phrase));
    }
    if (auto d = doc.get("decimals")) {
        const auto n = text::parse_int(*d);
        if (!n || *n < 0 || *n > 17) v.push_back("decimals must be an integer in [0, 17]");
        else spec.decimals = static_cast<int>(*n);
    }
    if (auto p = doc.get("positive_label")) spec.positive_label = *p;
    const auto rec = doc.get_or("reconstructed", "false");
    if (const auto b = parse_bool(rec)) spec.reconstructed = *b;
    else v.push_back("reconstructed must be true or false");

    std::set<std::string> declared(spec.input_columns.begin(), spec.input_columns.end());
    if (!spec.target_column.empty()) declared.insert(spec.target_column);
    declared.insert(std::string(kTargetPlaceholder));
    auto check_columns = [&](const std::string& what, const Template& t) {
        for (const auto& c : t.columns()) {
            if (!declared.count(c)) v.push_back(what + " references undeclared column `" + c + "`");
        }
    };
    check_columns("instruction_template", spec.instruction_template);
    check_columns("input_template", spec.input_template);
    check_columns("output_template", spec.output_template);
    for (const auto& [raw, t] : spec.label_map) {
        check_columns("label." + raw, t);
        for (const auto& c : t.columns()) {
            if (c == kTargetPlaceholder) v.push_back("label." + raw + " cannot reference {target}");
        }
    }

    if (spec.task_kind == TaskKind::classification) {
        if (spec.label_type == LabelType::boolean) {
            if (!spec.label_map.count("true") || !spec.label_map.count("false")) {
                v.push_back("boolean classification needs label.true and label.false");
            }
            if (spec.positive_label && !parse_bool(*spec.positive_label)) {
                v.push_back("positive_label must be true or false for a boolean spec");
            }
        } else if (spec.positive_label && !spec.label_map.empty() && !spec.label_map.count(*spec.positive_label)) {
            v.push_back("positive_label `" + *spec.positive_label + "` is not a declared label");
        }
    } else {
        if (!spec.label_map.empty()) v.push_back("label map is only valid for classification specs");
        if (spec.label_type == LabelType::boolean) v.push_back("label_type applies to classification specs only");
    }
    if (spec.decimals && spec.task_kind == TaskKind::classification) {
        v.push_back("decimals does not apply to classification specs");
    }

    if (!v.empty()) throw SpecError(origin, std::move(v));
    return spec;
}

TaskSpec load_task_spec(const fs::path& path) { return parse_task_spec(io::read_file(path), path.string()); }

TaskSpec find_task_spec(const std::string& name_or_path, const fs::path& spec_dir) {
    const fs::path direct(name_or_path);
    if (fs::is_regular_file(direct)) return load_task_spec(direct);
    const auto candidate = spec_dir / (name_or_path + ".spec");
    if (fs::is_regular_file(candidate)) return load_task_spec(candidate);
    throw std::invalid_argument("no task spec `" + name_or_path + "` (looked in " + spec_dir.string() + ")");
}

std::vector<TaskSpec> load_all_specs(const fs::path& spec_dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(spec_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".spec") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<TaskSpec> out;
    for (const auto& f : files) out.push_back(load_task_spec(f));
    return out;
}

std::vector<FairRow> load_rows(const fs::path& path) {
    std::vector<FairRow> rows;
    const auto content = io::read_file(path);
    if (path.extension() == ".json") {
        const auto j = nlohmann::json::parse(content);
        if (!j.is_array()) throw std::invalid_argument(path.string() + ": expected a JSON array of objects");
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (!j[i].is_object()) throw std::invalid_argument(path.string() + ": element " + std::to_string(i) + " is not an object");
            FairRow row;
            row.row_index = i;
            for (const auto& [k, val] : j[i].items()) {
                if (val.is_null()) continue;
                row.values[k] = val.is_string() ? val.get<std::string>() : val.dump();
            }
            rows.push_back(std::move(row));
        }
        return rows;
    }
    const auto table = csv::parse(content);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        FairRow row;
        row.row_index = r;
        for (std::size_t c = 0; c < table.header.size() && c < table.rows[r].size(); ++c) {
            row.values[text::trim(table.header[c])] = table.rows[r][c];
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::optional<bool> parse_bool(std::string_view raw) {
    const auto s = text::to_lower(text::trim_view(raw));
    if (s == "true" || s == "yes" || s == "1" || s == "t" || s == "y" || s == "1.0") return true;
    if (s == "false" || s == "no" || s == "0" || s == "f" || s == "n" || s == "0.0") return false;
    return std::nullopt;
}

std::string round_decimal_text(std::string_view decimal, int d) {
    if (d < 0) throw std::invalid_argument("round_decimal: negative decimal count");
    auto s = text::trim_view(decimal);
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    std::string digits;
    long long int_len = 0;
    bool seen_point = false;
    std::size_t i = 0;
    for (; i < s.size() && ((s[i] >= '0' && s[i] <= '9') || s[i] == '.'); ++i) {
        if (s[i] == '.') {
            if (seen_point) throw std::invalid_argument("round_decimal: malformed number `" + std::string(decimal) + "`");
            seen_point = true;
            continue;
        }
        digits += s[i];
        if (!seen_point) ++int_len;
    }
    if (digits.empty()) throw std::invalid_argument("round_decimal: malformed number `" + std::string(decimal) + "`");
    if (i < s.size()) {
        if (s[i] != 'e' && s[i] != 'E') throw std::invalid_argument("round_decimal: malformed number `" + std::string(decimal) + "`");
        const auto e = text::parse_int(s.substr(i + 1));
        if (!e || *e > 400 || *e < -400) throw std::invalid_argument("round_decimal: bad exponent in `" + std::string(decimal) + "`");
        int_len += *e;
    }
    if (int_len < 0) {
        digits.insert(0, static_cast<std::size_t>(-int_len), '0');
        int_len = 0;
    }
    if (static_cast<std::size_t>(int_len) > digits.size()) digits.append(static_cast<std::size_t>(int_len) - digits.size(), '0');

    const std::size_t keep = static_cast<std::size_t>(int_len) + static_cast<std::size_t>(d);
    std::string kept = digits.substr(0, std::min(keep, digits.size()));
    if (kept.size() < keep) kept.append(keep - kept.size(), '0');
    if (digits.size() > keep && digits[keep] >= '5') {
        std::size_t k = kept.size();
        bool carry = true;
        while (carry && k > 0) {
            --k;
            if (kept[k] == '9') {
                kept[k] = '0';
            } else {
                ++kept[k];
                carry = false;
            }
        }
        if (carry) {
            kept.insert(kept.begin(), '1');
            ++int_len;
        }
    }
    std::string int_part = kept.substr(0, static_cast<std::size_t>(int_len));
    std::string frac_part = kept.substr(static_cast<std::size_t>(int_len));
    while (!frac_part.empty() && frac_part.back() == '0') frac_part.pop_back();
    const auto nz = int_part.find_first_not_of('0');
    int_part = nz == std::string::npos ? "0" : int_part.substr(nz);
    if (int_part == "0" && frac_part.empty()) return "0";
    std::string out = negative ? "-" : "";
    out += int_part;
    if (!frac_part.empty()) out += "." + frac_part;
    return out;
}

std::string round_decimal(double x, int d) {
    if (!std::isfinite(x)) throw std::invalid_argument("round_decimal: value is not finite");
    return round_decimal_text(text::shortest_repr(x), d);
}

namespace {

class RowFailure : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::string& cell(const FairRow& row, const std::string& column) {
    const auto it = row.values.find(column);
    if (it == row.values.end()) throw RowFailure("missing column `" + column + "`");
    return it->second;
}

std::string render(const Template& t, const FairRow& row, const std::optional<std::string>& target) {
    std::string out;
    for (const auto& seg : t.segments()) {
        if (seg.column.empty()) {
            out += seg.literal;
            continue;
        }
        std::string value;
        if (seg.column == kTargetPlaceholder) {
            if (!target) throw RowFailure("{target} is not available here");
            value = *target;
        } else {
            value = text::trim(cell(row, seg.column));
        }
        if (seg.decimals) {
            try {
                value = round_decimal_text(value, *seg.decimals);
            } catch (const std::invalid_argument&) {
                throw RowFailure("column `" + seg.column + "` is not numeric: `" + value + "`");
            }
        }
        out += value;
    }
    return out;
}

template <typename Fn>
BuildResult build_rows(const std::vector<FairRow>& rows, const TaskSpec& spec, Fn&& target_of) {
    BuildResult result;
    result.records.reserve(rows.size());
    for (const auto& row : rows) {
        try {
            const std::string target = target_of(row);
            InstructionRecord rec;
            rec.instruction = render(spec.instruction_template, row, target);
            rec.input = render(spec.input_template, row, target);
            rec.output = render(spec.output_template, row, target);
            rec.task = spec.dataset_name;
            rec.source = spec.dataset_name + ":" + std::to_string(row.row_index);
            if (text::trim_view(rec.instruction).empty()) throw RowFailure("rendered instruction is empty");
            if (text::trim_view(rec.output).empty()) throw RowFailure("rendered output is empty");
            result.records.push_back(std::move(rec));
        } catch (const RowFailure& e) {
            result.errors.push_back({row.row_index, e.what()});
        }
    }
    return result;
}

void require_kind(const TaskSpec& spec, TaskKind kind) {
    if (spec.task_kind != kind) {
        throw std::invalid_argument("spec `" + spec.dataset_name + "` is a " + to_string(spec.task_kind) +
                                    " spec, not " + to_string(kind));
    }
}

}  // namespace

BuildResult build_classification(const std::vector<FairRow>& rows, const TaskSpec& spec) {
    require_kind(spec, TaskKind::classification);
    return build_rows(rows, spec, [&](const FairRow& row) {
        const auto raw = text::trim(cell(row, spec.target_column));
        std::string key = raw;
        if (spec.label_type == LabelType::boolean) {
            const auto b = parse_bool(raw);
            if (!b) throw RowFailure("unknown raw label `" + raw + "`");
            key = *b ? "true" : "false";
        }
        if (spec.label_map.empty()) {
            if (raw.empty()) throw RowFailure("empty label");
            return raw;
        }
        const auto it = spec.label_map.find(key);
        if (it == spec.label_map.end()) throw RowFailure("unknown raw label `" + raw + "`");
        return render(it->second, row, std::nullopt);
    });
}

BuildResult build_regression(const std::vector<FairRow>& rows, const TaskSpec& spec) {
    require_kind(spec, TaskKind::regression);
    return build_rows(rows, spec, [&](const FairRow& row) {
        const auto raw = text::trim(cell(row, spec.target_column));
        if (!text::parse_double(raw)) throw RowFailure("non-numeric target `" + raw + "`");
        return spec.decimals ? round_decimal_text(raw, *spec.decimals) : raw;
    });
}

BuildResult build_inverse_design(const std::vector<FairRow>& rows, const TaskSpec& spec) {
    require_kind(spec, TaskKind::inverse_design);
    return build_rows(rows, spec, [&](const FairRow& row) {
        const auto it = row.values.find(spec.target_column);
        if (it == row.values.end() || text::trim_view(it->second).empty()) {
            throw RowFailure("missing structure column `" + spec.target_column + "`");
        }
        return text::trim(it->second);
    });
}

BuildResult build(const std::vector<FairRow>& rows, const TaskSpec& spec) {
    switch (spec.task_kind) {
        case TaskKind::classification: return build_classification(rows, spec);
        case TaskKind::regression: return build_regression(rows, spec);
        case TaskKind::inverse_design: return build_inverse_design(rows, spec);
    }
    return {};
}

}  // namespace sciforge::fair
