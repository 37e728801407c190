#include "sciforge/dataset_ops.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sciforge/util/io.hpp"
#include "sciforge/util/kvconfig.hpp"
#include "sciforge/util/rng.hpp"
#include "sciforge/util/text.hpp"

namespace sciforge::dataset {

std::vector<InstructionRecord> read_jsonl(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError(path.string(), 0, "cannot open file");
    std::vector<InstructionRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim_view(line).empty()) continue;
        try {
            out.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DatasetError(path.string(), line_no, std::string("invalid JSON: ") + e.what());
        } catch (const std::invalid_argument& e) {
            throw DatasetError(path.string(), line_no, e.what());
        }
    }
    return out;
}

std::string to_jsonl(const std::vector<InstructionRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += to_jsonl_line(r);
        out += '\n';
    }
    return out;
}

void write_jsonl(const fs::path& path, const std::vector<InstructionRecord>& records) {
    io::write_file(path, to_jsonl(records));
}

void jsonl_to_array(const fs::path& in, const fs::path& out) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : read_jsonl(in)) arr.push_back(to_json(r));
    io::write_file(out, arr.dump(2) + "\n");
}

void array_to_jsonl(const fs::path& in, const fs::path& out) {
    const auto j = nlohmann::json::parse(io::read_file(in));
    if (!j.is_array()) throw DatasetError(in.string(), 1, "expected a JSON array");
    std::vector<InstructionRecord> records;
    records.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        try {
            records.push_back(record_from_json(j[i]));
        } catch (const std::invalid_argument& e) {
            throw DatasetError(in.string(), i + 1, std::string("element: ") + e.what());
        }
    }
    write_jsonl(out, records);
}

nlohmann::ordered_json to_json(const DatasetManifest& m) {
    nlohmann::ordered_json j;
    j["stage"] = m.stage;
    j["created_at"] = m.created_at;
    if (m.seed) j["seed"] = *m.seed;
    else j["seed"] = nullptr;
    j["total"] = m.total;
    j["per_task"] = nlohmann::ordered_json::object();
    for (const auto& [task, n] : m.per_task) j["per_task"][task] = n;
    auto files = [](const std::vector<FileDigest>& v) {
        auto a = nlohmann::ordered_json::array();
        for (const auto& f : v) a.push_back({{"path", f.path}, {"sha256", f.sha256}});
        return a;
    };
    j["inputs"] = files(m.inputs);
    j["outputs"] = files(m.outputs);
    j["parameters"] = m.parameters;
    return j;
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
    DatasetManifest m;
    m.stage = j.value("stage", "");
    m.created_at = j.value("created_at", "");
    if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::uint64_t>();
    m.total = j.value("total", std::size_t{0});
    if (j.contains("per_task")) {
        for (const auto& [k, v] : j["per_task"].items()) m.per_task[k] = v.get<std::size_t>();
    }
    auto files = [&](const char* key) {
        std::vector<FileDigest> v;
        if (!j.contains(key)) return v;
        for (const auto& f : j[key]) v.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
        return v;
    };
    m.inputs = files("inputs");
    m.outputs = files("outputs");
    if (j.contains("parameters")) m.parameters = nlohmann::ordered_json(j["parameters"]);
    return m;
}

void count_tasks(DatasetManifest& m, const std::vector<InstructionRecord>& records) {
    m.per_task.clear();
    for (const auto& r : records) ++m.per_task[r.task];
    m.total = records.size();
}

FileDigest digest_input(const fs::path& path) {
    return {fs::absolute(path).lexically_normal().string(), io::sha256_file(path)};
}

FileDigest digest_output(const fs::path& path, const fs::path& manifest_path) {
    const auto base = fs::absolute(manifest_path).parent_path();
    const auto rel = fs::absolute(path).lexically_normal().lexically_relative(base);
    return {rel.generic_string(), io::sha256_file(path)};
}

void write_manifest(const fs::path& manifest_path, const DatasetManifest& m) {
    io::write_file(manifest_path, to_json(m).dump(2) + "\n");
}

std::vector<VerifyIssue> verify_manifest(const fs::path& manifest_path) {
    const auto m = manifest_from_json(nlohmann::json::parse(io::read_file(manifest_path)));
    const auto base = fs::absolute(manifest_path).parent_path();
    std::vector<VerifyIssue> issues;
    auto check_file = [&](const fs::path& p, const FileDigest& d) {
        if (!fs::exists(p)) {
            issues.push_back({d.path, "missing"});
        } else if (io::sha256_file(p) != d.sha256) {
            issues.push_back({d.path, "digest-mismatch"});
        }
    };
    for (const auto& d : m.inputs) check_file(fs::path(d.path), d);
    for (const auto& d : m.outputs) check_file(base / d.path, d);
    return issues;
}

MixResult mix(const std::vector<fs::path>& inputs, const MixOptions& options) {
    if (inputs.empty()) throw std::invalid_argument("mix needs at least one input file");
    if (!options.weights.empty() && options.weights.size() != inputs.size()) {
        throw std::invalid_argument("mix: " + std::to_string(options.weights.size()) + " weights for " +
                                    std::to_string(inputs.size()) + " inputs");
    }
    rng::Rng rng(options.seed);
    MixResult result;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        auto records = read_jsonl(inputs[i]);
        result.manifest.inputs.push_back(digest_input(inputs[i]));
        if (options.weights.empty()) {
            for (auto& r : records) result.records.push_back(std::move(r));
            continue;
        }
        const double w = options.weights[i];
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("mix: weights must be finite and >= 0");
        if (records.empty()) continue;
        const auto n = records.size();
        const auto want = static_cast<std::size_t>(std::floor(w * static_cast<double>(n) + 0.5));
        for (std::size_t c = 0; c < want / n; ++c) {
            result.records.insert(result.records.end(), records.begin(), records.end());
        }
        std::vector<std::size_t> idx(n);
        for (std::size_t k = 0; k < n; ++k) idx[k] = k;
        rng.shuffle(idx);
        idx.resize(want % n);
        std::sort(idx.begin(), idx.end());
        for (auto k : idx) result.records.push_back(records[k]);
    }
    rng.shuffle(result.records);
    result.manifest.stage = "mix";
    result.manifest.seed = options.seed;
    count_tasks(result.manifest, result.records);
    if (!options.weights.empty()) {
        auto w = nlohmann::ordered_json::array();
        for (double x : options.weights) w.push_back(x);
        result.manifest.parameters["weights"] = w;
    }
    return result;
}

namespace {

void add(ValidationReport& rep, std::size_t line, std::string kind, std::string detail = {}) {
    ++rep.counts[kind];
    rep.violations.push_back({line, std::move(kind), std::move(detail)});
}

void check_line(ValidationReport& rep, std::size_t line_no, std::string_view line) {
    if (!text::valid_utf8(line)) {
        add(rep, line_no, "invalid-utf8");
        return;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        add(rep, line_no, "invalid-json", e.what());
        return;
    }
    if (!j.is_object()) {
        add(rep, line_no, "not-an-object");
        return;
    }
    bool ok = true;
    for (const char* key : {"instruction", "output"}) {
        const auto it = j.find(key);
        if (it == j.end()) {
            add(rep, line_no, std::string("missing-") + key);
            ok = false;
        } else if (!it->is_string()) {
            add(rep, line_no, std::string("wrong-type-") + key);
            ok = false;
        } else if (text::trim_view(it->get_ref<const std::string&>()).empty()) {
            add(rep, line_no, std::string("empty-") + key);
            ok = false;
        }
    }
    for (const char* key : {"input", "task", "source"}) {
        const auto it = j.find(key);
        if (it != j.end() && !it->is_string()) {
            add(rep, line_no, std::string("wrong-type-") + key);
            ok = false;
        }
    }
    if (ok) ++rep.records;
}

}  // namespace

ValidationReport validate_text(std::string_view content) {
    ValidationReport rep;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        auto end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        auto line = content.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        ++rep.lines;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim_view(line).empty()) {
            ++rep.blank_lines;
            continue;
        }
        check_line(rep, line_no, line);
    }
    return rep;
}

ValidationReport validate(const fs::path& path) { return validate_text(io::read_file(path)); }

nlohmann::ordered_json to_json(const ValidationReport& report) {
    nlohmann::ordered_json j;
    j["lines"] = report.lines;
    j["records"] = report.records;
    j["blank_lines"] = report.blank_lines;
    j["violation_counts"] = nlohmann::ordered_json::object();
    for (const auto& [k, n] : report.counts) j["violation_counts"][k] = n;
    auto v = nlohmann::ordered_json::array();
    for (const auto& x : report.violations) {
        nlohmann::ordered_json e;
        e["line"] = x.line;
        e["kind"] = x.kind;
        if (!x.detail.empty()) e["detail"] = x.detail;
        v.push_back(std::move(e));
    }
    j["violations"] = std::move(v);
    return j;
}

std::string format_real(double value) {
    if (value == 0.0) return "0";
    auto s = text::shortest_repr(value);
    const auto e = s.find('e');
    if (e == std::string::npos) return s;
    std::string mant = s.substr(0, e);
    std::string exp = s.substr(e + 1);
    std::string sign;
    if (!exp.empty() && (exp[0] == '-' || exp[0] == '+')) {
        if (exp[0] == '-') sign = "-";
        exp.erase(0, 1);
    }
    while (exp.size() > 1 && exp[0] == '0') exp.erase(0, 1);
    return mant + "e" + sign + exp;
}

std::vector<std::string> check(const TrainingConfig& c) {
    std::vector<std::string> v;
    if (c.epochs <= 0) v.push_back("epochs must be positive");
    if (c.train_batch_size <= 0) v.push_back("train_batch_size must be positive");
    if (c.eval_batch_size <= 0) v.push_back("eval_batch_size must be positive");
    if (c.gradient_accumulation_steps <= 0) v.push_back("gradient_accumulation_steps must be positive");
    if (!(c.learning_rate > 0.0)) v.push_back("learning_rate must be positive");
    if (!(c.weight_decay >= 0.0)) v.push_back("weight_decay must be >= 0");
    if (!(c.warmup_ratio > 0.0 && c.warmup_ratio < 1.0)) v.push_back("warmup_ratio must be in (0, 1)");
    if (c.precision != "bf16" && c.precision != "fp16" && c.precision != "fp32") {
        v.push_back("precision must be one of bf16, fp16, fp32");
    }
    return v;
}

TrainingConfig with_overrides(TrainingConfig c, const std::map<std::string, std::string>& overrides) {
    auto as_int = [](const std::string& k, const std::string& v) {
        auto x = text::parse_int(v);
        if (!x) throw std::invalid_argument("training config: `" + k + "` expects an integer, got `" + v + "`");
        return static_cast<int>(*x);
    };
    auto as_real = [](const std::string& k, const std::string& v) {
        auto x = text::parse_double(v);
        if (!x) throw std::invalid_argument("training config: `" + k + "` expects a number, got `" + v + "`");
        return *x;
    };
    for (const auto& [k, v] : overrides) {
        if (k == "epochs") c.epochs = as_int(k, v);
        else if (k == "train_batch_size") c.train_batch_size = as_int(k, v);
        else if (k == "eval_batch_size") c.eval_batch_size = as_int(k, v);
        else if (k == "gradient_accumulation_steps") c.gradient_accumulation_steps = as_int(k, v);
        else if (k == "learning_rate") c.learning_rate = as_real(k, v);
        else if (k == "weight_decay") c.weight_decay = as_real(k, v);
        else if (k == "warmup_ratio") c.warmup_ratio = as_real(k, v);
        else if (k == "precision") c.precision = v;
        else throw std::invalid_argument("training config: unknown key `" + k + "`");
    }
    return c;
}

std::string to_text(const TrainingConfig& c) {
    std::ostringstream out;
    out << "epochs=" << c.epochs << '\n'
        << "train_batch_size=" << c.train_batch_size << '\n'
        << "eval_batch_size=" << c.eval_batch_size << '\n'
        << "gradient_accumulation_steps=" << c.gradient_accumulation_steps << '\n'
        << "learning_rate=" << format_real(c.learning_rate) << '\n'
        << "weight_decay=" << format_real(c.weight_decay) << '\n'
        << "warmup_ratio=" << format_real(c.warmup_ratio) << '\n'
        << "precision=" << c.precision << '\n';
    return out.str();
}

TrainingConfig parse_training_config(std::string_view content) {
    const auto doc = kv::Document::parse(content, "training config");
    std::map<std::string, std::string> values;
    for (const auto& [k, e] : doc.entries()) values[k] = e.value;
    return with_overrides(TrainingConfig{}, values);
}

void emit_training_config(const fs::path& out, const TrainingConfig& config) {
    const auto problems = check(config);
    if (!problems.empty()) throw std::invalid_argument("training config: " + text::join(problems, "; "));
    io::write_file(out, to_text(config));
}

}  // namespace sciforge::dataset
