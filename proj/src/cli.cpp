#include "sciforge/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <deque>
#include <fstream>
#include <set>

#include <CLI11.hpp>

#include "sciforge/chunker.hpp"
#include "sciforge/corpus.hpp"
#include "sciforge/dataset_ops.hpp"
#include "sciforge/evaluator.hpp"
#include "sciforge/fair.hpp"
#include "sciforge/llm_gateway.hpp"
#include "sciforge/sciq.hpp"
#include "sciforge/sig.hpp"
#include "sciforge/util/io.hpp"
#include "sciforge/util/kvconfig.hpp"
#include "sciforge/util/log.hpp"
#include "sciforge/util/text.hpp"

#ifndef SCIFORGE_SPEC_DIR
#define SCIFORGE_SPEC_DIR "specs/fair"
#endif

namespace sciforge::cli {

using ojson = nlohmann::ordered_json;

RunConfig RunConfig::parse(std::string_view content, const std::string& origin) {
    RunConfig c;
    const auto doc = kv::Document::parse(content, origin);
    for (const auto& [k, e] : doc.entries()) c.values[k] = e.value;
    return c;
}

RunConfig RunConfig::load(const fs::path& path) { return parse(io::read_file(path), path.string()); }

std::optional<std::string> RunConfig::get(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    return it->second;
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "run.seed", "run.created_at", "run.log_level",
        "paths.corpus_root", "paths.corpus_manifest", "paths.sciq", "paths.fair_dir", "paths.output_dir",
        "paths.spec_dir",
        "ingest.out",
        "dedup.in", "dedup.out", "dedup.threshold", "dedup.scope", "dedup.embedder", "dedup.endpoint",
        "dedup.model", "dedup.max_in_flight",
        "chunk.in", "chunk.out", "chunk.budget", "chunk.tokenizer",
        "gateway.endpoint", "gateway.model", "gateway.mode", "gateway.transcript", "gateway.max_in_flight",
        "gateway.retries", "gateway.backoff_ms", "gateway.timeout",
        "sig.n_pairs", "sig.keywords", "sig.temperature", "sig.max_output_tokens", "sig.constraints",
        "sig.seed_fraction", "sig.seed_ids",
        "sig_seed.in", "sig_seed.out", "sig_seed.rest_out",
        "sig_build.in", "sig_build.out",
        "sciq.mix", "sciq.out", "sciq.explanation_in_output", "sciq.shuffle_options",
        "fair.spec", "fair.specs", "fair.in", "fair.out",
        "mix.inputs", "mix.weights", "mix.out",
        "split.in", "split.test_size", "split.train_out", "split.test_out",
        "train.out",
        "eval.gold", "eval.pred", "eval.metric", "eval.accuracy_mode", "eval.unparsed", "eval.penalty",
        "eval.positive_label", "eval.out",
        "validate.in", "validate.out",
        "verify.manifests",
        "convert.in", "convert.out", "convert.to",
    };
    return keys;
}

std::vector<std::string> unknown_keys(const RunConfig& config) {
    static const std::set<std::string> known(known_keys().begin(), known_keys().end());
    std::vector<std::string> out;
    for (const auto& [k, v] : config.values) {
        if (known.count(k) || (k.rfind("train.", 0) == 0)) continue;
        out.push_back(k);
    }
    return out;
}

void Settings::note(const std::string& key, const ojson& value) { resolved_[key] = value; }

std::optional<std::string> Settings::get(const std::string& key) { return config_.get(key); }

std::string Settings::str(const std::string& key, const std::string& fallback) {
    auto v = config_.get(key).value_or(fallback);
    note(key, v);
    return v;
}

std::string Settings::choice(const std::string& key, const std::string& fallback,
                             const std::vector<std::string>& allowed) {
    auto v = str(key, fallback);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
        violation("`" + key + "` must be one of " + text::join(allowed, "|") + ", got `" + v + "`");
    }
    return v;
}

double Settings::real(const std::string& key, double fallback, double lo, double hi, bool lo_open) {
    double v = fallback;
    if (auto raw = config_.get(key)) {
        auto parsed = text::parse_double(*raw);
        if (!parsed) {
            violation("`" + key + "` is not a number: `" + *raw + "`");
            return fallback;
        }
        v = *parsed;
    }
    if (v > hi || v < lo || (lo_open && v == lo)) {
        violation("`" + key + "` = " + text::shortest_repr(v) + " is outside " + (lo_open ? "(" : "[") +
                  text::shortest_repr(lo) + ", " + text::shortest_repr(hi) + "]");
    }
    note(key, v);
    return v;
}

std::uint64_t Settings::count(const std::string& key, std::uint64_t fallback, std::uint64_t min) {
    std::uint64_t v = fallback;
    if (auto raw = config_.get(key)) {
        auto parsed = text::parse_int(*raw);
        if (!parsed || *parsed < 0) {
            violation("`" + key + "` is not a nonnegative integer: `" + *raw + "`");
            return fallback;
        }
        v = static_cast<std::uint64_t>(*parsed);
    }
    if (v < min) violation("`" + key + "` must be at least " + std::to_string(min));
    note(key, v);
    return v;
}

bool Settings::flag(const std::string& key, bool fallback) {
    bool v = fallback;
    if (auto raw = config_.get(key)) {
        if (auto b = fair::parse_bool(*raw)) {
            v = *b;
        } else {
            violation("`" + key + "` is not a boolean: `" + *raw + "`");
        }
    }
    note(key, v);
    return v;
}

std::vector<std::string> Settings::list(const std::string& key) {
    std::vector<std::string> out;
    if (auto raw = config_.get(key)) {
        for (const auto& part : text::split(*raw, ',')) {
            auto t = text::trim(part);
            if (!t.empty()) out.push_back(std::move(t));
        }
    }
    if (!out.empty()) note(key, out);
    return out;
}

std::optional<fs::path> Settings::input(const std::string& key, const std::optional<fs::path>& fallback,
                                        bool directory) {
    std::optional<fs::path> p;
    if (auto raw = config_.get(key); raw && !raw->empty()) p = fs::path(*raw);
    else p = fallback;
    if (!p) {
        violation("`" + key + "` is not set");
        return std::nullopt;
    }
    const bool exists = directory ? fs::is_directory(*p) : fs::is_regular_file(*p);
    if (!exists) {
        violation("`" + key + "`: " + (directory ? "directory " : "file ") + p->string() + " does not exist");
        return std::nullopt;
    }
    note(key, p->string());
    return p;
}

std::optional<fs::path> Settings::output(const std::string& key, const std::string& default_name) {
    std::optional<fs::path> p;
    if (auto raw = config_.get(key); raw && !raw->empty()) {
        p = fs::path(*raw);
    } else if (auto dir = config_.get("paths.output_dir"); dir && !dir->empty()) {
        p = fs::path(*dir) / default_name;
    }
    if (!p) {
        violation("`" + key + "` is not set and there is no `paths.output_dir` to default to");
        return std::nullopt;
    }
    note(key, p->string());
    return p;
}

std::optional<std::uint64_t> Settings::seed(bool required) {
    auto raw = config_.get("run.seed");
    if (!raw) {
        if (required) violation("`run.seed` is required for this stage (use --seed)");
        return std::nullopt;
    }
    auto parsed = text::parse_int(*raw);
    if (!parsed || *parsed < 0) {
        violation("`run.seed` is not a nonnegative integer: `" + *raw + "`");
        return std::nullopt;
    }
    note("run.seed", *parsed);
    return static_cast<std::uint64_t>(*parsed);
}

fs::path sibling(const fs::path& path, const std::string& tag, const std::string& ext) {
    return path.parent_path() / (path.stem().string() + "." + tag + ext);
}

namespace {

std::string format_utc(std::time_t t) {
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string creation_time(const RunConfig& config) {
    if (auto v = config.get("run.created_at")) return *v;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        if (auto secs = text::parse_int(epoch)) return format_utc(static_cast<std::time_t>(*secs));
    }
    return format_utc(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now()));
}

namespace {

struct Context {
    std::string stage;
    RunConfig config;
    Settings settings;
    std::optional<fs::path> config_path;
    std::ostream& out;

    Context(std::string s, RunConfig c, std::optional<fs::path> cp, std::ostream& o)
        : stage(std::move(s)), config(std::move(c)), settings(config), config_path(std::move(cp)), out(o) {}

    bool valid() const {
        for (const auto& v : settings.violations()) log::error(stage, "invalid configuration", {{"problem", v}});
        if (!settings.violations().empty()) {
            log::error(stage, "configuration rejected",
                       {{"violations", std::to_string(settings.violations().size())}});
        }
        return settings.violations().empty();
    }
};

void write_lines(const fs::path& path, const std::vector<ojson>& rows) {
    std::string body;
    for (const auto& r : rows) {
        body += r.dump();
        body += '\n';
    }
    io::write_file(path, body);
}

struct ManifestSpec {
    ManifestSpec(fs::path p, std::vector<fs::path> in, std::vector<fs::path> out)
        : primary(std::move(p)), inputs(std::move(in)), outputs(std::move(out)) {}

    fs::path primary;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;
    const std::vector<InstructionRecord>* records = nullptr;
    std::optional<std::size_t> total;
    std::optional<std::uint64_t> seed;
    ojson extra = ojson::object();
};

fs::path write_stage_manifest(const Context& c, const ManifestSpec& spec) {
    dataset::DatasetManifest m;
    m.stage = c.stage;
    m.created_at = creation_time(c.config);
    m.seed = spec.seed;
    if (c.config_path) m.inputs.push_back(dataset::digest_input(*c.config_path));
    for (const auto& p : spec.inputs) m.inputs.push_back(dataset::digest_input(p));
    const auto manifest_path = sibling(spec.primary, "manifest", ".json");
    for (const auto& p : spec.outputs) m.outputs.push_back(dataset::digest_output(p, manifest_path));
    if (spec.records) dataset::count_tasks(m, *spec.records);
    if (spec.total) m.total = *spec.total;
    m.parameters = c.settings.resolved();
    for (const auto& [k, v] : spec.extra.items()) m.parameters[k] = v;
    dataset::write_manifest(manifest_path, m);
    return manifest_path;
}

// ---- ingest --------------------------------------------------------------

int cmd_ingest(Context& c) {
    auto& s = c.settings;
    const auto root = s.input("paths.corpus_root", std::nullopt, true);
    const auto manifest =
        s.input("paths.corpus_manifest", root ? std::optional<fs::path>(*root / "manifest.csv") : std::nullopt);
    const auto out = s.output("ingest.out", "papers.jsonl");
    if (!c.valid()) return usage;

    const auto result = corpus::ingest_corpus(*root, *manifest);
    corpus::write_documents(*out, result.documents);
    std::vector<ojson> errors;
    for (const auto& e : result.row_errors) {
        log::warn(c.stage, "row skipped", {{"row", std::to_string(e.row)}, {"id", e.id}, {"reason", e.message}});
        errors.push_back({{"row", e.row}, {"id", e.id}, {"message", e.message}});
    }
    const auto errors_path = sibling(*out, "errors", ".jsonl");
    write_lines(errors_path, errors);

    ManifestSpec ms{*out, {*manifest}, {*out, errors_path}};
    for (const auto& d : result.documents) ms.inputs.push_back(*root / d.source_path);
    ms.total = result.documents.size();
    write_stage_manifest(c, ms);
    log::info(c.stage, "done", {{"documents", std::to_string(result.documents.size())},
                                {"row_errors", std::to_string(result.row_errors.size())}});
    return ok;
}

// ---- dedup ---------------------------------------------------------------

int cmd_dedup(Context& c) {
    auto& s = c.settings;
    const auto in = s.input("dedup.in", c.config.get("paths.output_dir")
                                            ? std::optional<fs::path>(fs::path(*c.config.get("paths.output_dir")) / "papers.jsonl")
                                            : std::nullopt);
    const auto out = s.output("dedup.out", "papers.dedup.jsonl");
    const double threshold = s.real("dedup.threshold", corpus::kDefaultDedupThreshold, 0.0, 1.0, true);
    const auto scope_name = s.choice("dedup.scope", "body", {"body", "lead", "title"});
    const auto embedder = s.choice("dedup.embedder", "tfidf", {"tfidf", "service"});
    corpus::EmbeddingServiceConfig service;
    if (embedder == "service") {
        if (auto e = s.get("dedup.endpoint")) service.endpoint = s.str("dedup.endpoint", *e);
        else s.violation("`dedup.endpoint` is required with the service embedder");
        service.model = s.str("dedup.model", "");
        service.max_in_flight = s.count("dedup.max_in_flight", 4, 1);
        if (const char* key = std::getenv(llm::kApiKeyEnv)) service.api_key = key;
    }
    if (!c.valid()) return usage;

    const auto docs = corpus::read_documents(*in);
    std::unique_ptr<corpus::EmbeddingProvider> provider;
    if (embedder == "service") provider = std::make_unique<corpus::EmbeddingServiceClient>(service);
    else provider = std::make_unique<corpus::TfidfEmbedder>();
    const auto report = corpus::dedup(docs, *provider, threshold, *corpus::parse_scope(scope_name));

    const std::set<std::string> kept(report.kept.begin(), report.kept.end());
    std::vector<corpus::PaperDocument> survivors;
    for (const auto& d : docs) {
        if (kept.count(d.id)) survivors.push_back(d);
    }
    corpus::write_documents(*out, survivors);
    const auto report_path = sibling(*out, "report", ".json");
    io::write_file(report_path, corpus::to_json(report).dump(2) + "\n");

    ManifestSpec ms{*out, {*in}, {*out, report_path}};
    ms.total = survivors.size();
    write_stage_manifest(c, ms);
    log::info(c.stage, "done", {{"kept", std::to_string(survivors.size())},
                                {"removed", std::to_string(report.removed.size())}});
    return ok;
}

// ---- chunk ---------------------------------------------------------------

std::optional<fs::path> default_in(Context& c, const std::string& name) {
    if (auto dir = c.config.get("paths.output_dir")) return fs::path(*dir) / name;
    return std::nullopt;
}

int cmd_chunk(Context& c) {
    auto& s = c.settings;
    const auto in = s.input("chunk.in", default_in(c, "papers.dedup.jsonl"));
    const auto out = s.output("chunk.out", "chunks.jsonl");
    const auto budget = s.count("chunk.budget", chunker::kDefaultBudget, 1);
    const auto scheme = s.str("chunk.tokenizer", "whitespace");
    std::unique_ptr<chunker::Tokenizer> tokenizer;
    try {
        tokenizer = chunker::make_tokenizer(scheme);
    } catch (const std::exception& e) {
        s.violation(std::string("`chunk.tokenizer`: ") + e.what());
    }
    if (!c.valid()) return usage;

    const auto docs = corpus::read_documents(*in);
    std::vector<ojson> rows;
    std::vector<ojson> errors;
    for (const auto& d : docs) {
        try {
            for (const auto& ch : chunker::chunk(d.id, d.body, budget, *tokenizer)) rows.push_back(chunker::to_json(ch));
        } catch (const chunker::ChunkError& e) {
            log::warn(c.stage, "document not chunked", {{"id", d.id}, {"reason", e.what()}});
            errors.push_back({{"id", d.id}, {"message", e.what()}});
        }
    }
    write_lines(*out, rows);
    const auto errors_path = sibling(*out, "errors", ".jsonl");
    write_lines(errors_path, errors);
    ManifestSpec ms{*out, {*in}, {*out, errors_path}};
    ms.total = rows.size();
    write_stage_manifest(c, ms);
    log::info(c.stage, "done", {{"documents", std::to_string(docs.size())}, {"chunks", std::to_string(rows.size())}});
    return errors.empty() ? ok : failed;
}

// ---- sig -----------------------------------------------------------------

struct SigSetup {
    std::unique_ptr<llm::Gateway> gateway;
    sig::SigOptions options;
    std::optional<fs::path> transcript;
    llm::Mode mode = llm::Mode::passthrough;
};

SigSetup sig_setup(Context& c) {
    auto& s = c.settings;
    SigSetup out;
    const auto mode_name = s.choice("gateway.mode", "passthrough", {"record", "replay", "passthrough"});
    out.mode = llm::parse_mode(mode_name).value_or(llm::Mode::passthrough);
    std::string endpoint;
    if (out.mode != llm::Mode::replay) {
        if (auto e = s.get("gateway.endpoint")) endpoint = s.str("gateway.endpoint", *e);
        else s.violation("`gateway.endpoint` is required unless gateway.mode is replay");
    }
    if (out.mode != llm::Mode::passthrough) {
        if (auto t = s.get("gateway.transcript")) out.transcript = fs::path(s.str("gateway.transcript", *t));
        else s.violation("`gateway.transcript` is required in record and replay modes");
    }
    llm::GatewayConfig gc;
    gc.mode = out.mode;
    gc.max_retries = static_cast<int>(s.count("gateway.retries", 3));
    const auto backoff = s.str("gateway.backoff_ms", "1000,2000,4000");
    try {
        gc.backoff = llm::parse_backoff(backoff);
    } catch (const std::exception& e) {
        s.violation(std::string("`gateway.backoff_ms`: ") + e.what());
    }
    const auto timeout = static_cast<int>(s.count("gateway.timeout", 120, 1));
    if (const char* key = std::getenv(llm::kApiKeyEnv)) gc.api_key = key;

    auto& o = out.options;
    o.model_name = s.str("gateway.model", o.model_name);
    o.max_in_flight = s.count("gateway.max_in_flight", o.max_in_flight, 1);
    o.n_pairs = static_cast<int>(s.count("sig.n_pairs", static_cast<std::uint64_t>(o.n_pairs), 1));
    o.keywords = s.count("sig.keywords", o.keywords, 1);
    o.budget = s.count("chunk.budget", o.budget, 1);
    o.temperature = s.real("sig.temperature", o.temperature, 0.0, 2.0);
    o.max_output_tokens = static_cast<int>(s.count("sig.max_output_tokens", static_cast<std::uint64_t>(o.max_output_tokens), 1));
    o.constraints = s.str("sig.constraints", o.constraints);
    if (!s.violations().empty()) return out;

    std::shared_ptr<llm::Transport> transport;
    if (out.mode != llm::Mode::replay) transport = std::make_shared<llm::HttpTransport>(endpoint, timeout);
    auto store = out.transcript ? std::make_shared<llm::TranscriptStore>(*out.transcript)
                                : std::make_shared<llm::TranscriptStore>();
    out.gateway = std::make_unique<llm::Gateway>(gc, transport, store);
    return out;
}

std::vector<ojson> sig_diagnostics(const sig::SeedSetResult& r) {
    std::vector<ojson> rows;
    for (const auto& f : r.failures) rows.push_back({{"paper_id", f.paper_id}, {"kind", "gateway-error"}, {"message", f.message}});
    for (const auto& id : r.zero_pair_papers) rows.push_back({{"paper_id", id}, {"kind", "zero-pairs"}});
    for (const auto& d : r.diagnostics) rows.push_back(sig::to_json(d));
    return rows;
}

int sig_finish(Context& c, const sig::SeedSetResult& result, const SigSetup& setup, ManifestSpec ms,
               const fs::path& diagnostics_path) {
    write_lines(diagnostics_path, sig_diagnostics(result));
    ms.outputs.push_back(diagnostics_path);
    if (setup.transcript) {
        if (setup.mode == llm::Mode::record) {
            if (fs::exists(*setup.transcript)) ms.outputs.push_back(*setup.transcript);
        } else if (fs::exists(*setup.transcript)) {
            ms.inputs.push_back(*setup.transcript);
        }
    }
    write_stage_manifest(c, ms);
    for (const auto& f : result.failures) {
        log::error(c.stage, "paper failed", {{"paper_id", f.paper_id}, {"reason", f.message}});
    }
    for (const auto& id : result.zero_pair_papers) log::warn(c.stage, "no Q&A pairs parsed", {{"paper_id", id}});
    return result.failures.empty() ? ok : failed;
}

int cmd_sig_seed(Context& c) {
    auto& s = c.settings;
    const auto in = s.input("sig_seed.in", default_in(c, "papers.dedup.jsonl"));
    const auto out = s.output("sig_seed.out", "sig_generator_train.jsonl");
    const auto rest_out = s.output("sig_seed.rest_out", "sig_training_papers.jsonl");
    const auto ids = s.list("sig.seed_ids");
    const double fraction = ids.empty() ? s.real("sig.seed_fraction", 0.01, 0.0, 1.0, true) : 0.0;
    const auto seed = s.seed(ids.empty());
    auto setup = sig_setup(c);
    if (!c.valid()) return usage;

    const auto docs = corpus::read_documents(*in);
    std::vector<std::string> bodies;
    for (const auto& d : docs) bodies.push_back(d.body);
    const auto stats = sig::collect_term_stats(bodies);
    const auto part = ids.empty() ? sig::select_seeds(docs, fraction, *seed) : sig::select_seeds(docs, ids);
    log::info(c.stage, "seed papers selected", {{"seeds", std::to_string(part.seeds.size())},
                                                {"training", std::to_string(part.training.size())}});

    const auto result = sig::build_seed_set(part.seeds, *setup.gateway, setup.options, &stats);
    std::vector<InstructionRecord> records;
    for (const auto& ex : result.examples) records.push_back(sig::to_instruction_record(ex));
    dataset::write_jsonl(*out, records);
    corpus::write_documents(*rest_out, part.training);

    ManifestSpec ms{*out, {*in}, {*out, *rest_out}};
    ms.records = &records;
    ms.seed = seed;
    return sig_finish(c, result, setup, ms, sibling(*out, "diagnostics", ".jsonl"));
}

int cmd_sig_build(Context& c) {
    auto& s = c.settings;
    const auto in = s.input("sig_build.in", default_in(c, "sig_training_papers.jsonl"));
    const auto out = s.output("sig_build.out", "sig_qa.jsonl");
    auto setup = sig_setup(c);
    if (!c.valid()) return usage;

    const auto docs = corpus::read_documents(*in);
    std::vector<std::string> bodies;
    for (const auto& d : docs) bodies.push_back(d.body);
    const auto stats = sig::collect_term_stats(bodies);
    const auto result = sig::build_seed_set(docs, *setup.gateway, setup.options, &stats);
    std::vector<InstructionRecord> records;
    for (const auto& ex : result.examples) {
        for (auto& r : sig::qa_to_instructions(ex.pairs)) records.push_back(std::move(r));
    }
    dataset::write_jsonl(*out, records);

    ManifestSpec ms{*out, {*in}, {*out}};
    ms.records = &records;
    return sig_finish(c, result, setup, ms, sibling(*out, "diagnostics", ".jsonl"));
}

// ---- build-sciq ----------------------------------------------------------

int cmd_build_sciq(Context& c) {
    auto& s = c.settings;
    const auto in = s.input("paths.sciq");
    const auto out = s.output("sciq.out", "sciq_instructions.jsonl");
    const auto mix_text = s.str("sciq.mix", "1:1:1");
    sciq::BuildOptions options;
    try {
        options.mix = sciq::parse_mix(mix_text);
    } catch (const std::exception& e) {
        s.violation(std::string("`sciq.mix`: ") + e.what());
    }
    options.render.explanation_in_output = s.flag("sciq.explanation_in_output", false);
    options.shuffle_options = s.flag("sciq.shuffle_options", false);
    const auto seed = s.seed(true);
    if (!c.valid()) return usage;
    options.seed = *seed;

    const auto loaded = sciq::load(*in);
    auto built = sciq::build_sciq_instructions(loaded.records, options);
    dataset::write_jsonl(*out, built.records);

    std::vector<ojson> errors;
    for (const auto& e : loaded.errors) errors.push_back({{"index", e.index}, {"message", e.message}});
    for (const auto& e : built.errors) errors.push_back({{"index", e.index}, {"message", e.message}});
    for (const auto& e : errors) {
        log::warn(c.stage, "record skipped", {{"index", e["index"].dump()}, {"reason", e["message"].get<std::string>()}});
    }
    const auto errors_path = sibling(*out, "errors", ".jsonl");
    write_lines(errors_path, errors);

    std::map<std::string, std::size_t> pattern_counts;
    for (auto p : built.patterns) ++pattern_counts[sciq::to_string(p)];
    ManifestSpec ms{*out, {*in}, {*out, errors_path}};
    ms.records = &built.records;
    ms.seed = seed;
    ms.extra["pattern_counts"] = pattern_counts;
    write_stage_manifest(c, ms);
    log::info(c.stage, "done", {{"records", std::to_string(built.records.size())},
                                {"errors", std::to_string(errors.size())}});
    return ok;
}

// ---- build-fair ----------------------------------------------------------

int cmd_build_fair(Context& c) {
    auto& s = c.settings;
    const auto spec_dir = s.input("paths.spec_dir", fs::path(SCIFORGE_SPEC_DIR), true);
    std::vector<std::string> names;
    const bool single = c.config.get("fair.spec").has_value();
    if (single) names.push_back(s.str("fair.spec", ""));
    else names = s.list("fair.specs");
    if (names.empty()) s.violation("no task spec selected (use --spec or `fair.specs`)");

    struct Job {
        fair::TaskSpec spec;
        fs::path in;
        fs::path out;
    };
    std::vector<Job> jobs;
    if (spec_dir) {
        for (const auto& name : names) {
            Job job;
            try {
                job.spec = fair::find_task_spec(name, *spec_dir);
            } catch (const fair::SpecError& e) {
                for (const auto& v : e.violations()) s.violation("spec `" + name + "`: " + v);
                continue;
            } catch (const std::exception& e) {
                s.violation(e.what());
                continue;
            }
            std::optional<fs::path> in;
            std::optional<fs::path> out;
            if (single) {
                in = s.input("fair.in", c.config.get("paths.fair_dir")
                                            ? std::optional<fs::path>(fs::path(*c.config.get("paths.fair_dir")) / (job.spec.dataset_name + ".csv"))
                                            : std::nullopt);
                out = s.output("fair.out", job.spec.dataset_name + ".jsonl");
            } else {
                const auto dir = s.input("paths.fair_dir", std::nullopt, true);
                if (dir) {
                    for (const char* ext : {".csv", ".json"}) {
                        if (fs::is_regular_file(*dir / (job.spec.dataset_name + ext))) {
                            in = *dir / (job.spec.dataset_name + ext);
                            break;
                        }
                    }
                    if (!in) s.violation("no input file for `" + job.spec.dataset_name + "` in " + dir->string());
                }
                if (auto od = c.config.get("paths.output_dir")) out = fs::path(*od) / (job.spec.dataset_name + ".jsonl");
                else s.violation("`paths.output_dir` is required when building several specs");
            }
            if (in && out) jobs.push_back({std::move(job.spec), *in, *out});
        }
    }
    if (!c.valid()) return usage;

    bool all_ok = true;
    for (const auto& job : jobs) {
        const auto rows = fair::load_rows(job.in);
        const auto built = fair::build(rows, job.spec);
        dataset::write_jsonl(job.out, built.records);
        std::vector<ojson> errors;
        for (const auto& e : built.errors) {
            errors.push_back({{"row_index", e.row_index}, {"message", e.message}});
        }
        if (!built.errors.empty()) {
            log::warn(c.stage, "rows skipped", {{"spec", job.spec.dataset_name},
                                                {"count", std::to_string(built.errors.size())},
                                                {"first", built.errors.front().message}});
        }
        const auto errors_path = sibling(job.out, "errors", ".jsonl");
        write_lines(errors_path, errors);
        ManifestSpec ms{job.out, {job.in}, {job.out, errors_path}};
        ms.records = &built.records;
        ms.extra["task_spec"] = job.spec.dataset_name;
        ms.extra["task_kind"] = fair::to_string(job.spec.task_kind);
        ms.extra["reconstructed"] = job.spec.reconstructed;
        write_stage_manifest(c, ms);
        log::info(c.stage, "done", {{"spec", job.spec.dataset_name},
                                    {"records", std::to_string(built.records.size())},
                                    {"errors", std::to_string(built.errors.size())}});
        if (built.records.empty()) all_ok = false;
    }
    return all_ok ? ok : failed;
}

// ---- mix -----------------------------------------------------------------

int cmd_mix(Context& c) {
    auto& s = c.settings;
    std::vector<fs::path> inputs;
    const auto names = s.list("mix.inputs");
    if (names.empty()) s.violation("`mix.inputs` is empty (use --in, repeatable)");
    for (const auto& n : names) {
        if (!fs::is_regular_file(n)) s.violation("`mix.inputs`: file " + n + " does not exist");
        else inputs.emplace_back(n);
    }
    dataset::MixOptions options;
    for (const auto& w : s.list("mix.weights")) {
        auto v = text::parse_double(w);
        if (!v || *v < 0) s.violation("`mix.weights`: bad weight `" + w + "`");
        else options.weights.push_back(*v);
    }
    if (!options.weights.empty() && options.weights.size() != names.size()) {
        s.violation("`mix.weights` needs one weight per input");
    }
    const auto out = s.output("mix.out", "mixed.jsonl");
    const auto seed = s.seed(true);
    if (!c.valid()) return usage;
    options.seed = *seed;

    const auto result = dataset::mix(inputs, options);
    dataset::write_jsonl(*out, result.records);
    ManifestSpec ms{*out, inputs, {*out}};
    ms.records = &result.records;
    ms.seed = seed;
    for (const auto& [k, v] : result.manifest.parameters.items()) ms.extra[k] = v;
    write_stage_manifest(c, ms);
    log::info(c.stage, "done", {{"records", std::to_string(result.records.size())}});
    return ok;
}

// ---- split ---------------------------------------------------------------

int cmd_split(Context& c) {
    auto& s = c.settings;
    const auto in = s.input("split.in", c.config.get("paths.sciq") ? std::optional<fs::path>(*c.config.get("paths.sciq"))
                                                                   : std::nullopt);
    const auto test_size = s.count("split.test_size", 1000);
    const auto seed = s.seed(true);
    std::optional<fs::path> train_out;
    std::optional<fs::path> test_out;
    if (in) {
        const auto ext = in->extension().string();
        train_out = s.output("split.train_out", in->stem().string() + ".train" + ext);
        test_out = s.output("split.test_out", in->stem().string() + ".test" + ext);
    }
    if (!c.valid()) return usage;

    const bool is_array = in->extension() == ".json";
    std::vector<std::string> items;  // one serialized item each
    std::vector<std::string> tasks;
    if (is_array) {
        const auto arr = ojson::parse(io::read_file(*in));
        if (!arr.is_array()) throw std::runtime_error(in->string() + ": expected a JSON array");
        for (const auto& item : arr) {
            items.push_back(item.dump());
            tasks.push_back(item.is_object() && item.contains("task") && item["task"].is_string()
                                ? item["task"].get<std::string>() : "");
        }
    } else {
        for (const auto& line : text::split(io::read_file(*in), '\n')) {
            auto t = text::trim(line);
            if (t.empty()) continue;
            const auto j = nlohmann::json::parse(t);
            tasks.push_back(j.is_object() && j.contains("task") && j["task"].is_string() ? j["task"].get<std::string>() : "");
            items.push_back(std::move(t));
        }
    }
    if (test_size > items.size()) {
        throw std::runtime_error("test size " + std::to_string(test_size) + " exceeds the " +
                                 std::to_string(items.size()) + " available records");
    }
    const auto split = sciq::split_train_test(items.size(), test_size, *seed);
    auto emit = [&](const fs::path& path, const std::vector<std::size_t>& idx) {
        std::string body;
        if (is_array) {
            body = "[";
            for (std::size_t k = 0; k < idx.size(); ++k) {
                body += k ? ",\n" : "\n";
                body += items[idx[k]];
            }
            body += idx.empty() ? "]\n" : "\n]\n";
        } else {
            for (auto i : idx) body += items[i] + "\n";
        }
        io::write_file(path, body);
    };
    emit(*train_out, split.train);
    emit(*test_out, split.test);

    for (const auto& [path, idx] : {std::pair{*train_out, split.train}, std::pair{*test_out, split.test}}) {
        ManifestSpec ms{path, {*in}, {path}};
        ms.seed = seed;
        ms.total = idx.size();
        std::map<std::string, std::size_t> per_task;
        for (auto i : idx) {
            if (!tasks[i].empty()) ++per_task[tasks[i]];
        }
        ms.extra["partition"] = path == *train_out ? "train" : "test";
        ms.extra["per_task"] = per_task;
        write_stage_manifest(c, ms);
    }
    log::info(c.stage, "done", {{"train", std::to_string(split.train.size())}, {"test", std::to_string(split.test.size())}});
    return ok;
}

// ---- emit-train-config ---------------------------------------------------

int cmd_emit_train_config(Context& c) {
    auto& s = c.settings;
    const auto out = s.output("train.out", "train_config.txt");
    std::map<std::string, std::string> overrides;
    for (const auto& [k, v] : c.config.values) {
        if (k.rfind("train.", 0) == 0 && k != "train.out") overrides[k.substr(6)] = v;
    }
    dataset::TrainingConfig config;
    try {
        config = dataset::with_overrides(config, overrides);
        for (const auto& v : dataset::check(config)) s.violation("training config: " + v);
    } catch (const std::exception& e) {
        s.violation(std::string("training config: ") + e.what());
    }
    if (!c.valid()) return usage;
    dataset::emit_training_config(*out, config);
    ManifestSpec ms{*out, {}, {*out}};
    ms.total = 0;
    for (const auto& [k, v] : overrides) ms.extra["train." + k] = v;
    write_stage_manifest(c, ms);
    log::info(c.stage, "done", {{"out", out->string()}});
    return ok;
}

// ---- evaluate ------------------------------------------------------------

int cmd_evaluate(Context& c) {
    auto& s = c.settings;
    const auto gold = s.input("eval.gold");
    const auto pred = s.input("eval.pred");
    const auto metric_name = s.choice("eval.metric", "auto", {"auto", "accuracy", "f1_binary", "f1_macro", "mae"});
    eval::EvaluateOptions options;
    if (metric_name != "auto") options.metric = eval::parse_metric(metric_name);
    options.accuracy_mode =
        s.choice("eval.accuracy_mode", "strict", {"strict", "lenient"}) == "lenient" ? eval::AccuracyMode::lenient
                                                                                     : eval::AccuracyMode::strict;
    options.unparsed = s.choice("eval.unparsed", "exclude", {"exclude", "penalty"}) == "penalty"
                           ? eval::UnparsedPolicy::penalty
                           : eval::UnparsedPolicy::exclude;
    if (c.config.get("eval.penalty")) options.penalty = s.real("eval.penalty", 0.0, 0.0, 1e300);
    options.positive_label = s.choice("eval.positive_label", "yes", {"yes", "no"}) == "yes";
    std::optional<fs::path> out;
    if (c.config.get("eval.out") || c.config.get("paths.output_dir")) out = s.output("eval.out", "eval_report.json");
    if (!c.valid()) return usage;

    const auto reports = eval::evaluate(eval::load_gold(*gold), eval::load_predictions(*pred), options);
    ojson arr = ojson::array();
    for (const auto& r : reports) arr.push_back(eval::to_json(r));
    c.out << eval::format_table(reports);
    if (out) {
        io::write_file(*out, arr.dump(2) + "\n");
        ManifestSpec ms{*out, {*gold, *pred}, {*out}};
        ms.total = reports.size();
        write_stage_manifest(c, ms);
    }
    return ok;
}

// ---- validate / verify / convert -----------------------------------------

int cmd_validate(Context& c) {
    auto& s = c.settings;
    const auto in = s.input("validate.in");
    std::optional<fs::path> out;
    if (c.config.get("validate.out")) out = s.output("validate.out", "validation.json");
    if (!c.valid()) return usage;

    const auto report = dataset::validate(*in);
    const auto j = dataset::to_json(report);
    c.out << j.dump(2) << "\n";
    if (out) {
        io::write_file(*out, j.dump(2) + "\n");
        ManifestSpec ms{*out, {*in}, {*out}};
        ms.total = report.records;
        write_stage_manifest(c, ms);
    }
    for (const auto& v : report.violations) {
        log::warn(c.stage, "violation", {{"line", std::to_string(v.line)}, {"kind", v.kind}, {"detail", v.detail}});
    }
    log::info(c.stage, report.ok() ? "valid" : "invalid",
              {{"records", std::to_string(report.records)}, {"violations", std::to_string(report.violations.size())}});
    return report.ok() ? ok : failed;
}

int cmd_verify(Context& c) {
    auto& s = c.settings;
    const auto manifests = s.list("verify.manifests");
    if (manifests.empty()) s.violation("no manifest given (use --manifest)");
    for (const auto& m : manifests) {
        if (!fs::is_regular_file(m)) s.violation("manifest " + m + " does not exist");
    }
    if (!c.valid()) return usage;
    std::size_t issues = 0;
    for (const auto& m : manifests) {
        for (const auto& issue : dataset::verify_manifest(m)) {
            ++issues;
            c.out << m << ": " << issue.problem << ": " << issue.path << "\n";
        }
    }
    if (issues == 0) c.out << "ok: " << manifests.size() << " manifest(s) verified\n";
    return issues == 0 ? ok : failed;
}

int cmd_convert(Context& c) {
    auto& s = c.settings;
    const auto in = s.input("convert.in");
    const auto out = s.output("convert.out", "converted");
    const auto to = s.choice("convert.to", "array", {"array", "jsonl"});
    if (!c.valid()) return usage;
    if (to == "array") dataset::jsonl_to_array(*in, *out);
    else dataset::array_to_jsonl(*in, *out);
    ManifestSpec ms{*out, {*in}, {*out}};
    ms.total = 0;
    write_stage_manifest(c, ms);
    return ok;
}

struct Binding {
    CLI::App* sub = nullptr;
    std::string key;
    std::string value;
    std::vector<std::string> values;
    bool flag = false;
    CLI::Option* opt = nullptr;
    enum { single, multi, boolean } kind = single;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out) {
    CLI::App app{"Build and evaluate scientific instruction-tuning datasets.", "sciforge"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string log_level;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "Run configuration file (key = value, [section] headers)");
    app.add_option("--set", sets, "Override any configuration key: --set section.key=value")->take_all();
    app.add_option("--log-level", log_level, "debug|info|warn|error");

    std::deque<Binding> bindings;
    auto bind = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        auto& b = bindings.emplace_back();
        b.sub = sub;
        b.key = key;
        b.opt = sub->add_option(flag, b.value, help + " [" + key + "]");
    };
    auto bind_multi = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        auto& b = bindings.emplace_back();
        b.sub = sub;
        b.key = key;
        b.kind = Binding::multi;
        b.opt = sub->add_option(flag, b.values, help + " [" + key + "]")->take_all();
    };
    auto bind_flag = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
        auto& b = bindings.emplace_back();
        b.sub = sub;
        b.key = key;
        b.kind = Binding::boolean;
        b.opt = sub->add_flag(flag, b.flag, help + " [" + key + "]");
    };
    // Shared by every subcommand.
    auto common = [&](CLI::App* sub) {
        bind(sub, "--seed", "run.seed", "RNG seed");
        bind(sub, "--created-at", "run.created_at", "Timestamp recorded in manifests");
        bind(sub, "--out-dir", "paths.output_dir", "Directory for default output names");
    };
    auto gateway = [&](CLI::App* sub) {
        bind(sub, "--endpoint", "gateway.endpoint", "Chat-completion endpoint URL");
        bind(sub, "--model", "gateway.model", "Model name sent to the service");
        bind(sub, "--mode", "gateway.mode", "record|replay|passthrough");
        bind(sub, "--transcript", "gateway.transcript", "Transcript JSONL for record/replay");
        bind(sub, "--max-in-flight", "gateway.max_in_flight", "Concurrent requests");
        bind(sub, "--retries", "gateway.retries", "Retries after the first attempt");
        bind(sub, "--backoff-ms", "gateway.backoff_ms", "Comma-separated backoff delays");
        bind(sub, "--timeout", "gateway.timeout", "Request timeout in seconds");
        bind(sub, "--n-pairs", "sig.n_pairs", "Q&A pairs requested per paper");
        bind(sub, "--keywords", "sig.keywords", "Keywords per prompt");
        bind(sub, "--budget", "chunk.budget", "Token budget per request");
        bind(sub, "--temperature", "sig.temperature", "Sampling temperature");
        bind(sub, "--max-output-tokens", "sig.max_output_tokens", "Completion token limit");
    };

    auto* ingest = app.add_subcommand("ingest", "Load a paper corpus from a manifest CSV");
    common(ingest);
    bind(ingest, "--root", "paths.corpus_root", "Corpus root directory");
    bind(ingest, "--manifest", "paths.corpus_manifest", "Manifest CSV (default <root>/manifest.csv)");
    bind(ingest, "--out", "ingest.out", "Output papers JSONL");

    auto* dedup = app.add_subcommand("dedup", "Remove near-duplicate papers");
    common(dedup);
    bind(dedup, "--in", "dedup.in", "Input papers JSONL");
    bind(dedup, "--out", "dedup.out", "Output papers JSONL");
    bind(dedup, "--threshold", "dedup.threshold", "Cosine similarity threshold");
    bind(dedup, "--scope", "dedup.scope", "body|lead|title");
    bind(dedup, "--embedder", "dedup.embedder", "tfidf|service");
    bind(dedup, "--endpoint", "dedup.endpoint", "Embedding service URL");
    bind(dedup, "--model", "dedup.model", "Embedding model name");
    bind(dedup, "--max-in-flight", "dedup.max_in_flight", "Concurrent embedding requests");

    auto* chunk = app.add_subcommand("chunk", "Split papers into [TBC]-linked chunks");
    common(chunk);
    bind(chunk, "--in", "chunk.in", "Input papers JSONL");
    bind(chunk, "--out", "chunk.out", "Output chunks JSONL");
    bind(chunk, "--budget", "chunk.budget", "Tokens per chunk");
    bind(chunk, "--tokenizer", "chunk.tokenizer", "whitespace or bytes/N");

    auto* sig_seed = app.add_subcommand("sig-seed", "Select seed papers and build the generator training set");
    common(sig_seed);
    gateway(sig_seed);
    bind(sig_seed, "--in", "sig_seed.in", "Input papers JSONL");
    bind(sig_seed, "--out", "sig_seed.out", "Generator training JSONL");
    bind(sig_seed, "--rest-out", "sig_seed.rest_out", "Remaining (training) papers JSONL");
    bind(sig_seed, "--fraction", "sig.seed_fraction", "Fraction of papers used as seeds");
    bind(sig_seed, "--seed-ids", "sig.seed_ids", "Comma-separated explicit seed paper ids");

    auto* sig_build = app.add_subcommand("sig-build", "Generate Q&A instruction records from papers");
    common(sig_build);
    gateway(sig_build);
    bind(sig_build, "--in", "sig_build.in", "Input papers JSONL");
    bind(sig_build, "--out", "sig_build.out", "Output instruction JSONL");

    auto* build_sciq = app.add_subcommand("build-sciq", "Render SciQ items as instruction records");
    common(build_sciq);
    bind(build_sciq, "--in", "paths.sciq", "SciQ JSON array");
    bind(build_sciq, "--out", "sciq.out", "Output instruction JSONL");
    bind(build_sciq, "--mix", "sciq.mix", "Pattern ratio open:closed:dialogue");
    bind_flag(build_sciq, "--explanation-in-output", "sciq.explanation_in_output",
              "Append the support paragraph to closed-book outputs");
    bind_flag(build_sciq, "--shuffle-options", "sciq.shuffle_options", "Shuffle answer options per item");

    auto* build_fair = app.add_subcommand("build-fair", "Render tabular datasets through task specs");
    common(build_fair);
    bind(build_fair, "--spec", "fair.spec", "Task spec name or path");
    bind(build_fair, "--specs", "fair.specs", "Comma-separated spec names (reads <fair-dir>/<name>.csv)");
    bind(build_fair, "--in", "fair.in", "Input CSV or JSON array");
    bind(build_fair, "--out", "fair.out", "Output instruction JSONL");
    bind(build_fair, "--spec-dir", "paths.spec_dir", "Directory of task specs");
    bind(build_fair, "--fair-dir", "paths.fair_dir", "Directory of dataset files");

    auto* mix = app.add_subcommand("mix", "Concatenate, reweight and shuffle instruction files");
    common(mix);
    bind_multi(mix, "--in", "mix.inputs", "Input JSONL (repeatable)");
    bind(mix, "--weights", "mix.weights", "Comma-separated weight per input");
    bind(mix, "--out", "mix.out", "Output JSONL");

    auto* split = app.add_subcommand("split", "Seeded train/test split");
    common(split);
    bind(split, "--in", "split.in", "JSONL or JSON array");
    bind(split, "--test-size", "split.test_size", "Records in the test partition");
    bind(split, "--train-out", "split.train_out", "Train partition path");
    bind(split, "--test-out", "split.test_out", "Test partition path");

    auto* emit_train = app.add_subcommand("emit-train-config", "Write the fine-tuning hyperparameter file");
    common(emit_train);
    bind(emit_train, "--out", "train.out", "Output path");
    std::vector<std::string> train_params;
    emit_train->add_option("--param", train_params, "Override key=value (e.g. epochs=5)")->take_all();

    auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold records");
    common(evaluate);
    bind(evaluate, "--gold", "eval.gold", "Gold instruction JSONL");
    bind(evaluate, "--pred", "eval.pred", "Predictions JSONL {record_id, output}");
    bind(evaluate, "--metric", "eval.metric", "auto|accuracy|f1_binary|f1_macro|mae");
    bind(evaluate, "--accuracy-mode", "eval.accuracy_mode", "strict|lenient");
    bind(evaluate, "--unparsed", "eval.unparsed", "exclude|penalty (MAE)");
    bind(evaluate, "--penalty", "eval.penalty", "Absolute error charged per unparsed prediction");
    bind(evaluate, "--positive-label", "eval.positive_label", "yes|no");
    bind(evaluate, "--out", "eval.out", "Report JSON path");

    auto* validate = app.add_subcommand("validate", "Check an instruction JSONL file");
    common(validate);
    bind(validate, "--in", "validate.in", "Instruction JSONL");
    bind(validate, "--out", "validate.out", "Report JSON path");

    auto* verify = app.add_subcommand("verify", "Re-hash the files named by manifests");
    common(verify);
    bind_multi(verify, "--manifest", "verify.manifests", "Manifest JSON (repeatable)");

    auto* convert = app.add_subcommand("convert", "Convert between JSONL and a JSON array");
    common(convert);
    bind(convert, "--in", "convert.in", "Input file");
    bind(convert, "--out", "convert.out", "Output file");
    bind(convert, "--to", "convert.to", "array|jsonl");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, std::cerr) == 0 ? ok : usage;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string stage = sub->get_name();

    RunConfig config;
    std::optional<fs::path> cfg_path;
    std::vector<std::string> problems;
    if (!config_path.empty()) {
        try {
            config = RunConfig::load(config_path);
            cfg_path = config_path;
        } catch (const std::exception& e) {
            log::error(stage, "cannot read configuration", {{"error", e.what()}});
            return usage;
        }
    }
    for (const auto& k : unknown_keys(config)) problems.push_back("unknown configuration key `" + k + "`");
    for (auto& b : bindings) {
        if (b.sub != sub || b.opt->count() == 0) continue;
        if (b.kind == Binding::single) config.set(b.key, b.value);
        else if (b.kind == Binding::multi) config.set(b.key, text::join(b.values, ","));
        else config.set(b.key, b.flag ? "true" : "false");
    }
    auto apply_kv = [&](const std::string& item, const std::string& prefix) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            problems.push_back("override `" + item + "` is not key=value");
            return;
        }
        config.set(prefix + text::trim(item.substr(0, eq)), text::trim(item.substr(eq + 1)));
    };
    for (const auto& item : sets) apply_kv(item, "");
    for (const auto& item : train_params) apply_kv(item, "train.");

    if (!log_level.empty() || config.get("run.log_level")) {
        log::Level lvl;
        const auto name = log_level.empty() ? *config.get("run.log_level") : log_level;
        if (log::parse_level(name, lvl)) log::set_level(lvl);
        else problems.push_back("unknown log level `" + name + "`");
    }

    Context ctx(stage, std::move(config), cfg_path, out);
    for (auto& p : problems) ctx.settings.violation(std::move(p));

    static const std::map<std::string, int (*)(Context&)> commands = {
        {"ingest", cmd_ingest},
        {"dedup", cmd_dedup},
        {"chunk", cmd_chunk},
        {"sig-seed", cmd_sig_seed},
        {"sig-build", cmd_sig_build},
        {"build-sciq", cmd_build_sciq},
        {"build-fair", cmd_build_fair},
        {"mix", cmd_mix},
        {"split", cmd_split},
        {"emit-train-config", cmd_emit_train_config},
        {"evaluate", cmd_evaluate},
        {"validate", cmd_validate},
        {"verify", cmd_verify},
        {"convert", cmd_convert},
    };
    try {
        return commands.at(stage)(ctx);
    } catch (const std::exception& e) {
        log::error(stage, "failed", {{"error", e.what()}});
        return failed;
    }
}

}  // namespace sciforge::cli
