#include "sciforge/sig.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_set>

#include "sciforge/chunker.hpp"
#include "sciforge/util/rng.hpp"
#include "sciforge/util/text.hpp"

namespace sciforge::sig {

std::string render_prompt(const SigPrompt& prompt) {
    if (prompt.keywords.empty()) throw std::invalid_argument("SIG prompt needs at least one keyword");
    if (prompt.n_pairs < 1) throw std::invalid_argument("SIG prompt n_pairs must be positive");
    std::string list;
    for (std::size_t i = 0; i < prompt.keywords.size(); ++i) {
        const auto& kw = prompt.keywords[i];
        if (text::trim_view(kw).empty()) {
            throw std::invalid_argument("SIG prompt keyword " + std::to_string(i) + " is empty");
        }
        if (i) list += ", ";
        list += '"';
        for (char c : kw) {
            if (c == '"' || c == '\\') list += '\\';
            list += c;
        }
        list += '"';
    }
    std::string out = "Please generate " + std::to_string(prompt.n_pairs) +
                      " scientific Q&A (prompts with outputs) related with " + list + ".";
    if (!text::trim_view(prompt.constraints_text).empty()) out += " " + text::trim(prompt.constraints_text);
    return out;
}

namespace {

// English function words plus boilerplate common in papers.
const std::unordered_set<std::string_view>& stopwords() {
    static const std::unordered_set<std::string_view> words = {
        "a", "about", "above", "after", "again", "against", "all", "also", "although", "am", "among", "an",
        "and", "another", "any", "are", "as", "at", "be", "because", "been", "before", "being", "below",
        "between", "both", "but", "by", "can", "could", "did", "do", "does", "doing", "done", "down", "due",
        "during", "each", "either", "et", "al", "etc", "few", "fig", "figs", "figure", "figures", "for",
        "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "him", "his", "how",
        "however", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "may", "might", "more",
        "most", "much", "must", "no", "nor", "not", "now", "of", "off", "on", "once", "one", "only", "or",
        "other", "our", "ours", "out", "over", "own", "per", "same", "she", "should", "since", "so", "some",
        "such", "than", "that", "the", "their", "theirs", "them", "then", "there", "these", "they", "this",
        "those", "through", "thus", "to", "too", "two", "under", "until", "up", "upon", "use", "used",
        "uses", "using", "very", "via", "was", "we", "were", "what", "when", "where", "whereas", "which",
        "while", "who", "whom", "why", "will", "with", "within", "without", "would", "yet", "you", "your",
        // paper boilerplate
        "abstract", "introduction", "conclusion", "conclusions", "paper", "study", "studies", "work",
        "results", "result", "shown", "show", "shows", "showed", "table", "tables", "section", "ref", "refs",
        "respectively", "obtained", "observed", "present", "presented", "reported", "based", "different",
        "various", "well", "high", "higher", "low", "lower", "new", "first", "second", "three", "total",
        "found", "furthermore", "moreover", "therefore", "indicate", "indicates", "indicated", "demonstrate",
        "demonstrated", "compared", "investigated", "performed", "proposed", "method", "methods", "data",
        "supplementary", "copyright", "elsevier", "rights", "reserved", "doi", "www", "http", "https"};
    return words;
}

bool term_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-';
}

}  // namespace

bool is_stopword(std::string_view term) { return stopwords().count(term) != 0; }

std::vector<std::string> keyword_terms(std::string_view t) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < t.size()) {
        while (i < t.size() && !term_char(t[i])) ++i;
        auto start = i;
        while (i < t.size() && term_char(t[i])) ++i;
        auto end = i;
        while (start < end && t[start] == '-') ++start;
        while (end > start && t[end - 1] == '-') --end;
        if (end - start < 3) continue;
        auto term = text::to_lower(t.substr(start, end - start));
        if (std::none_of(term.begin(), term.end(), [](char c) { return c >= 'a' && c <= 'z'; })) continue;
        if (is_stopword(term)) continue;
        out.push_back(std::move(term));
    }
    return out;
}

TermStats collect_term_stats(const std::vector<std::string>& texts) {
    TermStats stats;
    stats.documents = texts.size();
    for (const auto& t : texts) {
        const auto terms = keyword_terms(t);
        const std::set<std::string> unique(terms.begin(), terms.end());
        for (const auto& term : unique) ++stats.document_frequency[term];
    }
    return stats;
}

KeywordResult extract_keywords(std::string_view text, std::size_t k, const TermStats* stats) {
    if (k == 0) throw std::invalid_argument("extract_keywords: k must be >= 1");
    std::map<std::string, double> tf;
    for (auto& term : keyword_terms(text)) tf[std::move(term)] += 1.0;

    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(tf.size());
    for (const auto& [term, count] : tf) {
        double idf = 1.0;
        if (stats) {
            const auto it = stats->document_frequency.find(term);
            const double df = it == stats->document_frequency.end() ? 0.0 : static_cast<double>(it->second);
            idf = std::log((1.0 + static_cast<double>(stats->documents)) / (1.0 + df)) + 1.0;
        }
        scored.emplace_back(term, count * idf);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    KeywordResult result;
    result.fewer_than_requested = scored.size() < k;
    for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) result.keywords.push_back(scored[i].first);
    return result;
}

namespace {

struct Marker {
    char kind = 0;  // 'Q' or 'A'
    int number = 0;
    std::string rest;
};

// `Q12: text`, case-insensitive letter, optional spaces before the colon.
std::optional<Marker> read_marker(std::string_view line) {
    auto s = line;
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    if (s.size() < 3) return std::nullopt;
    char kind = s[0];
    if (kind == 'q') kind = 'Q';
    if (kind == 'a') kind = 'A';
    if (kind != 'Q' && kind != 'A') return std::nullopt;
    std::size_t i = 1;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    if (i == 1 || i - 1 > 6) return std::nullopt;
    const int number = std::stoi(std::string(s.substr(1, i - 1)));
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size() || s[i] != ':') return std::nullopt;
    return Marker{kind, number, std::string(s.substr(i + 1))};
}

struct Block {
    char kind;
    int number;
    std::size_t line;
    std::string text;
};

}  // namespace

QaParse parse_qa(std::string_view completion, std::string_view source_doc) {
    QaParse out;
    std::vector<Block> blocks;
    std::size_t line_no = 0;
    for (auto line : text::split(completion, '\n')) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (auto m = read_marker(line)) {
            blocks.push_back({m->kind, m->number, line_no, m->rest});
        } else if (!blocks.empty()) {
            blocks.back().text += '\n';
            blocks.back().text += line;
        } else if (!text::trim_view(line).empty()) {
            out.diagnostics.push_back({line_no, "stray-text", std::string(line)});
        }
    }

    for (std::size_t i = 0; i < blocks.size(); ++i) {
        auto& b = blocks[i];
        b.text = text::trim(b.text);
        if (b.kind == 'A') {
            out.diagnostics.push_back({b.line, "orphan-answer", b.text});
            continue;
        }
        if (i + 1 >= blocks.size() || blocks[i + 1].kind != 'A') {
            out.diagnostics.push_back({b.line, "unanswered-question", b.text});
            continue;
        }
        auto& a = blocks[i + 1];
        a.text = text::trim(a.text);
        ++i;
        if (a.number != b.number) {
            out.diagnostics.push_back({b.line, "ordinal-mismatch",
                                       "Q" + std::to_string(b.number) + " answered by A" + std::to_string(a.number)});
            continue;
        }
        if (b.text.empty()) {
            out.diagnostics.push_back({b.line, "empty-question", ""});
            continue;
        }
        if (a.text.empty()) {
            out.diagnostics.push_back({a.line, "empty-answer", b.text});
            continue;
        }
        if (b.text.back() != '?') {
            out.diagnostics.push_back({b.line, "question-without-question-mark", b.text});
            continue;
        }
        out.pairs.push_back({b.text, a.text, b.number, std::string(source_doc)});
    }

    std::set<int> seen;
    bool collision = false;
    for (const auto& p : out.pairs) collision = collision || !seen.insert(p.ordinal).second;
    if (collision) {
        for (std::size_t i = 0; i < out.pairs.size(); ++i) out.pairs[i].ordinal = static_cast<int>(i + 1);
        out.diagnostics.push_back({0, "renumbered", "duplicate ordinals renumbered 1.." + std::to_string(out.pairs.size())});
    }
    return out;
}

std::string serialize_qa(const std::vector<QAPair>& pairs) {
    std::string out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i) out += "\n\n";
        const auto n = std::to_string(pairs[i].ordinal);
        out += "Q" + n + ": " + pairs[i].question + "\nA" + n + ": " + pairs[i].answer;
    }
    return out;
}

InstructionRecord to_instruction_record(const SigTrainingExample& ex) {
    return {ex.instruction, ex.input, ex.output, "sig_generator", ex.source_doc};
}

std::vector<InstructionRecord> qa_to_instructions(const std::vector<QAPair>& pairs) {
    std::vector<InstructionRecord> out;
    out.reserve(pairs.size());
    for (const auto& p : pairs) out.push_back({p.question, "", p.answer, "sig_qa", p.source_doc});
    return out;
}

std::vector<llm::ChatRequest> paper_requests(const corpus::PaperDocument& paper, const SigOptions& options,
                                             const TermStats* stats, std::string* prompt_out) {
    const auto kw = extract_keywords(paper.title + "\n" + paper.body, options.keywords, stats);
    if (kw.keywords.empty()) {
        throw std::invalid_argument("paper `" + paper.id + "` yields no keywords");
    }
    const auto prompt = render_prompt({kw.keywords, options.n_pairs, options.constraints});
    if (prompt_out) *prompt_out = prompt;

    const auto prompt_tokens = chunker::count_tokens(prompt);
    if (options.budget <= prompt_tokens + 2) {
        throw std::invalid_argument("budget " + std::to_string(options.budget) + " leaves no room after the " +
                                    std::to_string(prompt_tokens) + "-token prompt");
    }
    const auto chunks = chunker::chunk(paper.id, paper.body, options.budget - prompt_tokens);
    std::vector<llm::ChatRequest> reqs;
    reqs.reserve(chunks.size());
    for (const auto& c : chunks) {
        llm::ChatRequest r;
        r.model_name = options.model_name;
        r.temperature = options.temperature;
        r.max_output_tokens = options.max_output_tokens;
        r.messages.push_back({llm::Role::user, prompt + "\n\n" + c.text});
        reqs.push_back(std::move(r));
    }
    return reqs;
}

SeedSetResult build_seed_set(const std::vector<corpus::PaperDocument>& papers, llm::Gateway& gateway,
                             const SigOptions& options, const TermStats* stats) {
    struct Slot {
        std::optional<SigTrainingExample> example;
        std::optional<std::string> failure;
        std::vector<ParseDiagnostic> diagnostics;
    };
    std::vector<Slot> slots(papers.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < papers.size(); i = next++) {
            const auto& paper = papers[i];
            auto& slot = slots[i];
            try {
                std::string prompt;
                const auto reqs = paper_requests(paper, options, stats, &prompt);
                std::string merged;
                for (const auto& r : reqs) {
                    const auto resp = gateway.complete(r);
                    if (!merged.empty()) merged += "\n\n";
                    merged += resp.content;
                }
                auto parsed = parse_qa(merged, paper.id);
                slot.diagnostics = std::move(parsed.diagnostics);
                SigTrainingExample ex;
                ex.instruction = prompt;
                ex.input = paper.body;
                ex.output = serialize_qa(parsed.pairs);
                ex.source_doc = paper.id;
                ex.pairs = std::move(parsed.pairs);
                slot.example = std::move(ex);
            } catch (const std::exception& e) {
                slot.failure = e.what();
            }
        }
    };
    const auto n = std::min(std::max<std::size_t>(options.max_in_flight, 1), papers.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    SeedSetResult result;
    for (std::size_t i = 0; i < papers.size(); ++i) {
        auto& slot = slots[i];
        for (auto& d : slot.diagnostics) result.diagnostics.push_back({papers[i].id, std::move(d)});
        if (slot.failure) {
            result.failures.push_back({papers[i].id, *slot.failure});
        } else if (slot.example->pairs.empty()) {
            result.zero_pair_papers.push_back(papers[i].id);
        } else {
            result.examples.push_back(std::move(*slot.example));
        }
    }
    return result;
}

SeedPartition select_seeds(const std::vector<corpus::PaperDocument>& papers, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("seed fraction must lie in [0, 1]");
    std::size_t count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(papers.size()) + 0.5));
    if (fraction > 0.0 && count == 0 && !papers.empty()) count = 1;
    std::vector<std::size_t> idx(papers.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng::Rng rng(seed);
    rng.shuffle(idx);
    std::vector<bool> is_seed(papers.size(), false);
    for (std::size_t i = 0; i < count; ++i) is_seed[idx[i]] = true;
    SeedPartition out;
    for (std::size_t i = 0; i < papers.size(); ++i) (is_seed[i] ? out.seeds : out.training).push_back(papers[i]);
    return out;
}

SeedPartition select_seeds(const std::vector<corpus::PaperDocument>& papers, const std::vector<std::string>& ids) {
    std::set<std::string> wanted(ids.begin(), ids.end());
    std::set<std::string> known;
    for (const auto& p : papers) known.insert(p.id);
    for (const auto& id : wanted) {
        if (!known.count(id)) throw std::invalid_argument("seed id `" + id + "` is not in the corpus");
    }
    SeedPartition out;
    for (const auto& p : papers) (wanted.count(p.id) ? out.seeds : out.training).push_back(p);
    return out;
}

nlohmann::ordered_json to_json(const PaperDiagnostic& d) {
    nlohmann::ordered_json j;
    j["paper_id"] = d.paper_id;
    j["line"] = d.diagnostic.line;
    j["kind"] = d.diagnostic.kind;
    j["text"] = d.diagnostic.text;
    return j;
}

}  // namespace sciforge::sig
