#include "sciforge/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "sciforge/util/csv.hpp"
#include "sciforge/util/http.hpp"
#include "sciforge/util/io.hpp"
#include "sciforge/util/text.hpp"

namespace sciforge::corpus {

nlohmann::ordered_json to_json(const PaperDocument& doc) {
    nlohmann::ordered_json j;
    j["id"] = doc.id;
    j["title"] = doc.title;
    j["categories"] = doc.categories;
    if (doc.citation_count) j["citation_count"] = *doc.citation_count;
    else j["citation_count"] = nullptr;
    j["source_path"] = doc.source_path;
    j["body"] = doc.body;
    return j;
}

PaperDocument document_from_json(const nlohmann::json& j) {
    PaperDocument d;
    d.id = j.at("id").get<std::string>();
    d.title = j.value("title", "");
    d.body = j.at("body").get<std::string>();
    if (j.contains("categories")) d.categories = j["categories"].get<std::vector<std::string>>();
    if (j.contains("citation_count") && !j["citation_count"].is_null()) {
        d.citation_count = j["citation_count"].get<std::uint64_t>();
    }
    d.source_path = j.value("source_path", "");
    return d;
}

void write_documents(const fs::path& path, const std::vector<PaperDocument>& docs) {
    std::string out;
    for (const auto& d : docs) {
        out += to_json(d).dump();
        out += '\n';
    }
    io::write_file(path, out);
}

std::vector<PaperDocument> read_documents(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorpusError("cannot open " + path.string());
    std::vector<PaperDocument> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim_view(line).empty()) continue;
        try {
            docs.push_back(document_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw CorpusError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return docs;
}

IngestResult ingest_corpus(const fs::path& root, const fs::path& manifest) {
    const auto table = csv::parse(io::read_file(manifest));
    const std::vector<std::string> required = {"id", "title", "path", "categories", "citations"};
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < table.header.size(); ++i) col[text::trim(table.header[i])] = i;
    for (const auto& name : required) {
        if (!col.count(name)) throw CorpusError(manifest.string() + ": manifest header lacks column `" + name + "`");
    }

    IngestResult result;
    std::unordered_map<std::string, std::size_t> first_row;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t row_no = r + 1;
        auto cell = [&](const std::string& name) -> std::string {
            const auto i = col[name];
            return i < row.size() ? text::trim(row[i]) : std::string{};
        };
        PaperDocument doc;
        doc.id = cell("id");
        if (doc.id.empty()) {
            result.row_errors.push_back({row_no, "", "empty id"});
            continue;
        }
        const auto [it, inserted] = first_row.emplace(doc.id, row_no);
        if (!inserted) {
            throw CorpusError("duplicate id `" + doc.id + "` on rows " + std::to_string(it->second) + " and " +
                              std::to_string(row_no));
        }
        doc.title = cell("title");
        doc.source_path = cell("path");
        for (auto& c : text::split(cell("categories"), ';')) {
            auto t = text::trim(c);
            if (!t.empty()) doc.categories.push_back(std::move(t));
        }
        const auto cites = cell("citations");
        if (!cites.empty()) {
            const auto n = text::parse_int(cites);
            if (!n || *n < 0) {
                result.row_errors.push_back({row_no, doc.id, "citations is not a nonnegative integer: " + cites});
                continue;
            }
            doc.citation_count = static_cast<std::uint64_t>(*n);
        }
        const auto file = root / doc.source_path;
        if (doc.source_path.empty() || !fs::is_regular_file(file)) {
            result.row_errors.push_back({row_no, doc.id, "missing file " + file.string()});
            continue;
        }
        try {
            doc.body = io::read_file(file);
        } catch (const std::exception& e) {
            result.row_errors.push_back({row_no, doc.id, e.what()});
            continue;
        }
        if (text::trim_view(doc.body).empty()) {
            result.row_errors.push_back({row_no, doc.id, "empty body in " + file.string()});
            continue;
        }
        result.documents.push_back(std::move(doc));
    }
    return result;
}

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("embedding must have positive dimension");
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("embedding has a non-finite entry");
    }
}

double EmbeddingVector::norm() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("cosine_similarity: dimension mismatch " + std::to_string(a.dim()) + " vs " +
                                    std::to_string(b.dim()));
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine_similarity: undefined for a zero-norm vector");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values()[i] * b.values()[i];
    return std::clamp(dot / (na * nb), -1.0, 1.0);
}

namespace {

bool word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || u >= 0x80;
}

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && !word_char(s[i])) ++i;
        const auto start = i;
        while (i < s.size() && word_char(s[i])) ++i;
        if (i > start) out.push_back(text::to_lower(s.substr(start, i - start)));
    }
    return out;
}

}  // namespace

std::vector<EmbeddingVector> TfidfEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<std::map<std::string, double>> tf(texts.size());
    std::map<std::string, std::size_t> df;
    for (std::size_t d = 0; d < texts.size(); ++d) {
        for (auto& w : words(texts[d])) tf[d][std::move(w)] += 1.0;
        for (const auto& [w, _] : tf[d]) ++df[w];
    }
    std::map<std::string, std::size_t> index;
    for (const auto& [w, _] : df) index.emplace(w, index.size());
    const double n = static_cast<double>(texts.size());
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t d = 0; d < texts.size(); ++d) {
        std::vector<double> v(std::max<std::size_t>(index.size(), 1), 0.0);
        for (const auto& [w, count] : tf[d]) {
            const double idf = std::log((1.0 + n) / (1.0 + static_cast<double>(df[w]))) + 1.0;
            v[index[w]] = count * idf;
        }
        out.emplace_back(std::move(v));
    }
    return out;
}

EmbeddingServiceClient::EmbeddingServiceClient(EmbeddingServiceConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw std::invalid_argument("embedding service endpoint is empty");
    if (config_.batch_size == 0) config_.batch_size = 1;
    if (config_.max_in_flight == 0) config_.max_in_flight = 1;
}

std::vector<EmbeddingVector> EmbeddingServiceClient::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out(texts.size());
    const std::size_t batches = (texts.size() + config_.batch_size - 1) / config_.batch_size;
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::string first_error;
    std::size_t first_error_batch = batches;

    auto worker = [&] {
        for (std::size_t b = next++; b < batches; b = next++) {
            const auto lo = b * config_.batch_size;
            const auto hi = std::min(texts.size(), lo + config_.batch_size);
            nlohmann::json req;
            req["model"] = config_.model;
            req["input"] = std::vector<std::string>(texts.begin() + lo, texts.begin() + hi);
            http::Headers headers;
            if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);
            std::string error;
            try {
                const auto res = http::post_json(config_.endpoint, req.dump(), headers, config_.timeout_seconds);
                if (!res.transport_ok) {
                    error = "transport: " + res.error;
                } else if (res.status != 200) {
                    error = "HTTP " + std::to_string(res.status);
                } else {
                    const auto j = nlohmann::json::parse(res.body);
                    const auto& data = j.at("data");
                    if (data.size() != hi - lo) error = "service returned wrong number of embeddings";
                    for (std::size_t k = 0; error.empty() && k < data.size(); ++k) {
                        out[lo + k] = EmbeddingVector(data[k].at("embedding").get<std::vector<double>>());
                    }
                }
            } catch (const std::exception& e) {
                error = e.what();
            }
            if (!error.empty()) {
                std::lock_guard lock(err_mutex);
                if (b < first_error_batch) {
                    first_error_batch = b;
                    first_error = "embedding request for texts [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + ") failed: " + error;
                }
            }
        }
    };
    std::vector<std::thread> pool;
    const auto workers = std::min(config_.max_in_flight, std::max<std::size_t>(batches, 1));
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error_batch < batches) {
        const auto lo = first_error_batch * config_.batch_size;
        throw EmbeddingError(lo, first_error, std::min(config_.batch_size, texts.size() - lo));
    }
    return out;
}

std::optional<DedupScope> parse_scope(std::string_view name) {
    if (name == "body") return DedupScope::body;
    if (name == "lead") return DedupScope::lead;
    if (name == "title") return DedupScope::title;
    return std::nullopt;
}

std::string dedup_text(const PaperDocument& doc, DedupScope scope) {
    switch (scope) {
        case DedupScope::body: return doc.body;
        case DedupScope::title: return doc.title;
        case DedupScope::lead: {
            const auto body = text::trim_view(doc.body);
            auto end = body.find("\n\n");
            const auto crlf = body.find("\r\n\r\n");
            if (crlf < end) end = crlf;
            return std::string(body.substr(0, end));
        }
    }
    return doc.body;
}

nlohmann::ordered_json to_json(const DedupReport& report) {
    nlohmann::ordered_json j;
    j["threshold"] = report.threshold;
    j["kept"] = report.kept;
    auto removed = nlohmann::ordered_json::array();
    for (const auto& r : report.removed) {
        removed.push_back({{"removed_id", r.removed_id}, {"kept_id", r.kept_id}, {"similarity", r.similarity}});
    }
    j["removed"] = std::move(removed);
    return j;
}

DedupReport dedup(const std::vector<PaperDocument>& papers,
                  const std::function<double(std::size_t, std::size_t)>& similarity, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("dedup threshold must lie in (0, 1]");
    }
    std::vector<std::size_t> order(papers.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ca = papers[a].citation_count.value_or(0);
        const auto cb = papers[b].citation_count.value_or(0);
        if (ca != cb) return ca > cb;
        return papers[a].id < papers[b].id;
    });

    DedupReport report;
    report.threshold = threshold;
    std::vector<std::size_t> kept;
    for (const auto i : order) {
        std::optional<std::size_t> best;
        double best_sim = 0.0;
        for (const auto k : kept) {
            const double s = similarity(i, k);
            if (s >= threshold && (!best || s > best_sim)) {
                best = k;
                best_sim = s;
            }
        }
        if (best) {
            report.removed.push_back({papers[i].id, papers[*best].id, best_sim});
        } else {
            kept.push_back(i);
            report.kept.push_back(papers[i].id);
        }
    }
    return report;
}

DedupReport dedup(const std::vector<PaperDocument>& papers, const std::vector<EmbeddingVector>& embeddings,
                  double threshold) {
    if (embeddings.size() != papers.size()) {
        throw std::invalid_argument("dedup: " + std::to_string(embeddings.size()) + " embeddings for " +
                                    std::to_string(papers.size()) + " papers");
    }
    for (std::size_t i = 0; i < papers.size(); ++i) {
        if (embeddings[i].dim() != embeddings.front().dim()) {
            throw CorpusError("embedding dimension differs for paper `" + papers[i].id + "`");
        }
        if (embeddings[i].norm() == 0.0) {
            throw CorpusError("zero-norm embedding for paper `" + papers[i].id + "`");
        }
    }
    return dedup(
        papers, [&](std::size_t a, std::size_t b) { return cosine_similarity(embeddings[a], embeddings[b]); },
        threshold);
}

DedupReport dedup(const std::vector<PaperDocument>& papers, EmbeddingProvider& provider, double threshold,
                  DedupScope scope) {
    std::vector<std::string> texts;
    texts.reserve(papers.size());
    for (const auto& p : papers) texts.push_back(dedup_text(p, scope));
    std::vector<EmbeddingVector> embeddings;
    try {
        embeddings = provider.embed(texts);
    } catch (const EmbeddingError& e) {
        std::vector<std::string> ids;
        for (std::size_t i = e.index(); i < papers.size() && i < e.index() + e.count(); ++i) ids.push_back(papers[i].id);
        const auto which = ids.empty() ? std::string("?") : text::join(ids, "`, `");
        throw CorpusError("embedding failed for paper `" + which + "`: " + e.what());
    } catch (const std::invalid_argument& e) {
        throw CorpusError(std::string("embedding failed: ") + e.what());
    }
    if (embeddings.size() != papers.size()) {
        throw CorpusError("embedding provider returned " + std::to_string(embeddings.size()) + " vectors for " +
                          std::to_string(papers.size()) + " papers");
    }
    return dedup(papers, embeddings, threshold);
}

}  // namespace sciforge::corpus
