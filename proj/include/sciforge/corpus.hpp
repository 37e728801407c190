#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace sciforge::corpus {

namespace fs = std::filesystem;

struct PaperDocument {
    std::string id;
    std::string title;
    std::string body;
    std::vector<std::string> categories;
    std::optional<std::uint64_t> citation_count;
    std::string source_path;

    friend bool operator==(const PaperDocument&, const PaperDocument&) = default;
};

nlohmann::ordered_json to_json(const PaperDocument& doc);
PaperDocument document_from_json(const nlohmann::json& j);
void write_documents(const fs::path& path, const std::vector<PaperDocument>& docs);
std::vector<PaperDocument> read_documents(const fs::path& path);

class CorpusError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RowError {
    std::size_t row = 0;  // 1-based data row, header excluded
    std::string id;
    std::string message;
};

struct IngestResult {
    std::vector<PaperDocument> documents;
    std::vector<RowError> row_errors;
};

// Reads a manifest CSV with header `id,title,path,categories,citations`
// (categories `;`-separated, citations optional). Paths resolve against
// `root`. Unreadable or blank bodies become row errors; a repeated id throws
// CorpusError naming both rows.
IngestResult ingest_corpus(const fs::path& root, const fs::path& manifest);

class EmbeddingVector {
public:
    EmbeddingVector() = default;
    // Throws std::invalid_argument for empty or non-finite input.
    explicit EmbeddingVector(std::vector<double> values);

    std::size_t dim() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }
    double norm() const noexcept;

private:
    std::vector<double> values_;
};

// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws std::invalid_argument on a
// dimension mismatch or a zero-norm argument.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Raised by providers; `index` is the first text the failure concerns.
class EmbeddingError : public std::runtime_error {
public:
    EmbeddingError(std::size_t index, const std::string& what, std::size_t count = 1)
        : std::runtime_error(what), index_(index), count_(count) {}
    std::size_t index() const noexcept { return index_; }
    // How many consecutive texts, starting at index(), the failure covers.
    std::size_t count() const noexcept { return count_; }

private:
    std::size_t index_;
    std::size_t count_;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    // One vector per text, in order. Implementations throw on failure.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

// Word-unigram TF-IDF with smoothed idf, fit on the texts it is asked to embed.
// Vocabulary is sorted, so dimensions are deterministic.
class TfidfEmbedder final : public EmbeddingProvider {
public:
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
};

struct EmbeddingServiceConfig {
    std::string endpoint;  // e.g. http://localhost:8080/v1/embeddings
    std::string model;
    std::string api_key;
    std::size_t batch_size = 16;
    std::size_t max_in_flight = 4;
    int timeout_seconds = 60;
};

// Client for services that accept {"model", "input": [...]} and answer
// {"data": [{"embedding": [...]}, ...]}.
class EmbeddingServiceClient final : public EmbeddingProvider {
public:
    explicit EmbeddingServiceClient(EmbeddingServiceConfig config);
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

private:
    EmbeddingServiceConfig config_;
};

// Which part of a paper is compared during dedup.
enum class DedupScope { body, lead, title };
std::optional<DedupScope> parse_scope(std::string_view name);
// `lead` is the first paragraph of the body, a stand-in for the abstract.
std::string dedup_text(const PaperDocument& doc, DedupScope scope);

struct Removal {
    std::string removed_id;
    std::string kept_id;
    double similarity = 0.0;
};

struct DedupReport {
    std::vector<std::string> kept;
    std::vector<Removal> removed;
    double threshold = 0.95;
};

nlohmann::ordered_json to_json(const DedupReport& report);

constexpr double kDefaultDedupThreshold = 0.95;

// Scan order: citation_count descending (absent counts as 0), ties by id
// ascending. A paper is removed when its similarity to some already-kept
// paper is >= threshold; the report names the most similar kept paper.
DedupReport dedup(const std::vector<PaperDocument>& papers,
                  const std::function<double(std::size_t, std::size_t)>& similarity, double threshold);

DedupReport dedup(const std::vector<PaperDocument>& papers, const std::vector<EmbeddingVector>& embeddings,
                  double threshold);

// Embeds every paper (scope-selected text) then runs the greedy scan.
// Provider failures are rethrown as CorpusError naming the paper.
DedupReport dedup(const std::vector<PaperDocument>& papers, EmbeddingProvider& provider, double threshold,
                  DedupScope scope = DedupScope::body);

}  // namespace sciforge::corpus
