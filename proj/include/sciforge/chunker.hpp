#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sciforge::chunker {

// Appended, after one space, to every chunk except the last.
inline constexpr std::string_view kContinuationMarker = "[TBC]";
// Desk-scale default: roughly 2,048 subword tokens expressed in whitespace tokens.
inline constexpr std::size_t kDefaultBudget = 1400;

// A whitespace-delimited span of the text and what it costs in tokens.
struct Piece {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t cost = 0;
};

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::string name() const = 0;
    // Pieces in text order. Text between pieces is whitespace and costs nothing.
    virtual std::vector<Piece> pieces(std::string_view text) const = 0;
    std::size_t count(std::string_view text) const;
};

// One token per maximal run of non-whitespace bytes.
class WhitespaceTokenizer final : public Tokenizer {
public:
    std::string name() const override { return "whitespace"; }
    std::vector<Piece> pieces(std::string_view text) const override;
};

// Approximates subword tokenizers: each whitespace word costs
// ceil(bytes / bytes_per_token) tokens.
class ByteRatioTokenizer final : public Tokenizer {
public:
    explicit ByteRatioTokenizer(std::size_t bytes_per_token = 4);
    std::string name() const override;
    std::vector<Piece> pieces(std::string_view text) const override;

private:
    std::size_t bytes_per_token_;
};

std::unique_ptr<Tokenizer> make_tokenizer(std::string_view scheme);

std::size_t count_tokens(std::string_view text);

struct Chunk {
    std::string doc_id;
    std::size_t index = 0;
    std::string text;  // emitted form: non-final chunks end with " [TBC]"
    std::size_t token_count = 0;
    bool is_last = false;

    friend bool operator==(const Chunk&, const Chunk&) = default;
};

nlohmann::ordered_json to_json(const Chunk& c);
Chunk chunk_from_json(const nlohmann::json& j);

class ChunkError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Splits `body` into the fewest chunks whose token counts (marker included)
// fit `budget`. Within that count, each split lands on the latest paragraph
// break available, else the latest sentence end, else the latest whitespace.
// Throws ChunkError for a blank body or a piece too large to place;
// std::invalid_argument when budget <= marker overhead + 1.
std::vector<Chunk> chunk(std::string_view doc_id, std::string_view body, std::size_t budget,
                         const Tokenizer& tokenizer);
std::vector<Chunk> chunk(std::string_view doc_id, std::string_view body, std::size_t budget);

// Inverse of chunk(). Throws ChunkError on gaps, mixed documents or a missing marker.
std::string reassemble(const std::vector<Chunk>& chunks);

}  // namespace sciforge::chunker
