#include "sciforge/chunker.hpp"

#include <limits>

#include "sciforge/util/text.hpp"

namespace sciforge::chunker {

std::size_t Tokenizer::count(std::string_view text) const {
    std::size_t n = 0;
    for (const auto& p : pieces(text)) n += p.cost;
    return n;
}

std::vector<Piece> WhitespaceTokenizer::pieces(std::string_view t) const {
    std::vector<Piece> out;
    std::size_t i = 0;
    while (i < t.size()) {
        while (i < t.size() && text::is_space(t[i])) ++i;
        const auto start = i;
        while (i < t.size() && !text::is_space(t[i])) ++i;
        if (i > start) out.push_back({start, i, 1});
    }
    return out;
}

ByteRatioTokenizer::ByteRatioTokenizer(std::size_t bytes_per_token) : bytes_per_token_(bytes_per_token) {
    if (bytes_per_token_ == 0) throw std::invalid_argument("bytes_per_token must be positive");
}

std::string ByteRatioTokenizer::name() const { return "bytes/" + std::to_string(bytes_per_token_); }

std::vector<Piece> ByteRatioTokenizer::pieces(std::string_view t) const {
    auto out = WhitespaceTokenizer{}.pieces(t);
    for (auto& p : out) p.cost = (p.end - p.begin + bytes_per_token_ - 1) / bytes_per_token_;
    return out;
}

std::unique_ptr<Tokenizer> make_tokenizer(std::string_view scheme) {
    if (scheme == "whitespace") return std::make_unique<WhitespaceTokenizer>();
    if (scheme.rfind("bytes/", 0) == 0) {
        const auto n = text::parse_int(scheme.substr(6));
        if (n && *n > 0) return std::make_unique<ByteRatioTokenizer>(static_cast<std::size_t>(*n));
    }
    throw std::invalid_argument("unknown tokenizer scheme `" + std::string(scheme) + "`");
}

std::size_t count_tokens(std::string_view text) { return WhitespaceTokenizer{}.count(text); }

nlohmann::ordered_json to_json(const Chunk& c) {
    nlohmann::ordered_json j;
    j["doc_id"] = c.doc_id;
    j["index"] = c.index;
    j["text"] = c.text;
    j["token_count"] = c.token_count;
    j["is_last"] = c.is_last;
    return j;
}

Chunk chunk_from_json(const nlohmann::json& j) {
    return Chunk{j.at("doc_id").get<std::string>(), j.at("index").get<std::size_t>(),
                 j.at("text").get<std::string>(), j.at("token_count").get<std::size_t>(),
                 j.at("is_last").get<bool>()};
}

namespace {

constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();

bool paragraph_break(std::string_view body, const Piece& before, const Piece& after) {
    std::size_t newlines = 0;
    for (auto i = before.end; i < after.begin; ++i) {
        if (body[i] == '\n') ++newlines;
    }
    return newlines >= 2;
}

bool sentence_end(std::string_view body, const Piece& p) {
    auto e = p.end;
    while (e > p.begin && (body[e - 1] == '"' || body[e - 1] == '\'' || body[e - 1] == ')')) --e;
    if (e == p.begin) return false;
    const char c = body[e - 1];
    return c == '.' || c == '!' || c == '?';
}

std::string excerpt(std::string_view body, const Piece& p) {
    const auto len = std::min<std::size_t>(p.end - p.begin, 40);
    std::string s(body.substr(p.begin, len));
    if (p.end - p.begin > len) s += "...";
    return s;
}

}  // namespace

std::vector<Chunk> chunk(std::string_view doc_id, std::string_view body, std::size_t budget,
                         const Tokenizer& tokenizer) {
    const std::string marker = " " + std::string(kContinuationMarker);
    const std::size_t overhead = tokenizer.count(kContinuationMarker);
    if (budget <= overhead + 1) {
        throw std::invalid_argument("chunk budget " + std::to_string(budget) + " must exceed marker overhead " +
                                    std::to_string(overhead) + " + 1");
    }
    if (text::trim_view(body).empty()) {
        throw ChunkError("document `" + std::string(doc_id) + "` has an empty body");
    }

    const auto pieces = tokenizer.pieces(body);
    const std::size_t m = pieces.size();
    std::vector<std::size_t> prefix(m + 1, 0);
    for (std::size_t i = 0; i < m; ++i) prefix[i + 1] = prefix[i] + pieces[i].cost;
    const std::size_t total = prefix[m];

    if (total <= budget) {
        return {Chunk{std::string(doc_id), 0, std::string(body), total, true}};
    }

    const std::size_t cap = budget - overhead;
    // far[j]: one past the last piece a non-final chunk starting at j can hold.
    std::vector<std::size_t> far(m + 1, 0);
    {
        std::size_t k = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (k < j) k = j;
            while (k < m && prefix[k + 1] - prefix[j] <= cap) ++k;
            far[j] = k;
        }
        far[m] = m;
    }
    // fewest[j]: minimum number of chunks covering pieces j..m-1.
    std::vector<std::size_t> fewest(m + 1, kInf);
    fewest[m] = 0;
    for (std::size_t j = m; j-- > 0;) {
        if (total - prefix[j] <= budget) {
            fewest[j] = 1;
        } else if (far[j] > j && fewest[far[j]] != kInf) {
            fewest[j] = 1 + fewest[far[j]];
        }
    }
    if (fewest[0] == kInf) {
        for (const auto& p : pieces) {
            if (p.cost > cap) {
                throw ChunkError("document `" + std::string(doc_id) + "`: span [" + std::to_string(p.begin) +
                                 ", " + std::to_string(p.end) + ") `" + excerpt(body, p) + "` costs " +
                                 std::to_string(p.cost) + " tokens, more than a chunk can hold (" +
                                 std::to_string(cap) + ")");
            }
        }
        throw ChunkError("document `" + std::string(doc_id) + "` cannot be chunked at budget " +
                         std::to_string(budget));
    }

    std::vector<Chunk> out;
    std::size_t i = 0;
    std::size_t seg_start = 0;
    std::size_t remaining = fewest[0];
    while (remaining > 1) {
        const std::size_t hi = far[i];
        std::size_t lo = hi;
        while (lo - 1 > i && fewest[lo - 1] <= remaining - 1) --lo;

        std::size_t split = 0;
        for (std::size_t k = hi; k >= lo && split == 0; --k) {
            if (k < m && paragraph_break(body, pieces[k - 1], pieces[k])) split = k;
        }
        for (std::size_t k = hi; k >= lo && split == 0; --k) {
            if (sentence_end(body, pieces[k - 1])) split = k;
        }
        if (split == 0) split = hi;

        const auto seg_end = pieces[split - 1].end;
        Chunk c;
        c.doc_id = std::string(doc_id);
        c.index = out.size();
        c.text = std::string(body.substr(seg_start, seg_end - seg_start)) + marker;
        c.token_count = prefix[split] - prefix[i] + overhead;
        c.is_last = false;
        out.push_back(std::move(c));
        seg_start = seg_end;
        i = split;
        --remaining;
    }
    out.push_back(Chunk{std::string(doc_id), out.size(), std::string(body.substr(seg_start)),
                        total - prefix[i], true});
    return out;
}

std::vector<Chunk> chunk(std::string_view doc_id, std::string_view body, std::size_t budget) {
    return chunk(doc_id, body, budget, WhitespaceTokenizer{});
}

std::string reassemble(const std::vector<Chunk>& chunks) {
    if (chunks.empty()) throw ChunkError("reassemble: no chunks");
    const std::string marker = " " + std::string(kContinuationMarker);
    std::string out;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const auto& c = chunks[i];
        if (c.doc_id != chunks.front().doc_id) {
            throw ChunkError("reassemble: mixed documents `" + chunks.front().doc_id + "` and `" + c.doc_id + "`");
        }
        if (c.index != i) {
            throw ChunkError("reassemble: expected chunk index " + std::to_string(i) + ", found " +
                             std::to_string(c.index));
        }
        const bool last = i + 1 == chunks.size();
        if (c.is_last != last) {
            throw ChunkError("reassemble: chunk " + std::to_string(i) + " has is_last=" +
                             (c.is_last ? "true" : "false"));
        }
        if (last) {
            out += c.text;
        } else {
            if (c.text.size() < marker.size() ||
                c.text.compare(c.text.size() - marker.size(), marker.size(), marker) != 0) {
                throw ChunkError("reassemble: chunk " + std::to_string(i) + " lacks the continuation marker");
            }
            out.append(c.text, 0, c.text.size() - marker.size());
        }
    }
    return out;
}

}  // namespace sciforge::chunker
