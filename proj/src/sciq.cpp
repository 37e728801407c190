#include "sciforge/sciq.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "sciforge/util/io.hpp"
#include "sciforge/util/rng.hpp"
#include "sciforge/util/text.hpp"

namespace sciforge::sciq {

std::optional<std::string> check(const SciqRecord& r) {
    if (text::trim_view(r.question).empty()) return "empty question";
    if (r.correct_index < 0 || r.correct_index > 3) return "correct_index out of range";
    std::set<std::string> seen;
    for (const auto& o : r.options) {
        const auto t = text::trim(o);
        if (t.empty()) return "empty option";
        if (!seen.insert(t).second) return "duplicate option `" + t + "`";
    }
    return std::nullopt;
}

LoadResult from_json(const nlohmann::json& array) {
    if (!array.is_array()) throw std::invalid_argument("SciQ input must be a JSON array");
    LoadResult out;
    for (std::size_t i = 0; i < array.size(); ++i) {
        const auto& j = array[i];
        try {
            SciqRecord r;
            r.question = j.at("question").get<std::string>();
            r.support = j.value("support", "");
            if (j.contains("options")) {
                const auto opts = j.at("options").get<std::vector<std::string>>();
                if (opts.size() != 4) throw std::invalid_argument("expected 4 options");
                std::copy(opts.begin(), opts.end(), r.options.begin());
                r.correct_index = j.at("correct_index").get<int>();
            } else {
                r.options = {j.at("distractor1").get<std::string>(), j.at("distractor2").get<std::string>(),
                             j.at("distractor3").get<std::string>(), j.at("correct_answer").get<std::string>()};
                r.correct_index = 3;
            }
            if (auto err = check(r)) throw std::invalid_argument(*err);
            out.records.push_back(std::move(r));
            out.raw.push_back(j);
        } catch (const std::exception& e) {
            out.errors.push_back({i, e.what()});
        }
    }
    return out;
}

LoadResult load(const std::filesystem::path& path) { return from_json(nlohmann::json::parse(io::read_file(path))); }

std::string to_string(Pattern p) {
    switch (p) {
        case Pattern::open_book_single: return "open_book_single";
        case Pattern::closed_book_explained: return "closed_book_explained";
        case Pattern::multi_turn: return "multi_turn";
    }
    return "open_book_single";
}

MixRatio parse_mix(std::string_view s) {
    const auto parts = text::split(s, ':');
    if (parts.size() != 3) throw std::invalid_argument("mix ratio must look like a:b:c, got `" + std::string(s) + "`");
    std::array<double, 3> v{};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto x = text::parse_double(parts[i]);
        if (!x || *x < 0.0) throw std::invalid_argument("mix ratio entries must be nonnegative numbers");
        v[i] = *x;
    }
    return {v[0], v[1], v[2]};
}

char option_letter(int index) { return static_cast<char>('A' + index); }

std::string lettered_options(const SciqRecord& r) {
    std::string out;
    for (int i = 0; i < 4; ++i) {
        if (i) out += ' ';
        out += '(';
        out += option_letter(i);
        out += ") ";
        out += r.options[static_cast<std::size_t>(i)];
    }
    return out;
}

std::string answer_line(const SciqRecord& r) {
    std::string out = "(";
    out += option_letter(r.correct_index);
    out += ") ";
    const auto& ans = r.options[static_cast<std::size_t>(r.correct_index)];
    out += ans;
    if (ans.empty() || (ans.back() != '.' && ans.back() != '!' && ans.back() != '?')) out += '.';
    return out;
}

InstructionRecord render(const SciqRecord& r, Pattern p, const RenderOptions& options, std::string_view source) {
    InstructionRecord rec;
    rec.task = "sciq";
    rec.source = std::string(source);
    const auto block = r.question + " " + lettered_options(r);
    const bool has_support = !text::trim_view(r.support).empty();
    if (!has_support) p = Pattern::open_book_single;
    switch (p) {
        case Pattern::open_book_single:
            rec.instruction = std::string(kOpenBookInstruction);
            rec.input = has_support ? r.support + "\n Question: " + block : "Question: " + block;
            rec.output = answer_line(r);
            break;
        case Pattern::closed_book_explained:
            rec.instruction = std::string(kClosedBookPrefix) + block;
            rec.input = r.support;
            rec.output = answer_line(r);
            if (options.explanation_in_output) rec.output += " " + r.support;
            break;
        case Pattern::multi_turn:
            rec.instruction = std::string(kDialoguePrefix) + block + " <bot>: " + answer_line(r) + " " +
                              std::string(kDialogueFollowUp);
            rec.input = "";
            rec.output = r.support;
            break;
    }
    return rec;
}

std::vector<Pattern> assign_patterns(const std::vector<SciqRecord>& records, const MixRatio& mix, std::uint64_t seed) {
    const std::array<double, 3> w = {mix.open_book, mix.closed_book, mix.multi_turn};
    double sum = 0.0;
    for (double x : w) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("mix ratios must be finite and >= 0");
        sum += x;
    }
    if (sum <= 0.0) throw std::invalid_argument("mix ratios are all zero");

    const std::size_t n = records.size();
    std::array<std::size_t, 3> quota{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double exact = w[k] / sum * static_cast<double>(n);
        quota[k] = static_cast<std::size_t>(std::floor(exact));
        frac[k] = exact - static_cast<double>(quota[k]);
        assigned += quota[k];
    }
    while (assigned < n) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < 3; ++k) {
            if (frac[k] > frac[best]) best = k;
        }
        ++quota[best];
        frac[best] = -1.0;
        ++assigned;
    }

    std::vector<Pattern> out;
    out.reserve(n);
    for (std::size_t k = 0; k < 3; ++k) out.insert(out.end(), quota[k], static_cast<Pattern>(k));
    rng::Rng rng(seed);
    rng.shuffle(out);
    for (std::size_t i = 0; i < n; ++i) {
        if (text::trim_view(records[i].support).empty()) out[i] = Pattern::open_book_single;
    }
    return out;
}

BuildResult build_sciq_instructions(const std::vector<SciqRecord>& records, const BuildOptions& options) {
    BuildResult result;
    const auto patterns = assign_patterns(records, options.mix, options.seed);
    // Separate stream so option shuffling does not perturb pattern assignment.
    rng::Rng option_rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
    for (std::size_t i = 0; i < records.size(); ++i) {
        SciqRecord r = records[i];
        if (options.shuffle_options) {
            std::vector<int> perm = {0, 1, 2, 3};
            option_rng.shuffle(perm);
            SciqRecord shuffled = r;
            for (int k = 0; k < 4; ++k) {
                shuffled.options[static_cast<std::size_t>(k)] = r.options[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
                if (perm[static_cast<std::size_t>(k)] == r.correct_index) shuffled.correct_index = k;
            }
            r = std::move(shuffled);
        }
        if (auto err = check(r)) {
            result.errors.push_back({i, *err});
            continue;
        }
        result.records.push_back(render(r, patterns[i], options.render, "sciq:" + std::to_string(i)));
        result.patterns.push_back(text::trim_view(r.support).empty() ? Pattern::open_book_single : patterns[i]);
    }
    return result;
}

SplitIndices split_train_test(std::size_t n, std::size_t test_size, std::uint64_t seed) {
    if (test_size == 0) throw std::invalid_argument("test_size must be positive");
    if (test_size >= n) {
        throw std::invalid_argument("test_size " + std::to_string(test_size) + " must be smaller than the " +
                                    std::to_string(n) + " records");
    }
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng::Rng rng(seed);
    rng.shuffle(idx);
    std::vector<bool> in_test(n, false);
    for (std::size_t i = 0; i < test_size; ++i) in_test[idx[i]] = true;
    SplitIndices out;
    out.test.reserve(test_size);
    out.train.reserve(n - test_size);
    for (std::size_t i = 0; i < n; ++i) (in_test[i] ? out.test : out.train).push_back(i);
    return out;
}

}  // namespace sciforge::sciq
