#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "sciforge/evaluator.hpp"
#include "sciforge/util/io.hpp"

using namespace sciforge::eval;

namespace {

std::vector<ParsedAnswer> parse_all(const std::vector<std::string>& raw, AnswerKind kind) {
    std::vector<ParsedAnswer> out;
    for (const auto& r : raw) out.push_back(parse_answer(r, kind));
    return out;
}

}  // namespace

TEST(ParseAnswer, BooleanFromSentence) {
    const auto a = parse_answer("Yes, Cr20Ni61P19 has glass-forming ability.", AnswerKind::boolean);
    ASSERT_EQ(a.kind, AnswerKind::boolean);
    EXPECT_TRUE(a.truth);
    EXPECT_FALSE(parse_answer("No, In5AgTe8 is not metal.", AnswerKind::boolean).truth);
    EXPECT_EQ(parse_answer("  \"yes\" it is", AnswerKind::boolean).kind, AnswerKind::boolean);
    EXPECT_EQ(parse_answer("Nobody knows", AnswerKind::boolean).kind, AnswerKind::unparsed);
    EXPECT_EQ(parse_answer("", AnswerKind::boolean).kind, AnswerKind::unparsed);
}

TEST(ParseAnswer, NumberTakesFirstToken) {
    auto a = parse_answer("-3.8", AnswerKind::number);
    ASSERT_EQ(a.kind, AnswerKind::number);
    EXPECT_DOUBLE_EQ(a.number, -3.8);
    a = parse_answer("about 7.762471166286911e-05 mol/L, maybe 3", AnswerKind::number);
    EXPECT_DOUBLE_EQ(a.number, 7.762471166286911e-05);
    EXPECT_EQ(a.number_text, "7.762471166286911e-05");
    a = parse_answer("value .5", AnswerKind::number);
    EXPECT_DOUBLE_EQ(a.number, 0.5);
    a = parse_answer("2e", AnswerKind::number);
    EXPECT_DOUBLE_EQ(a.number, 2.0);
    EXPECT_EQ(parse_answer("no digits here", AnswerKind::number).kind, AnswerKind::unparsed);
}

TEST(ParseAnswer, ChoiceLetterAndText) {
    const auto a = parse_answer("(D) oxidants.", AnswerKind::choice);
    ASSERT_EQ(a.kind, AnswerKind::choice);
    EXPECT_EQ(a.letter, 'D');
    EXPECT_EQ(a.choice_text, "oxidants");
    EXPECT_EQ(parse_answer("the answer is (b)  Anti   Oxidants. Because", AnswerKind::choice).choice_text,
              "anti oxidants");
    EXPECT_EQ(parse_answer("(E) nothing", AnswerKind::choice).kind, AnswerKind::unparsed);
}

TEST(ParseAnswer, LabelIsNormalized) {
    const auto a = parse_answer("  FCC \n", AnswerKind::label);
    ASSERT_EQ(a.kind, AnswerKind::label);
    EXPECT_EQ(a.label, "fcc");
    EXPECT_EQ(parse_answer("   ", AnswerKind::label).kind, AnswerKind::unparsed);
}

TEST(Accuracy, StrictAndLenient) {
    const auto gold = parse_all({"(A) x.", "(B) y.", "(C) z."}, AnswerKind::choice);
    const auto preds = parse_all({"(A) x.", "(B) wrong text.", "garbage"}, AnswerKind::choice);
    const auto strict = accuracy(gold, preds);
    EXPECT_DOUBLE_EQ(strict.value, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(*strict.lenient_value, 2.0 / 3.0);
    EXPECT_EQ(strict.unparsed_count, 1u);
    EXPECT_DOUBLE_EQ(accuracy(gold, preds, AccuracyMode::lenient).value, 2.0 / 3.0);
}

TEST(Accuracy, SevenOfTen) {
    std::vector<std::string> g, p;
    for (int i = 0; i < 10; ++i) {
        g.push_back("(A) item " + std::to_string(i) + ".");
        p.push_back(i < 7 ? g.back() : "(B) item.");
    }
    EXPECT_DOUBLE_EQ(accuracy(parse_all(g, AnswerKind::choice), parse_all(p, AnswerKind::choice)).value, 0.7);
}

TEST(F1Binary, HandExamples) {
    const auto preds = parse_all({"Yes", "No", "No", "Yes"}, AnswerKind::boolean);
    EXPECT_DOUBLE_EQ(f1_binary({true, true, false, false}, preds).value, 0.5);
    EXPECT_DOUBLE_EQ(f1_binary({true, false}, parse_all({"Yes", "No"}, AnswerKind::boolean)).value, 1.0);
    const auto none = f1_binary({false, false}, parse_all({"No", "No"}, AnswerKind::boolean));
    EXPECT_DOUBLE_EQ(none.value, 0.0);
    ASSERT_FALSE(none.notes.empty());
    EXPECT_EQ(none.notes.front(), "no positive instances");
}

TEST(F1Binary, UnparsedIsNegative) {
    const auto r = f1_binary({true, false}, parse_all({"maybe", "maybe"}, AnswerKind::boolean));
    EXPECT_EQ(r.unparsed_count, 2u);
    EXPECT_DOUBLE_EQ(r.value, 0.0);
    // With "no" as the positive class an unparsed prediction is a "yes".
    const auto flipped = f1_binary({false, true}, parse_all({"No", "junk"}, AnswerKind::boolean), false);
    EXPECT_DOUBLE_EQ(flipped.value, 1.0);
}

TEST(F1Macro, HandExample) {
    const auto preds = parse_all({"a", "b", "b", "c"}, AnswerKind::label);
    EXPECT_NEAR(f1_macro({"a", "a", "b", "c"}, preds).value, 0.7778, 1e-4);
    EXPECT_DOUBLE_EQ(f1_macro({"x", "x"}, parse_all({"x", "x"}, AnswerKind::label)).value, 1.0);
}

TEST(F1Macro, TwoClassEqualsMeanOfBinary) {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> gold_l;
        std::vector<bool> gold_b;
        std::vector<std::string> pred_raw;
        const int n = 2 + static_cast<int>(gen() % 15);
        for (int i = 0; i < n; ++i) {
            const bool g = gen() % 2;
            const bool p = gen() % 2;
            gold_l.push_back(g ? "yes" : "no");
            gold_b.push_back(g);
            pred_raw.push_back(p ? "yes" : "no");
        }
        if (std::count(gold_b.begin(), gold_b.end(), true) == 0 ||
            std::count(gold_b.begin(), gold_b.end(), false) == 0) {
            continue;
        }
        const double macro = f1_macro(gold_l, parse_all(pred_raw, AnswerKind::label)).value;
        const auto bp = parse_all(pred_raw, AnswerKind::boolean);
        const double mean = (f1_binary(gold_b, bp, true).value + f1_binary(gold_b, bp, false).value) / 2.0;
        EXPECT_NEAR(macro, mean, 1e-9);
    }
}

TEST(Mae, Examples) {
    EXPECT_DOUBLE_EQ(mae({1, 2, 3}, parse_all({"2", "2", "5"}, AnswerKind::number)).value, 1.0);
    EXPECT_DOUBLE_EQ(mae({1, 2}, parse_all({"1", "2"}, AnswerKind::number)).value, 0.0);
    const auto r = mae({1, 2, 3}, parse_all({"1", "n/a", "4"}, AnswerKind::number));
    EXPECT_DOUBLE_EQ(r.value, 0.5);
    EXPECT_EQ(r.unparsed_count, 1u);
    EXPECT_EQ(*r.included, 2u);
    EXPECT_THROW(mae({1}, parse_all({"?"}, AnswerKind::number)), EvalError);
}

TEST(Mae, PenaltyPolicy) {
    // Gold spread is 2, so the unparsed prediction costs 2.
    const auto r = mae({1, 2, 3}, parse_all({"1", "n/a", "3"}, AnswerKind::number), UnparsedPolicy::penalty);
    EXPECT_DOUBLE_EQ(r.value, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(mae({1, 2}, parse_all({"?", "2"}, AnswerKind::number), UnparsedPolicy::penalty, 10.0).value,
                     5.0);
}

TEST(Mae, ScalesWithConstant) {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(-100, 100);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> g, p;
        for (int i = 0; i < 10; ++i) {
            g.push_back(u(gen));
            p.push_back(u(gen));
        }
        const double c = u(gen);
        auto as_answers = [](const std::vector<double>& xs) {
            std::vector<ParsedAnswer> out;
            for (double x : xs) {
                ParsedAnswer a;
                a.kind = AnswerKind::number;
                a.number = x;
                out.push_back(a);
            }
            return out;
        };
        std::vector<double> gc, pc;
        for (double x : g) gc.push_back(c * x);
        for (double x : p) pc.push_back(c * x);
        const double base = mae(g, as_answers(p)).value;
        EXPECT_NEAR(mae(gc, as_answers(pc)).value, std::abs(c) * base, 1e-9 * std::max(1.0, std::abs(c) * base));
        EXPECT_GE(base, 0.0);
    }
}

TEST(Metrics, PermutationInvariant) {
    std::vector<std::string> g = {"(A) a.", "(B) b.", "(C) c.", "(D) d."};
    std::vector<std::string> p = {"(A) a.", "(C) b.", "(C) c.", "x"};
    const double before = accuracy(parse_all(g, AnswerKind::choice), parse_all(p, AnswerKind::choice)).value;
    std::reverse(g.begin(), g.end());
    std::reverse(p.begin(), p.end());
    EXPECT_DOUBLE_EQ(accuracy(parse_all(g, AnswerKind::choice), parse_all(p, AnswerKind::choice)).value, before);
}

TEST(Metrics, LengthMismatchThrows) {
    EXPECT_THROW(accuracy(parse_all({"(A) a"}, AnswerKind::choice), {}), EvalError);
    EXPECT_THROW(f1_macro({}, {}), EvalError);
}

TEST(Align, IdMismatchesAreReported) {
    std::vector<GoldRecord> gold = {{"1", "Yes", "t"}, {"2", "No", "t"}};
    EXPECT_THROW(align(gold, {{"1", "Yes"}}), EvalError);
    EXPECT_THROW(align(gold, {{"1", "Yes"}, {"2", "No"}, {"3", "No"}}), EvalError);
    EXPECT_THROW(align(gold, {{"1", "Yes"}, {"1", "No"}}), EvalError);
    const auto a = align(gold, {{"2", "No"}, {"1", "Yes"}});
    ASSERT_EQ(a.predicted.size(), 2u);
    EXPECT_EQ(a.predicted[0], "Yes");
}

TEST(InferMetric, FromGoldOutputs) {
    EXPECT_EQ(infer_metric({"(A) x.", "(B) y."}), Metric::accuracy);
    EXPECT_EQ(infer_metric({"Yes, a is b.", "No, c is not d."}), Metric::f1_binary);
    EXPECT_EQ(infer_metric({"-3.8", "1040.4"}), Metric::mae);
    EXPECT_EQ(infer_metric({"fcc", "bcc"}), Metric::f1_macro);
}

TEST(Evaluate, FilesGroupByTask) {
    sciforge::testing::TempDir dir("eval");
    sciforge::io::write_file(dir / "gold.jsonl",
                             "{\"instruction\":\"q\",\"input\":\"\",\"output\":\"-3.8\",\"task\":\"esol\"}\n"
                             "{\"instruction\":\"q\",\"input\":\"\",\"output\":\"Yes, A is metal.\",\"task\":\"m\"}\n"
                             "{\"instruction\":\"q\",\"input\":\"\",\"output\":\"-1.0\",\"task\":\"esol\"}\n");
    sciforge::io::write_file(dir / "pred.jsonl",
                             "{\"record_id\":1,\"output\":\"-3.3\"}\n"
                             "{\"record_id\":\"2\",\"output\":\"Yes\"}\n"
                             "{\"record_id\":3,\"output\":\"The value is -2.0\"}\n");
    const auto reports = evaluate(load_gold(dir / "gold.jsonl"), load_predictions(dir / "pred.jsonl"));
    ASSERT_EQ(reports.size(), 2u);
    EXPECT_EQ(reports[0].task, "esol");
    EXPECT_EQ(reports[0].metric, Metric::mae);
    EXPECT_NEAR(reports[0].value, 0.75, 1e-12);
    EXPECT_EQ(reports[1].metric, Metric::f1_binary);
    EXPECT_DOUBLE_EQ(reports[1].value, 1.0);
    EXPECT_NE(format_table(reports).find("esol"), std::string::npos);
}

TEST(Evaluate, GoldIdFieldWins) {
    sciforge::testing::TempDir dir("eval-id");
    sciforge::io::write_file(dir / "gold.jsonl",
                             "{\"id\":\"q-7\",\"instruction\":\"q\",\"output\":\"fcc\"}\n");
    const auto gold = load_gold(dir / "gold.jsonl");
    ASSERT_EQ(gold.size(), 1u);
    EXPECT_EQ(gold[0].record_id, "q-7");
}
