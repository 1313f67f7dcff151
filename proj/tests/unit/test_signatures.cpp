#include "ctrkit/signatures.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "ctrkit/errors.hpp"
#include "generators.hpp"
#include "oracles.hpp"

namespace ctrkit {
namespace {

Token tok(std::string lemma, TokenKind kind = TokenKind::kWord) {
  Token t;
  t.surface = lemma;
  t.lemma = std::move(lemma);
  t.kind = kind;
  return t;
}

FrequencyTable table(const std::map<std::string, std::int64_t>& counts) {
  FrequencyTable t;
  for (const auto& [term, count] : counts) t.add(term, count);
  return t;
}

const KeynessResult& find(const std::vector<KeynessResult>& rows, std::string_view term) {
  for (const auto& r : rows) {
    if (r.term == term) return r;
  }
  throw std::runtime_error("missing term " + std::string(term));
}

const KindFilter kAllKinds{TokenKind::kWord, TokenKind::kNounCandidate, TokenKind::kEntityCandidate,
                           TokenKind::kHashtag};

TEST(FrequencyTable, CountsLemmas) {
  std::vector<Token> tokens{tok("wuhan"), tok("wuhan"), tok("quagmire")};
  auto t = build_frequency_table(tokens, kAllKinds, "2022-03");
  EXPECT_EQ(t.count("wuhan"), 2);
  EXPECT_EQ(t.count("quagmire"), 1);
  EXPECT_EQ(t.count("absent"), 0);
  EXPECT_EQ(t.total(), 3);
  EXPECT_EQ(t.slice_tag(), "2022-03");
}

TEST(FrequencyTable, EmptyStream) {
  auto t = build_frequency_table({}, kAllKinds);
  EXPECT_TRUE(t.empty());
  EXPECT_EQ(t.total(), 0);
  EXPECT_EQ(t.vocabulary_size(), 0u);
}

TEST(FrequencyTable, KindFilter) {
  std::vector<Token> tokens{tok("wuhan"), tok("wuhan", TokenKind::kHashtag),
                            tok("lab", TokenKind::kNounCandidate)};
  auto t = build_frequency_table(tokens, {TokenKind::kHashtag});
  EXPECT_EQ(t.total(), 1);
  EXPECT_EQ(t.count("wuhan"), 1);
  EXPECT_EQ(t.count("lab"), 0);
}

TEST(FrequencyTable, ZeroAddStoresNothingAndNegativeRejected) {
  FrequencyTable t;
  t.add("x", 0);
  EXPECT_EQ(t.vocabulary_size(), 0u);
  EXPECT_THROW(t.add("x", -1), Error);
}

TEST(FrequencyTable, SubtractGivesRestOfCorpus) {
  auto all = table({{"a", 5}, {"b", 3}});
  auto slice = table({{"a", 2}, {"b", 3}});
  auto rest = rest_of_corpus(all, slice);
  EXPECT_EQ(rest.count("a"), 3);
  EXPECT_EQ(rest.count("b"), 0);
  EXPECT_EQ(rest.vocabulary_size(), 1u);
  EXPECT_EQ(rest.total(), 3);
  EXPECT_THROW(slice.subtract(all), DomainError);
}

TEST(FrequencyTable, MergeIsAssociativeAndCommutative) {
  gen::Rng rng(7);
  auto vocab = gen::vocabulary(rng, 40);
  for (int round = 0; round < 50; ++round) {
    auto a = table(gen::frequency_map(rng, vocab, 200));
    auto b = table(gen::frequency_map(rng, vocab, 200));
    auto c = table(gen::frequency_map(rng, vocab, 200));
    FrequencyTable ab = a;
    ab.merge(b);
    FrequencyTable ba = b;
    ba.merge(a);
    EXPECT_EQ(ab, ba);
    FrequencyTable ab_c = ab;
    ab_c.merge(c);
    FrequencyTable bc = b;
    bc.merge(c);
    FrequencyTable a_bc = a;
    a_bc.merge(bc);
    EXPECT_EQ(ab_c, a_bc);
    EXPECT_EQ(ab_c.total(), a.total() + b.total() + c.total());
  }
}

TEST(LogRatio, PlainRatios) {
  EXPECT_DOUBLE_EQ(log_ratio_value(4, 100, 1, 100), 2.0);
  EXPECT_DOUBLE_EQ(log_ratio_value(3, 300, 1, 100), 0.0);
  EXPECT_DOUBLE_EQ(log_ratio_value(1, 100, 4, 100), -2.0);
}

TEST(LogRatio, SmoothedZeroReference) {
  // (8/100) / (0.5/200) = 32
  double expected = std::log2((8.0 / 100.0) / (0.5 / 200.0));
  EXPECT_DOUBLE_EQ(expected, 5.0);
  EXPECT_DOUBLE_EQ(log_ratio_value(8, 100, 0, 200), 5.0);

  auto rows = log_ratio(table({{"x", 8}, {"y", 92}}), table({{"y", 200}}), 1);
  const auto& x = find(rows, "x");
  EXPECT_DOUBLE_EQ(x.log_ratio, 5.0);
  EXPECT_TRUE(x.smoothed);
  EXPECT_EQ(x.f_reference, 0);
  EXPECT_EQ(x.n_reference, 200);
  EXPECT_FALSE(find(rows, "y").smoothed);
}

TEST(LogRatio, MinFreqFilters) {
  auto target = table({{"common", 10}, {"rare", 2}});
  auto reference = table({{"common", 5}, {"rare", 1}});
  auto rows = log_ratio(target, reference, 5);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].term, "common");
}

TEST(LogRatio, EmptyTablesRejected) {
  auto some = table({{"a", 1}});
  EXPECT_THROW(log_ratio(FrequencyTable{}, some, 0), DomainError);
  EXPECT_THROW(log_ratio(some, FrequencyTable{}, 0), DomainError);
  EXPECT_THROW(top_n_keyness(FrequencyTable{}, some, 3), DomainError);
}

TEST(LogRatio, TiesBrokenByTargetFrequencyThenTerm) {
  // All three have ratio 1 relative to the reference.
  auto target = table({{"b", 2}, {"a", 2}, {"c", 4}});
  auto reference = table({{"a", 2}, {"b", 2}, {"c", 4}});
  auto rows = log_ratio(target, reference, 0);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].term, "c");
  EXPECT_EQ(rows[1].term, "a");
  EXPECT_EQ(rows[2].term, "b");
}

TEST(LogRatio, NearlyEqualRatiosOrderedExactly) {
  // 1000001/1000000 vs 1000000/999999: close enough to collide in naive double
  // subtraction, still distinct as fractions.
  auto target = table({{"p", 1000001}, {"q", 1000000}});
  auto reference = table({{"p", 1000000}, {"q", 999999}});
  auto rows = log_ratio(target, reference, 0);
  auto expected = oracle::keyness({{"p", 1000001}, {"q", 1000000}}, {{"p", 1000000}, {"q", 999999}}, 0);
  ASSERT_EQ(rows.size(), expected.size());
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].term, expected[i].term);
}

TEST(TopN, PrefixAndShortVocabulary) {
  auto target = table({{"a", 10}, {"b", 8}, {"c", 6}, {"d", 5}});
  auto reference = table({{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4}});
  auto all = log_ratio(target, reference);
  auto top = top_n_keyness(target, reference, 3);
  ASSERT_EQ(top.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(top[i].term, all[i].term);
  EXPECT_GE(top[0].log_ratio, top[1].log_ratio);
  EXPECT_GE(top[1].log_ratio, top[2].log_ratio);
  EXPECT_EQ(top_n_keyness(target, reference, 100).size(), 4u);
  EXPECT_TRUE(top_n_keyness(target, reference, 0).empty());
}

TEST(TopN, PlantedTermRanksFirst) {
  gen::Rng rng(11);
  auto vocab = gen::vocabulary(rng, 300);
  auto ref_counts = gen::frequency_map(rng, vocab, 20000);
  auto tgt_counts = ref_counts;
  // Same shape as the reference, plus one term at ten times its share.
  std::string planted = "plantedterm";
  ref_counts[planted] = 20;
  tgt_counts[planted] = 200;
  auto rows = top_n_keyness(table(tgt_counts), table(ref_counts), 5, 5);
  auto expected = oracle::keyness(tgt_counts, ref_counts, 5);
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows[0].term, planted);
  EXPECT_EQ(expected[0].term, planted);
}

TEST(LogRatioProperty, MatchesOracle) {
  gen::Rng rng(2023);
  for (int round = 0; round < 40; ++round) {
    auto vocab = gen::vocabulary(rng, static_cast<std::size_t>(rng.between(5, 300)));
    auto t = gen::frequency_map(rng, vocab, 5000);
    auto r = gen::frequency_map(rng, vocab, 5000);
    std::int64_t min_freq = rng.between(0, 6);
    auto got = log_ratio(table(t), table(r), min_freq);
    auto want = oracle::keyness(t, r, min_freq == 0 ? 1 : min_freq);
    if (min_freq == 0) {
      // Reference-only rows exist only at min_freq 0; the oracle leaves them out.
      std::erase_if(got, [](const KeynessResult& k) { return k.f_target == 0; });
    }
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      ASSERT_EQ(got[i].term, want[i].term) << "round " << round << " rank " << i;
      EXPECT_NEAR(got[i].log_ratio, static_cast<double>(want[i].score),
                  1e-9 * std::max(1.0, std::fabs(static_cast<double>(want[i].score))));
    }
  }
}

TEST(LogRatioProperty, AntisymmetryScaleAndDoubling) {
  gen::Rng rng(99);
  for (int round = 0; round < 300; ++round) {
    std::int64_t f_t = rng.between(1, 10000), n_t = f_t + rng.between(0, 100000);
    std::int64_t f_r = rng.between(1, 10000), n_r = f_r + rng.between(0, 100000);
    double ab = log_ratio_value(f_t, n_t, f_r, n_r);
    double ba = log_ratio_value(f_r, n_r, f_t, n_t);
    EXPECT_NEAR(ab, -ba, 1e-12);
    std::int64_t k = rng.between(2, 1000);
    EXPECT_NEAR(log_ratio_value(k * f_t, k * n_t, k * f_r, k * n_r), ab, 1e-12);
    EXPECT_NEAR(log_ratio_value(2 * f_t, n_t, f_r, n_r), ab + 1.0, 1e-12);
  }
}

TEST(LogRatio, CsvColumns) {
  auto rows = log_ratio(table({{"x", 8}, {"y", 92}}), table({{"y", 200}}), 1);
  auto csv = keyness_to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "term,score,f_target,f_reference,smoothed");
  EXPECT_NE(csv.find("\nx,5,8,0,true\n"), std::string::npos) << csv;
}

std::vector<Token> doc(std::initializer_list<const char*> lemmas,
                       TokenKind kind = TokenKind::kNounCandidate) {
  std::vector<Token> out;
  for (const char* l : lemmas) out.push_back(tok(l, kind));
  return out;
}

TEST(Tfidf, UbiquitousTermScoresZero) {
  std::vector<std::vector<Token>> docs{doc({"vaccine", "lab"}), doc({"vaccine"}), doc({"vaccine", "mask"})};
  auto rows = tfidf_rank(docs, TermKindFilter::kNoun, 10);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows.back().term, "vaccine");
  EXPECT_EQ(rows.back().score, 0.0);
  EXPECT_EQ(rows.back().df, 3);
}

TEST(Tfidf, ThreeOccurrencesInOneOfTen) {
  std::vector<std::vector<Token>> docs(10, doc({"filler"}));
  docs[4] = doc({"filler", "quagmire", "quagmire", "quagmire"});
  auto rows = tfidf_rank(docs, TermKindFilter::kNoun, 1);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].term, "quagmire");
  EXPECT_EQ(rows[0].tf_total, 3);
  EXPECT_EQ(rows[0].df, 1);
  EXPECT_NEAR(rows[0].score, 3.0 * std::log(10.0), 1e-12);
  EXPECT_NEAR(rows[0].score, 6.907755, 1e-6);
}

TEST(Tfidf, KindFilter) {
  std::vector<std::vector<Token>> docs{doc({"lab"}), doc({"hitler"}, TokenKind::kEntityCandidate),
                                       doc({"the"}, TokenKind::kWord)};
  auto nouns = tfidf_rank(docs, TermKindFilter::kNoun, 10);
  ASSERT_EQ(nouns.size(), 1u);
  EXPECT_EQ(nouns[0].term, "lab");
  EXPECT_EQ(nouns[0].term_kind, TermKindFilter::kNoun);
  auto entities = tfidf_rank(docs, TermKindFilter::kEntity, 10);
  ASSERT_EQ(entities.size(), 1u);
  EXPECT_EQ(entities[0].term, "hitler");
  EXPECT_EQ(tfidf_rank(docs, TermKindFilter::kAny, 10).size(), 3u);
}

TEST(Tfidf, ZeroDocumentsRejected) {
  std::vector<std::vector<Token>> none;
  EXPECT_THROW(tfidf_rank(none, TermKindFilter::kAny, 5), DomainError);
}

TEST(Tfidf, TiesByDfThenTerm) {
  // b: tf 2 in one doc of 4 -> 2 ln 4; a, c: tf 1 in each of two docs -> 2 ln 2.
  std::vector<std::vector<Token>> docs{doc({"a", "c", "b", "b"}), doc({"a", "c"}), doc({"z"}), doc({"z"})};
  auto rows = tfidf_rank(docs, TermKindFilter::kNoun, 10);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].term, "b");
  EXPECT_EQ(rows[1].term, "a");
  EXPECT_EQ(rows[2].term, "c");
  EXPECT_EQ(rows[3].term, "z");
}

TEST(TfidfProperty, MonotoneInTfAndDf) {
  auto score_of = [](const std::vector<std::vector<Token>>& docs, const std::string& term) {
    for (const auto& r : tfidf_rank(docs, TermKindFilter::kNoun, 1000)) {
      if (r.term == term) return r.score;
    }
    return -1.0;
  };
  std::vector<std::vector<Token>> base(8, doc({"pad"}));
  base[0] = doc({"t"});
  base[1] = doc({"t"});
  double s = score_of(base, "t");
  auto more_tf = base;
  more_tf[0].push_back(tok("t", TokenKind::kNounCandidate));
  EXPECT_GT(score_of(more_tf, "t"), s);
  auto wider_more = more_tf;
  wider_more[2] = doc({"t"});
  wider_more[0] = doc({"t"});
  // tf_total 3 at df 3 vs tf_total 3 at df 2.
  EXPECT_LT(score_of(wider_more, "t"), score_of(more_tf, "t"));
}

TEST(TfidfProperty, MatchesOracle) {
  gen::Rng rng(5150);
  for (int round = 0; round < 30; ++round) {
    auto vocab = gen::vocabulary(rng, static_cast<std::size_t>(rng.between(3, 200)));
    std::vector<std::vector<Token>> docs(static_cast<std::size_t>(rng.between(1, 150)));
    for (auto& d : docs) {
      auto n = rng.between(0, 25);
      for (std::int64_t i = 0; i < n; ++i) {
        d.push_back(tok(rng.pick(vocab), rng.chance(0.7) ? TokenKind::kNounCandidate : TokenKind::kWord));
      }
    }
    auto got = tfidf_rank(docs, TermKindFilter::kNoun, 30);
    auto want = oracle::tfidf(docs, TokenKind::kNounCandidate);
    ASSERT_EQ(got.size(), std::min<std::size_t>(30, want.size()));
    for (std::size_t i = 0; i < got.size(); ++i) {
      ASSERT_EQ(got[i].term, want[i].term) << "round " << round << " rank " << i;
      EXPECT_NEAR(got[i].score, static_cast<double>(want[i].score),
                  1e-9 * std::max(1.0, static_cast<double>(want[i].score)));
      EXPECT_EQ(got[i].df, want[i].df);
      EXPECT_GE(got[i].score, 0.0);
    }
  }
}

TEST(TermKind, Parse) {
  EXPECT_EQ(parse_term_kind("noun"), TermKindFilter::kNoun);
  EXPECT_EQ(parse_term_kind("entity"), TermKindFilter::kEntity);
  EXPECT_EQ(parse_term_kind("any"), TermKindFilter::kAny);
  EXPECT_FALSE(parse_term_kind("verb"));
  EXPECT_EQ(to_string(TermKindFilter::kEntity), "entity");
}

}  // namespace
}  // namespace ctrkit
