#include "ctrkit/preprocess.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <regex>

#include "ctrkit/errors.hpp"
#include "generators.hpp"

namespace ctrkit {
namespace {

std::vector<std::string> surfaces(const std::vector<Token>& tokens, TokenKind kind) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (t.kind == kind) out.push_back(t.surface);
  }
  return out;
}

std::vector<std::string> lemmas(const std::vector<Token>& tokens, TokenKind kind) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (t.kind == kind) out.push_back(t.lemma);
  }
  return out;
}

const Token* find_lemma(const std::vector<Token>& tokens, std::string_view lemma) {
  auto it = std::find_if(tokens.begin(), tokens.end(), [&](const Token& t) { return t.lemma == lemma; });
  return it == tokens.end() ? nullptr : &*it;
}

TEST(Tokenize, DropsInteriorNonAlphabetic) {
  auto tokens = tokenize("The WUHAN lab-leak!! #wuhan");
  EXPECT_EQ(surfaces(tokens, TokenKind::kWord), (std::vector<std::string>{"The", "WUHAN"}));
  EXPECT_EQ(lemmas(tokens, TokenKind::kHashtag), (std::vector<std::string>{"wuhan"}));
}

TEST(Tokenize, EmptyText) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("   \n\t ").empty());
}

TEST(Tokenize, DigitsDropped) {
  EXPECT_EQ(surfaces(tokenize("Adolf Hitler 1933"), TokenKind::kWord),
            (std::vector<std::string>{"Adolf", "Hitler"}));
}

TEST(Tokenize, PositionsIncreaseAndDroppedTokensLeaveGaps) {
  auto tokens = tokenize("alpha 42 beta gamma");
  ASSERT_EQ(tokens.size(), 3u);
  EXPECT_EQ(tokens[0].position, 0u);
  EXPECT_EQ(tokens[1].position, 2u);
  EXPECT_EQ(tokens[2].position, 3u);
}

TEST(Tokenize, StripsEdgePunctuation) {
  auto tokens = tokenize("\"Hello,\" (world)... it's");
  EXPECT_EQ(surfaces(tokens, TokenKind::kWord), (std::vector<std::string>{"Hello", "world"}));
  EXPECT_TRUE(tokens[0].break_after);
  EXPECT_TRUE(tokens[0].sentence_start);
  EXPECT_FALSE(tokens[1].sentence_start);
}

TEST(Tokenize, SentenceStartAfterTerminator) {
  auto tokens = tokenize("one two. Three four? five");
  ASSERT_EQ(tokens.size(), 5u);
  EXPECT_TRUE(tokens[0].sentence_start);
  EXPECT_TRUE(tokens[2].sentence_start);
  EXPECT_TRUE(tokens[4].sentence_start);
  EXPECT_FALSE(tokens[3].sentence_start);
}

TEST(Tokenize, HashtagInsideWord) {
  auto tokens = tokenize("foo#Bar baz");
  EXPECT_EQ(lemmas(tokens, TokenKind::kHashtag), (std::vector<std::string>{"bar"}));
  EXPECT_EQ(surfaces(tokens, TokenKind::kWord), (std::vector<std::string>{"foo", "baz"}));
  EXPECT_TRUE(lemmas(tokenize("# lonely"), TokenKind::kHashtag).empty());
}

TEST(Tokenize, UnicodeModes) {
  // "café" written with a combining accent normalizes to one code point.
  std::string decomposed = "cafe\xCC\x81 na\xC3\xAFve plain";
  EXPECT_EQ(surfaces(tokenize(decomposed), TokenKind::kWord), (std::vector<std::string>{"plain"}));
  auto unicode = tokenize(decomposed, {AlphabetMode::kUnicode});
  ASSERT_EQ(unicode.size(), 3u);
  EXPECT_EQ(unicode[0].surface, "caf\xC3\xA9");
  EXPECT_EQ(unicode[1].lemma, "na\xC3\xAFve");
  // Typographic quotes count as punctuation.
  EXPECT_EQ(surfaces(tokenize("\xE2\x80\x9Cquoted\xE2\x80\x9D"), TokenKind::kWord),
            (std::vector<std::string>{"quoted"}));
}

TEST(Tokenize, HashtagSupersetProperty) {
  gen::Rng rng(3);
  const std::regex tag_re("#([A-Za-z0-9_]+)");
  const std::string alphabet = "abcXYZ019_ #.,!-";
  for (int i = 0; i < 500; ++i) {
    std::string text;
    auto len = rng.between(0, 60);
    for (int k = 0; k < len; ++k) text.push_back(alphabet[static_cast<std::size_t>(rng.between(0, 15))]);
    auto tokens = tokenize(text);
    std::set<std::string> got;
    for (const auto& t : tokens) {
      if (t.kind == TokenKind::kHashtag) got.insert(t.lemma);
    }
    for (std::sregex_iterator it(text.begin(), text.end(), tag_re), end; it != end; ++it) {
      std::string tag = (*it)[1].str();
      std::transform(tag.begin(), tag.end(), tag.begin(), ::tolower);
      EXPECT_TRUE(got.contains(tag)) << text;
    }
    for (std::size_t k = 1; k < tokens.size(); ++k) EXPECT_LT(tokens[k - 1].position, tokens[k].position);
  }
}

TEST(ExtractHashtags, OrderedUniqueLowercase) {
  EXPECT_EQ(extract_hashtags("#MoronLabe and #wuhan #WUHAN #x_1 #"),
            (std::vector<std::string>{"moronlabe", "wuhan", "x_1"}));
  EXPECT_TRUE(extract_hashtags("no tags here").empty());
}

TEST(Stopwords, RemovesAndKeepsPositions) {
  auto list = StopwordList::parse("the\n");
  auto tokens = tokenize("the wuhan");
  auto kept = remove_stopwords(tokens, list);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].surface, "wuhan");
  EXPECT_EQ(kept[0].position, 1u);
}

TEST(Stopwords, EmptyListIsIdentity) {
  auto tokens = tokenize("The quick fox #the");
  EXPECT_EQ(remove_stopwords(tokens, StopwordList{}), tokens);
}

TEST(Stopwords, HashtagsNeverRemoved) {
  auto list = StopwordList::parse("the\n");
  auto kept = remove_stopwords(tokenize("#the the"), list);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].kind, TokenKind::kHashtag);
}

TEST(Stopwords, OutputIsSubsequence) {
  gen::Rng rng(8);
  auto words = gen::vocabulary(rng, 20, 1);
  std::set<std::string> stop(words.begin(), words.begin() + 8);
  StopwordList list(stop, "test");
  for (int trial = 0; trial < 100; ++trial) {
    std::string text;
    for (int k = 0; k < 30; ++k) text += rng.pick(words) + (rng.chance(0.1) ? " #tag " : " ");
    auto tokens = tokenize(text);
    auto kept = remove_stopwords(tokens, list);
    std::size_t j = 0;
    for (const auto& t : tokens) {
      if (j < kept.size() && kept[j] == t) ++j;
    }
    EXPECT_EQ(j, kept.size());
  }
}

TEST(Stopwords, ParseAndSourceTag) {
  auto list = StopwordList::parse("# source: demo-list\nThe\n  and \n\n# comment\n");
  EXPECT_EQ(list.source_tag(), "demo-list");
  EXPECT_EQ(list.size(), 2u);
  EXPECT_TRUE(list.contains("the"));
  EXPECT_TRUE(list.contains("and"));
  EXPECT_EQ(StopwordList::parse("a\n").source_tag(), "inline");
}

TEST(Stopwords, VendoredEnglishList) {
  const auto& list = StopwordList::english();
  EXPECT_GE(list.size(), 140u);
  EXPECT_LE(list.size(), 180u);
  EXPECT_EQ(list.source_tag(), "ctrkit-en-function-words-v1");
  for (const auto& w : list.words()) {
    EXPECT_FALSE(w.empty());
    EXPECT_EQ(w, [&] {
      std::string l = w;
      std::transform(l.begin(), l.end(), l.begin(), ::tolower);
      return l;
    }());
  }
  EXPECT_TRUE(list.contains("the"));
  EXPECT_FALSE(list.contains("wuhan"));
  EXPECT_THROW(StopwordList::load("/nonexistent/stop.txt"), IoError);
}

TEST(Lemma, SuffixRules) {
  EXPECT_EQ(lemma_of("theories"), "theory");
  EXPECT_EQ(lemma_of("landings"), "landing");
  EXPECT_EQ(lemma_of("govern"), "govern");
  EXPECT_EQ(lemma_of("boxes"), "box");
  EXPECT_EQ(lemma_of("churches"), "church");
  EXPECT_EQ(lemma_of("classes"), "class");
  EXPECT_EQ(lemma_of("running"), "run");
  EXPECT_EQ(lemma_of("hoping"), "hope");
  EXPECT_EQ(lemma_of("created"), "create");
  EXPECT_EQ(lemma_of("stopped"), "stop");
  EXPECT_EQ(lemma_of("falling"), "fall");
  EXPECT_EQ(lemma_of("agreed"), "agree");
  EXPECT_EQ(lemma_of("virus"), "virus");
  EXPECT_EQ(lemma_of("something"), "something");
}

TEST(Lemma, ExceptionsWin) {
  EXPECT_EQ(lemma_of("children"), "child");
  EXPECT_EQ(lemma_of("was"), "be");
  EXPECT_EQ(lemma_of("news"), "news");
  EXPECT_EQ(lemma_of("texas"), "texas");
  EXPECT_EQ(lemma_of("morning"), "morning");
}

TEST(Lemma, LemmatizeOnlyTouchesWords) {
  Token tag{.surface = "#Tags", .lemma = "tags", .kind = TokenKind::kHashtag};
  EXPECT_EQ(lemmatize(tag).lemma, "tags");
  Token word{.surface = "Killed", .lemma = "killed"};
  Token out = lemmatize(word);
  EXPECT_EQ(out.lemma, "kill");
  EXPECT_TRUE(out.past_form);
  EXPECT_FALSE(lemmatize(Token{.surface = "Kills"}).past_form);
  EXPECT_TRUE(lemmatize(Token{.surface = "Wanted"}).past_form);
}

TEST(Gazetteer, ParseFindAndErrors) {
  auto g = Gazetteer::parse("# people\nAdolf  Hitler\tadolf_hitler\njews\tjews\n");
  ASSERT_NE(g.find("adolf hitler"), nullptr);
  EXPECT_EQ(*g.find("adolf hitler"), "adolf_hitler");
  EXPECT_EQ(g.max_phrase_words(), 2u);
  EXPECT_EQ(g.find("hitler"), nullptr);
  EXPECT_THROW(Gazetteer::parse("no tab here\n"), ValidationError);
  EXPECT_THROW(Gazetteer::parse("phrase\tBad-Lemma\n"), ValidationError);
  EXPECT_THROW(Gazetteer::parse("\tlemma\n"), ValidationError);
}

TEST(Entities, GazetteerMatchInsideCapitalizedRun) {
  auto tokens = lemmatize_all(tokenize("the Ultimate GigaChad Adolf Hitler"));
  auto tagged = extract_nouns_entities(tokens, Gazetteer::english());
  auto entities = lemmas(tagged, TokenKind::kEntityCandidate);
  EXPECT_NE(std::find(entities.begin(), entities.end(), "adolf_hitler"), entities.end());
  EXPECT_NE(std::find(entities.begin(), entities.end(), "ultimate_gigachad"), entities.end());
}

TEST(Entities, SentenceInitialWordNeverStartsEntity) {
  auto tagged = Pipeline().analyze("The Moon is made of cheese. Tomorrow we leave.");
  EXPECT_EQ(find_lemma(tagged, "the"), nullptr);
  for (const auto& t : tagged) {
    if (t.kind == TokenKind::kEntityCandidate) {
      EXPECT_FALSE(t.sentence_start) << t.surface;
    }
  }
  const Token* tomorrow = find_lemma(tagged, "tomorrow");
  ASSERT_NE(tomorrow, nullptr);
  EXPECT_NE(tomorrow->kind, TokenKind::kEntityCandidate);
}

TEST(Entities, LowercaseGazetteerHit) {
  auto tagged = Pipeline().analyze("what do jews think");
  const Token* jews = find_lemma(tagged, "jews");
  ASSERT_NE(jews, nullptr);
  EXPECT_EQ(jews->kind, TokenKind::kEntityCandidate);
}

TEST(Entities, PunctuationBreaksRuns) {
  auto tagged = Pipeline().analyze("we met Alice, Bob and Carol Danvers");
  auto entities = lemmas(tagged, TokenKind::kEntityCandidate);
  EXPECT_EQ(entities, (std::vector<std::string>{"alice", "bob", "carol_danvers"}));
}

TEST(Nouns, HeuristicCandidates) {
  auto tagged = Pipeline().analyze("the moon landings were faked by dangerous scientists quickly");
  EXPECT_EQ(find_lemma(tagged, "landing")->kind, TokenKind::kNounCandidate);
  EXPECT_EQ(find_lemma(tagged, "scientist")->kind, TokenKind::kNounCandidate);
  EXPECT_EQ(find_lemma(tagged, "fake")->kind, TokenKind::kWord);       // past form
  EXPECT_EQ(find_lemma(tagged, "dangerous")->kind, TokenKind::kWord);  // adjective suffix
  EXPECT_EQ(find_lemma(tagged, "quickly")->kind, TokenKind::kWord);
}

TEST(Pipeline, LemmaInvariantsAndDeterminism) {
  gen::Rng rng(21);
  const std::vector<std::string> words = {"The", "Jews", "theories", "Moon", "landing", "lab-leak",
                                          "#Wuhan", "1933", "Adolf", "Hitler", "again,", "NASA.",
                                          "hidden", "truth!", "Mein", "Kampf", "qanon", "ok"};
  Pipeline pipeline;
  const std::regex word_lemma("[a-z_]+");
  const std::regex tag_lemma("[a-z0-9_]+");
  for (int i = 0; i < 300; ++i) {
    std::string text;
    for (int k = 0; k < 15; ++k) text += rng.pick(words) + " ";
    auto first = pipeline.analyze(text);
    EXPECT_EQ(pipeline.analyze(text), first);
    for (const auto& t : first) {
      EXPECT_FALSE(t.lemma.empty());
      EXPECT_TRUE(std::regex_match(t.lemma, t.kind == TokenKind::kHashtag ? tag_lemma : word_lemma))
          << t.lemma;
    }
  }
}

TEST(Pipeline, CustomTaggerPluggable) {
  struct Upper : Tagger {
    std::vector<Token> tag(std::span<const Token> tokens) const override {
      std::vector<Token> out(tokens.begin(), tokens.end());
      for (auto& t : out) t.kind = TokenKind::kNounCandidate;
      return out;
    }
  };
  Pipeline p(StopwordList{}, std::make_shared<Upper>());
  auto tokens = p.analyze("anything goes");
  ASSERT_EQ(tokens.size(), 2u);
  EXPECT_EQ(tokens[0].kind, TokenKind::kNounCandidate);
  EXPECT_THROW(Pipeline(StopwordList{}, std::shared_ptr<const Tagger>{}), ValidationError);
}

}  // namespace
}  // namespace ctrkit
