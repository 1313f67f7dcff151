#include "ctrkit/engine.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "ctrkit/errors.hpp"
#include "generators.hpp"

namespace ctrkit {
namespace {

const std::filesystem::path kData = CTRKIT_TEST_DATA_DIR;

std::unique_ptr<Engine> open_engine(const gen::TempDir& dir) {
  Config config;
  config.data_dir = dir.path();
  return Engine::open(config);
}

IngestSummary ingest_text(Engine& engine, const std::string& text) {
  std::istringstream in(text);
  return engine.ingest(in);
}

// Six months of background chatter plus three terms that only show up in March.
std::string keyness_corpus(const std::vector<std::string>& background,
                           const std::vector<std::string>& planted) {
  gen::Rng rng(404);
  std::string out;
  int id = 0;
  for (unsigned month = 1; month <= 6; ++month) {
    for (int i = 0; i < 40; ++i) {
      std::string text;
      for (int w = 0; w < 6; ++w) text += rng.pick(background) + " ";
      if (month == 3 && i < 20) text += planted[static_cast<std::size_t>(i % 3)];
      out += gen::post_record("k" + std::to_string(id++), "gab", "u" + std::to_string(i % 7),
                              gen::at(2022, month, static_cast<unsigned>(1 + i % 27)), text) +
             "\n";
    }
  }
  return out;
}

TEST(Engine, KeynessFindsPlantedTermsAndCaches) {
  gen::TempDir dir("engine");
  auto engine = open_engine(dir);
  gen::Rng rng(1);
  auto background = gen::vocabulary(rng, 30);
  std::vector<std::string> planted{"zubopa", "kivatu", "marilo"};
  EXPECT_EQ(ingest_text(*engine, keyness_corpus(background, planted)).accepted, 240u);

  KeynessQuery query;
  query.period = "2022-03";
  auto top = engine->keyness(query);
  ASSERT_EQ(top.size(), 3u);
  std::set<std::string> terms;
  for (const auto& r : top) terms.insert(r.term);
  EXPECT_EQ(terms, std::set<std::string>(planted.begin(), planted.end()));
  EXPECT_TRUE(top[0].smoothed);
  EXPECT_GE(top[0].log_ratio, top[1].log_ratio);

  auto hits = engine->cache_hits();
  auto again = engine->keyness(query);
  EXPECT_EQ(engine->cache_hits(), hits + 1);
  ASSERT_EQ(again.size(), top.size());
  for (std::size_t i = 0; i < top.size(); ++i) {
    EXPECT_EQ(again[i].term, top[i].term);
    EXPECT_EQ(again[i].log_ratio, top[i].log_ratio);
    EXPECT_EQ(again[i].smoothed, top[i].smoothed);
  }

  // New content changes the cache key.
  ingest_text(*engine, gen::post_record("late", "gab", "u", gen::at(2022, 3, 5), "zubopa") + "\n");
  hits = engine->cache_hits();
  auto fresh = engine->keyness(query);
  EXPECT_EQ(engine->cache_hits(), hits);
  EXPECT_EQ(fresh[0].f_target + fresh[1].f_target + fresh[2].f_target,
            top[0].f_target + top[1].f_target + top[2].f_target + 1);
}

TEST(Engine, KeynessExternalReference) {
  gen::TempDir dir("engine");
  auto engine = open_engine(dir);
  ingest_text(*engine, gen::post_record("a", "gab", "u", gen::at(2022, 3, 1), "zubopa zubopa zubopa zubopa zubopa") + "\n");
  KeynessQuery query;
  query.period = "2022-03";
  query.reference = FrequencyTable{};
  query.reference->add("zubopa", 5);
  query.reference->add("other", 15);
  auto rows = engine->keyness(query);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].log_ratio, 2.0);
}

TEST(Engine, KeynessErrors) {
  gen::TempDir dir("engine");
  auto engine = open_engine(dir);
  ingest_text(*engine, gen::post_record("a", "gab", "u", gen::at(2022, 3, 1), "zubopa") + "\n");
  KeynessQuery bad;
  bad.period = "March";
  EXPECT_THROW(engine->keyness(bad), ValidationError);
  KeynessQuery empty_month;
  empty_month.period = "2021-01";
  EXPECT_THROW(engine->keyness(empty_month), DomainError);
  KeynessQuery negative;
  negative.period = "2022-03";
  negative.min_freq = -1;
  EXPECT_THROW(engine->keyness(negative), ValidationError);
}

TEST(Engine, TfidfOverUserPosts) {
  gen::TempDir dir("engine");
  auto engine = open_engine(dir);
  EXPECT_THROW(engine->tfidf(TermKindFilter::kAny, 5), DomainError);
  ingest_text(*engine, gen::post_record("a", "gab", "u", gen::at(2022, 1, 1), "zubopa kivatu") + "\n" +
                           gen::post_record("b", "gab", "u", gen::at(2022, 1, 2), "zubopa") + "\n");
  auto rows = engine->tfidf(TermKindFilter::kAny, 5);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].term, "kivatu");
  EXPECT_NEAR(rows[0].score, std::log(2.0), 1e-12);
  EXPECT_EQ(rows[1].score, 0.0);
  EXPECT_EQ(engine->tfidf(TermKindFilter::kAny, 5).size(), 2u);
  EXPECT_EQ(parse_document_scope("prompts"), DocumentScope::kPrompts);
  EXPECT_FALSE(parse_document_scope("bots"));
}

std::string hashtag_posts(const std::string& a, const std::string& b, int times, int& id) {
  std::string out;
  for (int i = 0; i < times; ++i) {
    out += gen::post_record("h" + std::to_string(id++), "gab", "u", gen::at(2022, 5, 1),
                            "#" + a + " #" + b) +
           "\n";
  }
  return out;
}

TEST(Engine, GraphPrunesAndCentersOnSeed) {
  gen::TempDir dir("engine");
  auto engine = open_engine(dir);
  int id = 0;
  ingest_text(*engine, hashtag_posts("moronlabe", "2a", 51, id) + hashtag_posts("moronlabe", "guns", 50, id) +
                           hashtag_posts("2a", "liberty", 60, id) + hashtag_posts("cats", "dogs", 70, id));
  GraphQuery query;
  auto whole = engine->graph(query);
  EXPECT_EQ(whole.weight("2a", "moronlabe"), 51);
  EXPECT_EQ(whole.weight("guns", "moronlabe"), 0);
  EXPECT_FALSE(whole.has_node("guns"));
  EXPECT_TRUE(whole.has_node("cats"));

  query.seed = "moronlabe";
  auto centered = engine->graph(query);
  EXPECT_EQ(centered.seed_term, "moronlabe");
  EXPECT_TRUE(centered.has_node("2a"));
  EXPECT_FALSE(centered.has_node("liberty"));
  EXPECT_FALSE(centered.has_node("cats"));
  query.depth = 2;
  EXPECT_TRUE(engine->graph(query).has_node("liberty"));

  query.seed = "absent";
  EXPECT_THROW(engine->graph(query), NotFoundError);
  GraphQuery bad;
  bad.min_weight = -2;
  EXPECT_THROW(engine->graph(bad), ValidationError);
  bad.min_weight = 0;
  bad.window = TimeWindow{gen::at(2023, 1, 1), gen::at(2022, 1, 1)};
  EXPECT_THROW(engine->graph(bad), ValidationError);
}

TEST(Engine, SeriesAndWatchlistScan) {
  gen::TempDir dir("engine");
  auto engine = open_engine(dir);
  std::string text;
  int id = 0;
  const int per_month[] = {5, 5, 5, 50};
  for (unsigned m = 0; m < 4; ++m) {
    for (int i = 0; i < per_month[m]; ++i) {
      text += gen::post_record("s" + std::to_string(id++), "gab", "u", gen::at(2022, m + 1, 3),
                               "talk about #wuhan today") +
              "\n";
    }
  }
  ingest_text(*engine, text);
  auto view = engine->series("wuhan");
  EXPECT_EQ(view.series.counts(), (std::vector<std::int64_t>{5, 5, 5, 50}));
  ASSERT_EQ(view.excursions.size(), 1u);
  EXPECT_DOUBLE_EQ(view.excursions[0].ratio, 10.0);
  EXPECT_THROW(engine->series(""), ValidationError);

  EXPECT_TRUE(engine->excursions(std::nullopt).empty());
  auto rev = engine->state_revision();
  engine->update_watchlist(WatchlistAction::kAdd, "wuhan", std::nullopt, "ana");
  EXPECT_EQ(engine->state_revision(), rev + 1);
  EXPECT_EQ(engine->excursions(std::nullopt).size(), 1u);
  EXPECT_TRUE(engine->excursions(std::nullopt, Granularity::kWeek).empty());
  engine->update_watchlist(WatchlistAction::kDeactivate, "wuhan", std::nullopt, "ana");
  EXPECT_TRUE(engine->excursions(std::nullopt).empty());
  EXPECT_THROW(engine->update_watchlist(WatchlistAction::kDeactivate, "ghost", std::nullopt, ""),
               NotFoundError);

  auto reopened = open_engine(dir);
  ASSERT_EQ(reopened->watchlist().entries().size(), 1u);
  EXPECT_FALSE(reopened->watchlist().entries()[0].active);
  EXPECT_EQ(reopened->watchlist().audit_trail().size(), 2u);
}

TEST(Engine, SeriesOnEmptyStore) {
  gen::TempDir dir("engine");
  auto engine = open_engine(dir);
  EXPECT_THROW(engine->series("wuhan"), DomainError);
}

TEST(Engine, AuditClassifyTallyAndManualOverride) {
  gen::TempDir dir("engine");
  auto engine = open_engine(dir);
  EXPECT_EQ(engine->ingest_file(kData / "fixtures" / "bot_exchange.jsonl").accepted, 5u);
  EXPECT_EQ(engine->audit_classify(), 3u);

  auto gpt = engine->audit_tally("chatgpt");
  EXPECT_EQ(gpt.denominator, 1);
  EXPECT_EQ(gpt.count(AuditLabelValue::kRefusal), 1);
  EXPECT_EQ(gpt.count(AuditLabelValue::kWarning), 1);
  auto cai = engine->audit_tally("conspiracy_ai");
  EXPECT_EQ(cai.denominator, 2);
  EXPECT_EQ(cai.count(AuditLabelValue::kPromotion), 1);
  EXPECT_EQ(cai.count(AuditLabelValue::kComplianceOther), 1);

  std::vector<AuditLabelValue> manual{AuditLabelValue::kDebunkOrConcern};
  auto rev = engine->set_manual_labels("ca-p07", "ca-r07", manual);
  EXPECT_EQ(engine->set_manual_labels("ca-p07", "ca-r07", manual), rev);
  cai = engine->audit_tally("conspiracy_ai");
  EXPECT_EQ(cai.count(AuditLabelValue::kPromotion), 1);
  EXPECT_EQ(cai.count(AuditLabelValue::kDebunkOrConcern), 1);
  EXPECT_EQ(cai.count(AuditLabelValue::kComplianceOther), 0);

  // Re-running the classifier leaves the manual verdict in charge.
  engine->audit_classify();
  EXPECT_EQ(engine->audit_tally("conspiracy_ai").count(AuditLabelValue::kDebunkOrConcern), 1);

  EXPECT_THROW(engine->set_manual_labels("ca-p07", "nope", manual), NotFoundError);
  EXPECT_THROW(engine->set_manual_labels("ca-p07", "ca-r07", {}), ValidationError);
  EXPECT_EQ(engine->audit_pairs().size(), 3u);
}

TEST(Engine, AuditTallyNeedsLabels) {
  gen::TempDir dir("engine");
  auto engine = open_engine(dir);
  engine->ingest_file(kData / "fixtures" / "bot_exchange.jsonl");
  EXPECT_THROW(engine->audit_tally("chatgpt"), ValidationError);
}

TEST(Engine, ConcurrentReadsDuringIngest) {
  gen::TempDir dir("engine");
  auto engine = open_engine(dir);
  int id = 0;
  ingest_text(*engine, hashtag_posts("a", "b", 3, id));
  std::atomic<bool> failed = false;
  std::thread writer([&] {
    for (int batch = 0; batch < 20; ++batch) {
      int local = 1000 + batch * 10;
      ingest_text(*engine, hashtag_posts("a", "b", 10, local));
    }
  });
  std::thread reader([&] {
    for (int i = 0; i < 50; ++i) {
      try {
        GraphQuery query;
        query.min_weight = 0;
        auto g = engine->graph(query);
        // Every snapshot has whole batches: 3 + 10k edges.
        if ((g.weight("a", "b") - 3) % 10 != 0) failed = true;
        engine->tfidf(TermKindFilter::kAny, 3);
      } catch (...) {
        failed = true;
      }
    }
  });
  writer.join();
  reader.join();
  EXPECT_FALSE(failed);
  EXPECT_EQ(engine->post_count(), 203u);
}

}  // namespace
}  // namespace ctrkit
