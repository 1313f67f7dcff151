#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctrkit {

enum class TokenKind { kWord, kNounCandidate, kEntityCandidate, kHashtag };

std::string_view to_string(TokenKind kind);

struct Token {
  std::string surface;
  /// Lowercase normal form. Words and entities use [a-z_]; hashtags [a-z0-9_].
  std::string lemma;
  TokenKind kind = TokenKind::kWord;
  /// Index in the raw token stream. Dropped tokens leave gaps, so two tokens
  /// are adjacent in the text only when their positions differ by one.
  std::size_t position = 0;
  /// First word of a sentence.
  bool sentence_start = false;
  /// The source chunk ended in clause punctuation (",", ".", ";", ...).
  bool break_after = false;
  /// Set by lemmatize when the -ed rule produced the lemma.
  bool past_form = false;

  friend bool operator==(const Token&, const Token&) = default;
};

enum class AlphabetMode {
  /// Only ASCII letters count as alphabetic.
  kAscii,
  /// Any Unicode letter counts as alphabetic.
  kUnicode,
};

struct TokenizeOptions {
  AlphabetMode alphabet = AlphabetMode::kAscii;
};

/// Hashtags (`#` followed by [A-Za-z0-9_]+), lowercased, in order of first
/// appearance, without duplicates.
std::vector<std::string> extract_hashtags(std::string_view text);

/// NFC-normalizes `text`, pulls out hashtags, then splits on whitespace.
/// Leading/trailing punctuation is stripped from each chunk; chunks with any
/// remaining non-alphabetic character are dropped.
std::vector<Token> tokenize(std::string_view text, const TokenizeOptions& options = {});

class StopwordList {
 public:
  StopwordList() = default;
  StopwordList(std::set<std::string> words, std::string source_tag);

  /// One entry per line; `#` starts a comment. A `# source: TAG` line sets the tag.
  static StopwordList parse(std::string_view text, std::string default_tag = "inline");
  static StopwordList load(const std::filesystem::path& path);
  /// The vendored English function-word list.
  static const StopwordList& english();

  bool contains(std::string_view word) const;
  const std::set<std::string, std::less<>>& words() const { return words_; }
  const std::string& source_tag() const { return source_tag_; }
  std::size_t size() const { return words_.size(); }

 private:
  std::set<std::string, std::less<>> words_;
  std::string source_tag_;
};

/// Drops word tokens whose lowercase surface is stoplisted. Hashtags are kept.
std::vector<Token> remove_stopwords(std::span<const Token> tokens, const StopwordList& stoplist);

/// Heuristic lemma of one lowercase word: exception table, then a single
/// suffix rule (plural -s/-es/-ies, -ing/-ed with doubling undo).
std::string lemma_of(std::string_view lowercase_word);

/// Sets token.lemma for word tokens; other kinds are returned unchanged.
Token lemmatize(Token token);
std::vector<Token> lemmatize_all(std::vector<Token> tokens);

/// Surface phrase (lowercase, single-space separated) -> canonical entity lemma.
class Gazetteer {
 public:
  Gazetteer() = default;

  /// Lines `surface phrase<TAB>canonical_lemma`; `#` starts a comment.
  static Gazetteer parse(std::string_view text);
  static Gazetteer load(const std::filesystem::path& path);
  static const Gazetteer& english();

  void add(std::string_view phrase, std::string_view lemma);
  /// Longest phrase length in words.
  std::size_t max_phrase_words() const { return max_words_; }
  const std::string* find(std::string_view phrase) const;
  const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string, std::less<>> entries_;
  std::size_t max_words_ = 0;
};

/// Part-of-speech stand-in: marks noun and entity candidates on a lemmatized stream.
class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual std::vector<Token> tag(std::span<const Token> tokens) const = 0;
};

/// Gazetteer matches and capitalized runs become entity candidates; the
/// remaining content words that look nominal become noun candidates.
class HeuristicTagger final : public Tagger {
 public:
  HeuristicTagger(Gazetteer gazetteer, StopwordList stoplist);
  std::vector<Token> tag(std::span<const Token> tokens) const override;

 private:
  Gazetteer gazetteer_;
  StopwordList stoplist_;
};

std::vector<Token> extract_nouns_entities(std::span<const Token> tokens, const Gazetteer& gazetteer,
                                          const StopwordList& stoplist = StopwordList::english());

/// tokenize -> remove_stopwords -> lemmatize -> tag, with a fixed configuration.
class Pipeline {
 public:
  /// English stoplist and gazetteer, ASCII alphabet.
  Pipeline();
  Pipeline(StopwordList stoplist, Gazetteer gazetteer, TokenizeOptions options = {});
  Pipeline(StopwordList stoplist, std::shared_ptr<const Tagger> tagger, TokenizeOptions options = {});

  std::vector<Token> analyze(std::string_view text) const;
  const StopwordList& stoplist() const { return stoplist_; }

 private:
  StopwordList stoplist_;
  std::shared_ptr<const Tagger> tagger_;
  TokenizeOptions options_;
};

}  // namespace ctrkit
