#include "ctrkit/preprocess.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "ctrkit/errors.hpp"
#include "resources.hpp"

namespace ctrkit {

namespace {

bool is_ascii(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_tag_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

std::string lower_ascii(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string lower(std::string_view text) {
  if (is_ascii(text)) return lower_ascii(text);
  std::string out;
  icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())))
      .toLower()
      .toUTF8String(out);
  return out;
}

std::string nfc(std::string_view text) {
  if (is_ascii(text)) return std::string(text);
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* normalizer = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) return std::string(text);
  icu::UnicodeString source =
      icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString normalized = normalizer->normalize(source, status);
  if (U_FAILURE(status)) return std::string(text);
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

// Decodes the code point starting at `pos`; invalid bytes decode as U+FFFD.
UChar32 code_point_at(std::string_view text, std::size_t pos, std::size_t& length) {
  int32_t offset = static_cast<int32_t>(pos);
  UChar32 cp;
  U8_NEXT(reinterpret_cast<const uint8_t*>(text.data()), offset, static_cast<int32_t>(text.size()), cp);
  length = static_cast<std::size_t>(offset) - pos;
  return cp < 0 ? 0xFFFD : cp;
}

// Code point that ends at `end` (exclusive).
UChar32 code_point_before(std::string_view text, std::size_t end, std::size_t& length) {
  int32_t offset = static_cast<int32_t>(end);
  UChar32 cp;
  U8_PREV(reinterpret_cast<const uint8_t*>(text.data()), 0, offset, cp);
  length = end - static_cast<std::size_t>(offset);
  return cp < 0 ? 0xFFFD : cp;
}

bool is_punct(UChar32 cp) {
  if (cp < 0x80) return std::ispunct(static_cast<int>(cp)) != 0;
  return u_ispunct(cp) != 0;
}

bool is_clause_end(std::string_view stripped) {
  return stripped.find_first_of(",.;:!?)]}") != std::string_view::npos;
}

bool is_sentence_end(std::string_view stripped) {
  return stripped.find_first_of(".!?") != std::string_view::npos;
}

bool all_alphabetic(std::string_view word, AlphabetMode mode) {
  if (mode == AlphabetMode::kAscii) return std::all_of(word.begin(), word.end(), is_ascii_alpha);
  for (std::size_t pos = 0; pos < word.size();) {
    std::size_t len = 0;
    UChar32 cp = code_point_at(word, pos, len);
    if (!u_isalpha(cp)) return false;
    pos += len;
  }
  return true;
}

bool starts_uppercase(std::string_view word) {
  if (word.empty()) return false;
  std::size_t len = 0;
  return u_isupper(code_point_at(word, 0, len)) != 0;
}

struct Piece {
  std::string_view text;
  bool hashtag = false;
};

// Splits one whitespace-delimited chunk into hashtags and the text around them.
std::vector<Piece> split_chunk(std::string_view chunk) {
  std::vector<Piece> pieces;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < chunk.size()) {
    if (chunk[i] == '#' && i + 1 < chunk.size() && is_tag_char(chunk[i + 1])) {
      if (i > start) pieces.push_back({chunk.substr(start, i - start), false});
      std::size_t end = i + 1;
      while (end < chunk.size() && is_tag_char(chunk[end])) ++end;
      pieces.push_back({chunk.substr(i, end - i), true});
      i = end;
      start = end;
    } else {
      ++i;
    }
  }
  if (start < chunk.size()) pieces.push_back({chunk.substr(start), false});
  return pieces;
}

void for_each_line(std::string_view text, auto&& fn) {
  std::size_t pos = 0;
  std::size_t line_number = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line, ++line_number);
    if (end == text.size()) break;
    pos = end + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool valid_entity_lemma(std::string_view lemma) {
  return !lemma.empty() && std::all_of(lemma.begin(), lemma.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || c == '_';
  });
}

// ---- lemmatizer ---------------------------------------------------------

const std::unordered_map<std::string_view, std::string_view>& lemma_exceptions() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      // auxiliaries and common irregular verbs
      {"am", "be"}, {"is", "be"}, {"are", "be"}, {"was", "be"}, {"were", "be"},
      {"been", "be"}, {"being", "be"}, {"has", "have"}, {"had", "have"},
      {"having", "have"}, {"does", "do"}, {"did", "do"}, {"done", "do"},
      {"doing", "do"}, {"goes", "go"}, {"went", "go"}, {"gone", "go"},
      {"going", "go"}, {"said", "say"}, {"says", "say"}, {"made", "make"},
      {"took", "take"}, {"taken", "take"}, {"gave", "give"}, {"given", "give"},
      {"knew", "know"}, {"known", "know"}, {"thought", "think"}, {"told", "tell"},
      {"found", "find"}, {"came", "come"}, {"became", "become"}, {"began", "begin"},
      {"begun", "begin"}, {"brought", "bring"}, {"bought", "buy"}, {"caught", "catch"},
      {"taught", "teach"}, {"fought", "fight"}, {"sought", "seek"}, {"left", "leave"},
      {"felt", "feel"}, {"kept", "keep"}, {"meant", "mean"}, {"sent", "send"},
      {"spent", "spend"}, {"built", "build"}, {"held", "hold"}, {"stood", "stand"},
      {"understood", "understand"}, {"wrote", "write"}, {"written", "write"},
      {"spoke", "speak"}, {"spoken", "speak"}, {"stole", "steal"}, {"stolen", "steal"},
      {"chose", "choose"}, {"chosen", "choose"}, {"drove", "drive"}, {"driven", "drive"},
      {"rose", "rise"}, {"risen", "rise"}, {"fell", "fall"}, {"fallen", "fall"},
      {"ran", "run"}, {"saw", "see"}, {"seen", "see"}, {"got", "get"},
      {"gotten", "get"}, {"lied", "lie"}, {"used", "use"}, {"led", "lead"},
      {"paid", "pay"}, {"laid", "lay"}, {"won", "win"}, {"lost", "lose"},
      {"hid", "hide"}, {"hidden", "hide"}, {"shot", "shoot"}, {"killed", "kill"},
      // irregular plurals
      {"men", "man"}, {"women", "woman"}, {"children", "child"}, {"people", "people"},
      {"mice", "mouse"}, {"feet", "foot"}, {"teeth", "tooth"}, {"geese", "goose"},
      {"lives", "life"}, {"wives", "wife"}, {"knives", "knife"}, {"leaves", "leaf"},
      {"wolves", "wolf"}, {"halves", "half"}, {"thieves", "thief"}, {"selves", "self"},
      {"shoes", "shoe"}, {"toes", "toe"}, {"data", "data"}, {"media", "media"},
      {"criteria", "criterion"}, {"phenomena", "phenomenon"},
      // words that only look inflected
      {"news", "news"}, {"series", "series"}, {"species", "species"},
      {"politics", "politics"}, {"physics", "physics"}, {"economics", "economics"},
      {"mathematics", "mathematics"}, {"ethics", "ethics"}, {"always", "always"},
      {"perhaps", "perhaps"}, {"bias", "bias"}, {"alias", "alias"}, {"atlas", "atlas"},
      {"canvas", "canvas"}, {"christmas", "christmas"}, {"texas", "texas"},
      {"kansas", "kansas"}, {"arkansas", "arkansas"}, {"vegas", "vegas"},
      {"chaos", "chaos"}, {"pros", "pro"}, {"buses", "bus"}, {"lens", "lens"},
      {"morning", "morning"}, {"evening", "evening"}, {"ceiling", "ceiling"},
      {"wedding", "wedding"}, {"during", "during"}, {"hundred", "hundred"},
      {"hatred", "hatred"}, {"sacred", "sacred"}, {"naked", "naked"}, {"wicked", "wicked"},
      {"kindred", "kindred"}, {"rugged", "rugged"}, {"sibling", "sibling"},
  };
  return table;
}

bool is_vowel_at(std::string_view w, std::size_t i) {
  switch (w[i]) {
    case 'a': case 'e': case 'i': case 'o': case 'u': return true;
    case 'y': return i > 0 && !is_vowel_at(w, i - 1);
    default: return false;
  }
}

bool has_vowel(std::string_view w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (is_vowel_at(w, i)) return true;
  }
  return false;
}

// Number of vowel-consonant sequences, [C](VC)^m[V].
int measure(std::string_view w) {
  int m = 0;
  std::size_t i = 0;
  while (i < w.size() && !is_vowel_at(w, i)) ++i;
  while (i < w.size()) {
    while (i < w.size() && is_vowel_at(w, i)) ++i;
    if (i >= w.size()) break;
    while (i < w.size() && !is_vowel_at(w, i)) ++i;
    ++m;
  }
  return m;
}

bool ends_cvc(std::string_view w) {
  if (w.size() < 3) return false;
  std::size_t n = w.size();
  char last = w[n - 1];
  return !is_vowel_at(w, n - 3) && is_vowel_at(w, n - 2) && !is_vowel_at(w, n - 1) &&
         last != 'w' && last != 'x' && last != 'y';
}

std::string restore_stem(std::string stem) {
  if (stem.ends_with("at") || stem.ends_with("bl") || stem.ends_with("iz")) return stem + "e";
  std::size_t n = stem.size();
  if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel_at(stem, n - 1) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
    return stem;
  }
  if (measure(stem) == 1 && ends_cvc(stem)) return stem + "e";
  return stem;
}

// ---- noun heuristic -----------------------------------------------------

const std::unordered_set<std::string_view>& non_nouns() {
  static const std::unordered_set<std::string_view> words = {
      "make", "get", "go", "know", "think", "say", "see", "want", "like", "give", "tell",
      "become", "explain", "believe", "come", "take", "use", "find", "ask", "seem", "feel",
      "try", "leave", "call", "keep", "let", "begin", "help", "show", "hear", "play", "run",
      "move", "live", "hold", "bring", "happen", "write", "provide", "sit", "stand", "lose",
      "pay", "meet", "include", "continue", "set", "learn", "change", "lead", "understand",
      "watch", "follow", "stop", "create", "speak", "read", "allow", "add", "spend", "grow",
      "open", "walk", "win", "offer", "remember", "love", "consider", "appear", "buy",
      "wait", "serve", "die", "send", "expect", "build", "stay", "fall", "cut", "reach",
      "kill", "remain", "suggest", "raise", "pass", "sell", "require", "report", "decide",
      "pull", "good", "bad", "new", "old", "great", "big", "small", "real", "true", "false",
      "high", "low", "long", "short", "little", "own", "right", "wrong", "sure", "whole",
      "next", "last", "early", "late", "hard", "easy", "full", "able", "many", "several",
      "never", "still", "even", "well", "back", "really", "already", "almost", "often",
      "please", "exactly", "always", "ever", "maybe", "perhaps", "quite", "rather",
      "anyone", "everyone", "someone", "anything", "everything", "something", "nothing",
      "thing", "yes", "yeah", "okay", "give", "tell", "step",
  };
  return words;
}

bool looks_nominal(const Token& token, const StopwordList& stoplist) {
  const std::string& lemma = token.lemma;
  if (lemma.size() < 3 || token.past_form) return false;
  if (stoplist.contains(lemma) || stoplist.contains(lower(token.surface))) return false;
  if (non_nouns().contains(lemma)) return false;
  std::string lowered = lower(token.surface);
  if (lowered.ends_with("ly")) return false;
  for (std::string_view suffix : {"ous", "ful", "ive", "able", "ible", "ish", "less", "ical"}) {
    if (lemma.ends_with(suffix)) return false;
  }
  return true;
}

bool adjacent(const Token& a, const Token& b) {
  return b.position == a.position + 1 && !a.break_after;
}

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::kWord: return "word";
    case TokenKind::kNounCandidate: return "noun_candidate";
    case TokenKind::kEntityCandidate: return "entity_candidate";
    case TokenKind::kHashtag: return "hashtag";
  }
  return "word";
}

std::vector<std::string> extract_hashtags(std::string_view text) {
  std::string normalized = nfc(text);
  std::vector<std::string> tags;
  std::unordered_set<std::string> seen;
  std::string_view view = normalized;
  for (std::size_t i = 0; i < view.size(); ++i) {
    if (view[i] != '#' || i + 1 >= view.size() || !is_tag_char(view[i + 1])) continue;
    std::size_t end = i + 1;
    while (end < view.size() && is_tag_char(view[end])) ++end;
    std::string tag = lower_ascii(view.substr(i + 1, end - i - 1));
    if (seen.insert(tag).second) tags.push_back(std::move(tag));
    i = end - 1;
  }
  return tags;
}

std::vector<Token> tokenize(std::string_view text, const TokenizeOptions& options) {
  std::string normalized = nfc(text);
  std::string_view view = normalized;
  std::vector<Token> tokens;
  std::size_t position = 0;
  bool sentence_pending = true;

  std::size_t pos = 0;
  while (pos < view.size()) {
    while (pos < view.size() && is_space(view[pos])) ++pos;
    std::size_t end = pos;
    while (end < view.size() && !is_space(view[end])) ++end;
    if (end == pos) break;
    std::string_view chunk = view.substr(pos, end - pos);
    pos = end;

    for (const Piece& piece : split_chunk(chunk)) {
      std::size_t this_position = position++;
      if (piece.hashtag) {
        Token tag;
        tag.surface = std::string(piece.text);
        tag.lemma = lower_ascii(piece.text.substr(1));
        tag.kind = TokenKind::kHashtag;
        tag.position = this_position;
        tokens.push_back(std::move(tag));
        continue;
      }
      std::string_view word = piece.text;
      while (!word.empty()) {
        std::size_t len = 0;
        if (!is_punct(code_point_at(word, 0, len))) break;
        word.remove_prefix(len);
      }
      while (!word.empty()) {
        std::size_t len = 0;
        if (!is_punct(code_point_before(word, word.size(), len))) break;
        word.remove_suffix(len);
      }
      std::size_t lead = static_cast<std::size_t>(word.data() - piece.text.data());
      std::string_view trailing = piece.text.substr(lead + word.size());

      bool keep = !word.empty() && all_alphabetic(word, options.alphabet);
      if (keep) {
        Token token;
        token.surface = std::string(word);
        token.lemma = lower(word);
        token.kind = TokenKind::kWord;
        token.position = this_position;
        token.sentence_start = sentence_pending;
        token.break_after = is_clause_end(trailing);
        tokens.push_back(std::move(token));
        sentence_pending = false;
      } else if (!tokens.empty() && is_clause_end(trailing)) {
        tokens.back().break_after = true;
      }
      if (is_sentence_end(trailing)) sentence_pending = true;
    }
  }
  return tokens;
}

// ---- StopwordList -------------------------------------------------------

StopwordList::StopwordList(std::set<std::string> words, std::string source_tag)
    : source_tag_(std::move(source_tag)) {
  for (auto& word : words) {
    std::string lowered = lower(trim(word));
    if (lowered.empty()) throw ValidationError("empty stopword entry");
    words_.insert(std::move(lowered));
  }
}

StopwordList StopwordList::parse(std::string_view text, std::string default_tag) {
  std::set<std::string> words;
  std::string tag = std::move(default_tag);
  for_each_line(text, [&](std::string_view line, std::size_t) {
    line = trim(line);
    if (line.empty()) return;
    if (line.front() == '#') {
      std::string_view body = trim(line.substr(1));
      if (body.starts_with("source:")) tag = std::string(trim(body.substr(7)));
      return;
    }
    words.insert(std::string(line));
  });
  return StopwordList(std::move(words), std::move(tag));
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  return parse(read_file(path), path.filename().string());
}

const StopwordList& StopwordList::english() {
  static const StopwordList list = parse(resources::stopwords_en(), "builtin");
  return list;
}

bool StopwordList::contains(std::string_view word) const { return words_.find(word) != words_.end(); }

std::vector<Token> remove_stopwords(std::span<const Token> tokens, const StopwordList& stoplist) {
  std::vector<Token> kept;
  kept.reserve(tokens.size());
  for (const auto& token : tokens) {
    if (token.kind != TokenKind::kHashtag && stoplist.contains(lower(token.surface))) continue;
    kept.push_back(token);
  }
  return kept;
}

// ---- lemmatizer ---------------------------------------------------------

std::string lemma_of(std::string_view word) {
  const auto& exceptions = lemma_exceptions();
  if (auto it = exceptions.find(word); it != exceptions.end()) return std::string(it->second);
  std::string w(word);
  if (!is_ascii(w) || w.size() <= 3) return w;
  if (w.ends_with("thing")) return w;

  if (w.size() > 4 && w.ends_with("ies")) return w.substr(0, w.size() - 3) + "y";
  if (w.ends_with("sses")) return w.substr(0, w.size() - 2);
  for (std::string_view suffix : {"xes", "ches", "shes", "oes"}) {
    if (w.ends_with(suffix)) return w.substr(0, w.size() - 2);
  }
  if (w.ends_with("ss") || w.ends_with("us") || w.ends_with("is")) return w;
  if (w.ends_with('s')) return w.substr(0, w.size() - 1);

  if (w.ends_with("ing")) {
    std::string stem = w.substr(0, w.size() - 3);
    if (stem.size() >= 2 && has_vowel(stem)) return restore_stem(std::move(stem));
    return w;
  }
  if (w.ends_with("eed")) {
    std::string stem = w.substr(0, w.size() - 3);
    return measure(stem) > 0 ? w.substr(0, w.size() - 1) : w;
  }
  if (w.ends_with("ed")) {
    std::string stem = w.substr(0, w.size() - 2);
    if (stem.size() >= 2 && has_vowel(stem)) return restore_stem(std::move(stem));
  }
  return w;
}

Token lemmatize(Token token) {
  if (token.kind != TokenKind::kWord) return token;
  std::string lowered = lower(token.surface);
  token.lemma = lemma_of(lowered);
  token.past_form = lowered.ends_with("ed") && token.lemma != lowered;
  if (token.lemma.empty()) token.lemma = lowered;
  return token;
}

std::vector<Token> lemmatize_all(std::vector<Token> tokens) {
  for (auto& token : tokens) token = lemmatize(std::move(token));
  return tokens;
}

// ---- Gazetteer ----------------------------------------------------------

void Gazetteer::add(std::string_view phrase, std::string_view lemma) {
  std::string key;
  std::size_t words = 0;
  std::istringstream in{std::string(phrase)};
  std::string part;
  while (in >> part) {
    if (!key.empty()) key.push_back(' ');
    key += lower(part);
    ++words;
  }
  if (key.empty()) throw ValidationError("empty gazetteer phrase");
  if (!valid_entity_lemma(lemma)) {
    throw ValidationError("gazetteer lemma '" + std::string(lemma) + "' must match [a-z_]+");
  }
  entries_[key] = std::string(lemma);
  max_words_ = std::max(max_words_, words);
}

const std::string* Gazetteer::find(std::string_view phrase) const {
  auto it = entries_.find(phrase);
  return it == entries_.end() ? nullptr : &it->second;
}

Gazetteer Gazetteer::parse(std::string_view text) {
  Gazetteer gazetteer;
  for_each_line(text, [&](std::string_view line, std::size_t line_number) {
    if (trim(line).empty() || trim(line).front() == '#') return;
    std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw ValidationError(line_number, "gazetteer line needs 'phrase<TAB>lemma'");
    }
    try {
      gazetteer.add(trim(line.substr(0, tab)), trim(line.substr(tab + 1)));
    } catch (const ValidationError& e) {
      throw ValidationError(line_number, e.reason());
    }
  });
  return gazetteer;
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) { return parse(read_file(path)); }

const Gazetteer& Gazetteer::english() {
  static const Gazetteer gazetteer = parse(resources::gazetteer_en());
  return gazetteer;
}

// ---- tagging ------------------------------------------------------------

HeuristicTagger::HeuristicTagger(Gazetteer gazetteer, StopwordList stoplist)
    : gazetteer_(std::move(gazetteer)), stoplist_(std::move(stoplist)) {}

std::vector<Token> HeuristicTagger::tag(std::span<const Token> tokens) const {
  return extract_nouns_entities(tokens, gazetteer_, stoplist_);
}

std::vector<Token> extract_nouns_entities(std::span<const Token> tokens, const Gazetteer& gazetteer,
                                          const StopwordList& stoplist) {
  const std::size_t n = tokens.size();
  auto is_word = [&](std::size_t i) { return tokens[i].kind == TokenKind::kWord; };

  // Longest gazetteer phrase starting at i, as (token count, lemma).
  auto gazetteer_match = [&](std::size_t i) -> std::pair<std::size_t, const std::string*> {
    if (!is_word(i)) return {0, nullptr};
    std::string phrase;
    std::vector<std::string> prefixes;
    for (std::size_t j = i; j < n && j - i < gazetteer.max_phrase_words(); ++j) {
      if (j > i && (!is_word(j) || !adjacent(tokens[j - 1], tokens[j]))) break;
      if (j > i) phrase.push_back(' ');
      phrase += lower(tokens[j].surface);
      prefixes.push_back(phrase);
    }
    for (std::size_t len = prefixes.size(); len > 0; --len) {
      if (const std::string* lemma = gazetteer.find(prefixes[len - 1])) return {len, lemma};
    }
    return {0, nullptr};
  };

  auto entity = [&](std::size_t first, std::size_t count, std::string lemma) {
    Token merged = tokens[first];
    for (std::size_t k = 1; k < count; ++k) merged.surface += " " + tokens[first + k].surface;
    merged.lemma = std::move(lemma);
    merged.kind = TokenKind::kEntityCandidate;
    merged.break_after = tokens[first + count - 1].break_after;
    merged.past_form = false;
    return merged;
  };

  std::vector<Token> out;
  out.reserve(n);
  std::size_t i = 0;
  while (i < n) {
    const Token& token = tokens[i];
    if (!is_word(i)) {
      out.push_back(token);
      ++i;
      continue;
    }
    if (auto [len, lemma] = gazetteer_match(i); len > 0) {
      out.push_back(entity(i, len, *lemma));
      i += len;
      continue;
    }
    if (starts_uppercase(token.surface) && !token.sentence_start) {
      std::size_t j = i;
      while (j + 1 < n && is_word(j + 1) && adjacent(tokens[j], tokens[j + 1]) &&
             starts_uppercase(tokens[j + 1].surface) && gazetteer_match(j + 1).first == 0) {
        ++j;
      }
      std::size_t count = j - i + 1;
      bool lone_function_word = count == 1 && stoplist.contains(token.lemma);
      if (!lone_function_word) {
        std::string lemma;
        bool valid = true;
        for (std::size_t k = i; k <= j; ++k) {
          if (!lemma.empty()) lemma.push_back('_');
          std::string part = lower(tokens[k].surface);
          valid = valid && valid_entity_lemma(part);
          lemma += part;
        }
        if (valid || !is_ascii(lemma)) {
          out.push_back(entity(i, count, std::move(lemma)));
          i = j + 1;
          continue;
        }
      }
    }
    Token word = token;
    if (looks_nominal(word, stoplist)) word.kind = TokenKind::kNounCandidate;
    out.push_back(std::move(word));
    ++i;
  }
  return out;
}

// ---- Pipeline -----------------------------------------------------------

Pipeline::Pipeline() : Pipeline(StopwordList::english(), Gazetteer::english()) {}

Pipeline::Pipeline(StopwordList stoplist, Gazetteer gazetteer, TokenizeOptions options)
    : stoplist_(stoplist),
      tagger_(std::make_shared<HeuristicTagger>(std::move(gazetteer), std::move(stoplist))),
      options_(options) {}

Pipeline::Pipeline(StopwordList stoplist, std::shared_ptr<const Tagger> tagger,
                   TokenizeOptions options)
    : stoplist_(std::move(stoplist)), tagger_(std::move(tagger)), options_(options) {
  if (!tagger_) throw ValidationError("pipeline needs a tagger");
}

std::vector<Token> Pipeline::analyze(std::string_view text) const {
  auto tokens = lemmatize_all(remove_stopwords(tokenize(text, options_), stoplist_));
  return tagger_->tag(tokens);
}

}  // namespace ctrkit
