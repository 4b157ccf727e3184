#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace semfilter {

enum class PartOfSpeech { Noun, Adj, Verb, Other };

/// Pruning precedence: nouns are kept longest, OTHER goes first.
constexpr int priority(PartOfSpeech pos) noexcept {
  switch (pos) {
    case PartOfSpeech::Noun: return 3;
    case PartOfSpeech::Adj: return 2;
    case PartOfSpeech::Verb: return 1;
    case PartOfSpeech::Other: return 0;
  }
  return 0;
}

const char* to_string(PartOfSpeech pos) noexcept;

struct PromptToken {
  std::string surface;  // lowercased word as it appeared
  std::string lemma;
  PartOfSpeech pos = PartOfSpeech::Other;
};

struct TokenizedPrompt {
  std::vector<PromptToken> tokens;  // original word order
  std::size_t token_count_estimate = 0;

  std::string joined_lemmas() const;
};

/// Instructional boilerplate removed before the prompt reaches the text encoder.
class PhraseBlacklist {
public:
  explicit PhraseBlacklist(std::vector<std::string> phrases);

  static const PhraseBlacklist& defaults();
  /// One phrase per line; blank lines and lines starting with '#' are skipped.
  static PhraseBlacklist from_file(const std::filesystem::path& path);

  const std::vector<std::string>& phrases() const noexcept { return phrases_; }

private:
  std::vector<std::string> phrases_;  // longest first
};

/// Case-insensitive removal of every blacklisted phrase, together with the
/// punctuation that immediately follows it. Text without a match is returned as is.
std::string strip_instructions(std::string_view prompt, const PhraseBlacklist& list = PhraseBlacklist::defaults());

/// Stop words, irregular lemmas and a part-of-speech lexicon of base forms.
class Lexicon {
public:
  static const Lexicon& builtin();

  /// Replaces individual tables of the built-in lexicon from plain-text files:
  /// stop words one per line, lemma exceptions as "word lemma", POS as "word NOUN|ADJ|VERB|OTHER".
  static Lexicon with_overrides(const std::optional<std::filesystem::path>& stop_words,
                                const std::optional<std::filesystem::path>& lemmas,
                                const std::optional<std::filesystem::path>& pos);

  bool is_stop_word(std::string_view word) const;
  std::string lemmatize(std::string_view word) const;
  PartOfSpeech tag(std::string_view lemma, std::string_view surface) const;

  std::size_t stop_word_count() const noexcept { return stop_words_.size(); }

private:
  Lexicon() = default;
  bool known(const std::string& word) const { return pos_.contains(word); }

  std::unordered_set<std::string> stop_words_;
  std::unordered_map<std::string, std::string> exceptions_;
  std::unordered_map<std::string, PartOfSpeech> pos_;
};

/// Lowercases, splits on anything that is not a letter or digit, drops stop words,
/// lemmatizes and tags the survivors.
TokenizedPrompt normalize(std::string_view text, const Lexicon& lexicon = Lexicon::builtin());

/// Token counter of the active text encoder, including begin/end markers.
using TokenCounter = std::function<std::size_t(std::string_view)>;

/// Drops the last token of the lowest-priority class present until the joined
/// lemmas fit `window`. A single survivor that still does not fit is truncated
/// character by character. Throws std::invalid_argument if window < 2 or if even
/// the empty text exceeds the window.
std::string prune_to_window(const TokenizedPrompt& prompt, std::size_t window, const TokenCounter& count);

/// strip_instructions -> normalize -> prune_to_window.
std::string condense_prompt(std::string_view prompt, std::size_t window, const TokenCounter& count,
                            const PhraseBlacklist& list = PhraseBlacklist::defaults(),
                            const Lexicon& lexicon = Lexicon::builtin());

}  // namespace semfilter
