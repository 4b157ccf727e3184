#include "semfilter/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "semfilter/error.hpp"

namespace semfilter {

const char* to_string(PartOfSpeech pos) noexcept {
  switch (pos) {
    case PartOfSpeech::Noun: return "NOUN";
    case PartOfSpeech::Adj: return "ADJ";
    case PartOfSpeech::Verb: return "VERB";
    case PartOfSpeech::Other: return "OTHER";
  }
  return "OTHER";
}

std::string TokenizedPrompt::joined_lemmas() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.lemma;
  }
  return out;
}

namespace {

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Letters, digits and any non-ASCII byte (UTF-8 sequences stay inside words).
bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    // No space before punctuation that used to follow a removed phrase.
    if (pending_space && !(c == '.' || c == ',' || c == '?' || c == '!' || c == ';' || c == ':')) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

}  // namespace

PhraseBlacklist::PhraseBlacklist(std::vector<std::string> phrases) : phrases_(std::move(phrases)) {
  std::erase_if(phrases_, [](const std::string& p) { return p.empty(); });
  std::stable_sort(phrases_.begin(), phrases_.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
}

const PhraseBlacklist& PhraseBlacklist::defaults() {
  static const PhraseBlacklist list({
      "Answer the question using a single word or phrase",
      "Answer with the option's letter from the given choices directly",
      "Answer with the option letter from the given choices directly",
      "Please select the correct option",
      "Please select the correct answer from the options above",
      "Please answer yes or no",
      "Answer yes or no",
      "Please answer the question",
      "Answer the following question",
      "Choose the correct answer",
      "Select the best answer",
      "Answer with a single word",
      "Please provide a short answer",
      "Think step by step",
  });
  return list;
}

PhraseBlacklist PhraseBlacklist::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open blacklist " + path.string());
  std::vector<std::string> phrases;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t");
    phrases.push_back(line.substr(first, last - first + 1));
  }
  return PhraseBlacklist(std::move(phrases));
}

std::string strip_instructions(std::string_view prompt, const PhraseBlacklist& list) {
  std::string text(prompt);
  bool removed = false;
  for (const auto& phrase : list.phrases()) {
    const std::string needle = to_lower(phrase);
    for (;;) {
      const std::string haystack = to_lower(text);
      const auto at = haystack.find(needle);
      if (at == std::string::npos) break;
      std::size_t end = at + needle.size();
      while (end < text.size() && std::string_view(".!?,;:").find(text[end]) != std::string_view::npos) ++end;
      text.erase(at, end - at);
      removed = true;
    }
  }
  return removed ? collapse_whitespace(text) : text;
}

TokenizedPrompt normalize(std::string_view text, const Lexicon& lexicon) {
  TokenizedPrompt out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && is_word_byte(text[i])) ++i;
    if (start == i) continue;
    std::string word = to_lower(text.substr(start, i - start));
    if (lexicon.is_stop_word(word)) continue;
    std::string lemma = lexicon.lemmatize(word);
    const PartOfSpeech pos = lexicon.tag(lemma, word);
    out.tokens.push_back({std::move(word), std::move(lemma), pos});
  }
  out.token_count_estimate = out.tokens.size() + 2;
  return out;
}

std::string prune_to_window(const TokenizedPrompt& prompt, std::size_t window, const TokenCounter& count) {
  if (window < 2) throw std::invalid_argument("prune_to_window: window must leave room for begin/end markers");
  std::vector<PromptToken> kept = prompt.tokens;
  auto joined = [&] {
    std::string s;
    for (const auto& t : kept) {
      if (!s.empty()) s += ' ';
      s += t.lemma;
    }
    return s;
  };

  std::string text = joined();
  while (count(text) > window && kept.size() > 1) {
    const int lowest = priority(std::min_element(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
                                  return priority(a.pos) < priority(b.pos);
                                })->pos);
    const auto victim = std::find_if(kept.rbegin(), kept.rend(),
                                     [&](const PromptToken& t) { return priority(t.pos) == lowest; });
    kept.erase(std::next(victim).base());
    text = joined();
  }
  // A single over-long word is cut back like a tokenizer truncation would.
  while (count(text) > window && !text.empty()) {
    // Drop the whole last UTF-8 character: continuation bytes plus their lead byte.
    std::size_t start = text.size() - 1;
    while (start > 0 && (static_cast<unsigned char>(text[start]) & 0xC0) == 0x80) --start;
    text.erase(start);
  }
  if (count(text) > window) throw std::invalid_argument("prune_to_window: window smaller than an empty prompt");
  return text;
}

std::string condense_prompt(std::string_view prompt, std::size_t window, const TokenCounter& count,
                            const PhraseBlacklist& list, const Lexicon& lexicon) {
  return prune_to_window(normalize(strip_instructions(prompt, list), lexicon), window, count);
}

}  // namespace semfilter
