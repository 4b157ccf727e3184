#include "semfilter/clip_tokenizer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>
#include <sstream>

#include <zlib.h>

#include "semfilter/error.hpp"

namespace semfilter {

namespace {

constexpr std::size_t kMergeCount = 49152 - 256 - 2;

std::string utf8(std::uint32_t cp) {
  std::string s;
  if (cp < 0x80) {
    s += static_cast<char>(cp);
  } else if (cp < 0x800) {
    s += static_cast<char>(0xC0 | (cp >> 6));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    s += static_cast<char>(0xE0 | (cp >> 12));
    s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return s;
}

// Reversible byte -> printable code point table used by the CLIP vocabulary.
std::array<std::uint32_t, 256> byte_code_points() {
  std::array<std::uint32_t, 256> table{};
  std::array<bool, 256> direct{};
  auto keep = [&](int lo, int hi) {
    for (int b = lo; b <= hi; ++b) direct[static_cast<std::size_t>(b)] = true;
  };
  keep('!', '~');
  keep(0xA1, 0xAC);
  keep(0xAE, 0xFF);
  std::uint32_t next = 256;
  for (int b = 0; b < 256; ++b) {
    table[static_cast<std::size_t>(b)] = direct[static_cast<std::size_t>(b)] ? static_cast<std::uint32_t>(b) : next++;
  }
  return table;
}

std::string read_maybe_gzip(const std::filesystem::path& path) {
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (f == nullptr) throw IoError("cannot open tokenizer file " + path.string());
  std::string out;
  std::array<char, 1 << 16> buf;
  int n = 0;
  while ((n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()))) > 0) out.append(buf.data(), static_cast<std::size_t>(n));
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw IoError("corrupt tokenizer file " + path.string());
  return out;
}

std::string whitespace_clean_lower(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string html_unescape(std::string s) {
  static const std::pair<const char*, const char*> entities[] = {
      {"&quot;", "\""}, {"&#39;", "'"}, {"&apos;", "'"}, {"&lt;", "<"}, {"&gt;", ">"}, {"&nbsp;", " "}, {"&amp;", "&"}};
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& [from, to] : entities) {
      for (std::size_t at = s.find(from); at != std::string::npos; at = s.find(from, at + 1)) {
        s.replace(at, std::string_view(from).size(), to);
      }
    }
  }
  return s;
}

enum class CharClass { Space, Letter, Digit, Other };

// ASCII classification; every non-ASCII code point counts as a letter.
CharClass classify(unsigned char c) {
  if (c >= 0x80) return CharClass::Letter;
  if (std::isspace(c)) return CharClass::Space;
  if (std::isalpha(c)) return CharClass::Letter;
  if (std::isdigit(c)) return CharClass::Digit;
  return CharClass::Other;
}

// Pre-tokenization equivalent to the CLIP pattern
// <start_of_text>|<end_of_text>|'s|'t|'re|'ve|'m|'ll|'d|\p{L}+|\p{N}|[^\s\p{L}\p{N}]+
std::vector<std::string> pre_tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto starts = [&](std::string_view s) { return text.compare(i, s.size(), s) == 0; };
  while (i < text.size()) {
    if (starts("<start_of_text>") || starts("<end_of_text>")) {
      const std::size_t n = starts("<start_of_text>") ? 15 : 13;
      out.push_back(text.substr(i, n));
      i += n;
      continue;
    }
    bool matched = false;
    for (std::string_view c : {"'s", "'t", "'re", "'ve", "'m", "'ll", "'d"}) {
      if (starts(c)) {
        out.emplace_back(c);
        i += c.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    const CharClass cls = classify(static_cast<unsigned char>(text[i]));
    if (cls == CharClass::Space) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (cls == CharClass::Digit) {
      ++i;
    } else {
      ++i;
      while (i < text.size() && classify(static_cast<unsigned char>(text[i])) == cls) ++i;
    }
    out.push_back(text.substr(start, i - start));
  }
  return out;
}

}  // namespace

ClipTokenizer ClipTokenizer::from_file(const std::filesystem::path& merges_path) {
  const std::string content = read_maybe_gzip(merges_path);
  ClipTokenizer tok;
  const auto code_points = byte_code_points();
  std::vector<std::string> vocab;
  vocab.reserve(49408);
  for (int b = 0; b < 256; ++b) tok.byte_symbol_[b] = utf8(code_points[static_cast<std::size_t>(b)]);
  // Base symbols: printable bytes first, then the remapped ones, each in byte order.
  {
    std::array<bool, 256> direct{};
    for (int b = '!'; b <= '~'; ++b) direct[static_cast<std::size_t>(b)] = true;
    for (int b = 0xA1; b <= 0xAC; ++b) direct[static_cast<std::size_t>(b)] = true;
    for (int b = 0xAE; b <= 0xFF; ++b) direct[static_cast<std::size_t>(b)] = true;
    for (int b = 0; b < 256; ++b) {
      if (direct[static_cast<std::size_t>(b)]) vocab.push_back(tok.byte_symbol_[b]);
    }
    for (int b = 0; b < 256; ++b) {
      if (!direct[static_cast<std::size_t>(b)]) vocab.push_back(tok.byte_symbol_[b]);
    }
  }
  for (std::size_t i = 0; i < 256; ++i) vocab.push_back(vocab[i] + "</w>");

  std::istringstream lines(content);
  std::string line;
  std::getline(lines, line);  // version header
  std::size_t rank = 0;
  while (rank < kMergeCount && std::getline(lines, line)) {
    std::istringstream fields(line);
    std::string a, b;
    if (!(fields >> a >> b)) throw IoError("malformed merge line " + std::to_string(rank + 2) + " in " + merges_path.string());
    tok.ranks_.emplace(a + " " + b, static_cast<int>(rank));
    vocab.push_back(a + b);
    ++rank;
  }
  if (rank < 1) throw IoError("tokenizer file has no merges: " + merges_path.string());
  vocab.emplace_back("<start_of_text>");
  vocab.emplace_back("<end_of_text>");
  for (std::size_t i = 0; i < vocab.size(); ++i) tok.encoder_[vocab[i]] = static_cast<std::int64_t>(i);
  tok.sot_ = tok.encoder_.at("<start_of_text>");
  tok.eot_ = tok.encoder_.at("<end_of_text>");
  return tok;
}

std::vector<std::string> ClipTokenizer::bpe(const std::string& token) const {
  if (token == "<start_of_text>" || token == "<end_of_text>") return {token};
  // Split into UTF-8 code points; the last one carries the end-of-word marker.
  std::vector<std::string> word;
  for (std::size_t i = 0; i < token.size();) {
    std::size_t len = 1;
    const auto lead = static_cast<unsigned char>(token[i]);
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    word.push_back(token.substr(i, len));
    i += len;
  }
  word.back() += "</w>";

  while (word.size() > 1) {
    int best_rank = std::numeric_limits<int>::max();
    std::string best_first, best_second;
    for (std::size_t i = 0; i + 1 < word.size(); ++i) {
      const auto it = ranks_.find(word[i] + " " + word[i + 1]);
      if (it != ranks_.end() && it->second < best_rank) {
        best_rank = it->second;
        best_first = word[i];
        best_second = word[i + 1];
      }
    }
    if (best_rank == std::numeric_limits<int>::max()) break;
    std::vector<std::string> merged;
    merged.reserve(word.size());
    for (std::size_t i = 0; i < word.size();) {
      if (i + 1 < word.size() && word[i] == best_first && word[i + 1] == best_second) {
        merged.push_back(best_first + best_second);
        i += 2;
      } else {
        merged.push_back(word[i]);
        ++i;
      }
    }
    word = std::move(merged);
  }
  return word;
}

std::vector<std::int64_t> ClipTokenizer::encode(std::string_view text) const {
  const std::string clean = whitespace_clean_lower(html_unescape(std::string(text)));
  std::vector<std::int64_t> ids;
  for (const auto& piece : pre_tokenize(clean)) {
    std::string mapped;
    if (piece == "<start_of_text>" || piece == "<end_of_text>") {
      mapped = piece;
    } else {
      for (unsigned char b : piece) mapped += byte_symbol_[b];
    }
    for (const auto& sym : bpe(mapped)) {
      const auto it = encoder_.find(sym);
      if (it == encoder_.end()) throw BackendError("tokenizer produced an unknown symbol '" + sym + "'");
      ids.push_back(it->second);
    }
  }
  return ids;
}

std::vector<std::int64_t> ClipTokenizer::tokenize(std::string_view text, std::size_t context) const {
  if (context < 2) throw std::invalid_argument("context must hold begin and end markers");
  std::vector<std::int64_t> ids;
  ids.reserve(context);
  ids.push_back(sot_);
  const auto body = encode(text);
  ids.insert(ids.end(), body.begin(), body.end());
  ids.push_back(eot_);
  if (ids.size() > context) {
    ids.resize(context);
    ids.back() = eot_;
  }
  ids.resize(context, 0);
  return ids;
}

}  // namespace semfilter
