#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace semfilter {

/// Byte-level BPE tokenizer compatible with the CLIP text encoder vocabulary
/// (merges file, optionally gzip-compressed).
class ClipTokenizer {
public:
  static ClipTokenizer from_file(const std::filesystem::path& merges_path);

  /// BPE ids for `text` without begin/end markers.
  std::vector<std::int64_t> encode(std::string_view text) const;

  /// [sot] + ids + [eot], truncated to `context` (last slot forced to eot) and zero-padded.
  std::vector<std::int64_t> tokenize(std::string_view text, std::size_t context) const;

  /// Tokens the encoder would emit, markers included, before any truncation.
  std::size_t count(std::string_view text) const { return encode(text).size() + 2; }

  std::int64_t sot() const noexcept { return sot_; }
  std::int64_t eot() const noexcept { return eot_; }
  std::size_t vocab_size() const noexcept { return encoder_.size(); }

private:
  std::vector<std::string> bpe(const std::string& token) const;

  std::unordered_map<std::string, std::int64_t> encoder_;
  std::unordered_map<std::string, int> ranks_;  // "first second" -> merge rank
  std::string byte_symbol_[256];
  std::int64_t sot_ = 0;
  std::int64_t eot_ = 0;
};

}  // namespace semfilter
