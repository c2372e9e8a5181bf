#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace recon {

using TokenId = std::uint32_t;

inline constexpr std::uint32_t kDefaultVocabSize = 65536;

/// Token ids of one text, all below vocab_size.
struct TokenSeq {
  std::vector<TokenId> tokens;
  std::uint32_t vocab_size = kDefaultVocabSize;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
  std::span<const TokenId> view() const noexcept { return tokens; }

  /// Contiguous sub-sequence [start, end).
  TokenSeq slice(std::size_t start, std::size_t end) const;

  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
};

struct Document {
  std::string id;
  std::string text;
  std::map<std::string, std::string> meta;

  friend bool operator==(const Document&, const Document&) = default;
};

/// Hash id of one already-lowercased surface token: FNV-1a 64 mod vocab_size.
TokenId token_id(std::string_view surface, std::uint32_t vocab_size) noexcept;

/// Lowercases ASCII, splits on runs of non-alphanumeric bytes and hashes each
/// surface token. Bytes >= 0x80 count as alphanumeric so UTF-8 words stay whole.
/// Throws EmptySequenceError when nothing survives splitting.
TokenSeq tokenize(std::string_view text, std::uint32_t vocab_size);

/// Reads one {"id": ..., "text": ...} object per line. Blank lines are ignored.
/// Throws ParseError (with line number) on malformed lines and
/// DuplicateIdError on a repeated id.
std::vector<Document> ingest_jsonl(const std::filesystem::path& path);

void write_jsonl(const std::filesystem::path& path, std::span<const Document> docs);

/// Tokenizes every document; the error names the offending doc id.
std::vector<TokenSeq> tokenize_corpus(std::span<const Document> docs, std::uint32_t vocab_size);

}  // namespace recon
