#include "recon/corpus.hpp"

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "recon/error.hpp"
#include "recon/rng.hpp"

namespace recon {

TokenSeq TokenSeq::slice(std::size_t start, std::size_t end) const {
  if (start > end || end > tokens.size()) throw ConfigError("TokenSeq::slice out of range");
  return TokenSeq{{tokens.begin() + static_cast<std::ptrdiff_t>(start),
                   tokens.begin() + static_cast<std::ptrdiff_t>(end)},
                  vocab_size};
}

TokenId token_id(std::string_view surface, std::uint32_t vocab_size) noexcept {
  return static_cast<TokenId>(fnv1a64(surface) % vocab_size);
}

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

TokenSeq tokenize(std::string_view text, std::uint32_t vocab_size) {
  if (vocab_size < 2) throw ConfigError("tokenize: vocabulary size must be at least 2");
  TokenSeq seq{{}, vocab_size};
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      seq.tokens.push_back(token_id(word, vocab_size));
      word.clear();
    }
  };
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      word.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  if (seq.empty()) throw EmptySequenceError("tokenize: no tokens in text");
  return seq;
}

std::vector<Document> ingest_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  std::vector<Document> docs;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);
    auto id_it = obj.find("id");
    auto text_it = obj.find("text");
    if (id_it == obj.end() || !id_it->is_string()) {
      throw ParseError("missing string field \"id\"", line_no);
    }
    if (text_it == obj.end() || !text_it->is_string()) {
      throw ParseError("missing string field \"text\"", line_no);
    }
    Document doc;
    doc.id = id_it->get<std::string>();
    doc.text = text_it->get<std::string>();
    if (doc.id.empty()) throw ParseError("empty id", line_no);
    if (doc.text.empty()) throw ParseError("empty text for id \"" + doc.id + "\"", line_no);
    if (!seen.insert(doc.id).second) throw DuplicateIdError(doc.id, line_no);
    if (auto meta = obj.find("meta"); meta != obj.end() && meta->is_object()) {
      for (const auto& [key, value] : meta->items()) {
        doc.meta[key] = value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

void write_jsonl(const std::filesystem::path& path, std::span<const Document> docs) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& doc : docs) {
    nlohmann::json obj{{"id", doc.id}, {"text", doc.text}};
    if (!doc.meta.empty()) obj["meta"] = doc.meta;
    out << obj.dump() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<TokenSeq> tokenize_corpus(std::span<const Document> docs, std::uint32_t vocab_size) {
  std::vector<TokenSeq> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    try {
      out.push_back(tokenize(doc.text, vocab_size));
    } catch (const EmptySequenceError&) {
      throw EmptySequenceError("document \"" + doc.id + "\" has no tokens");
    }
  }
  return out;
}

}  // namespace recon
