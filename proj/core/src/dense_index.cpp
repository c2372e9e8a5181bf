#include "recon/dense_index.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <fstream>
#include <set>

#include "recon/error.hpp"
#include "recon/parallel.hpp"

namespace recon {

DenseIndex build_index(const EncoderParams& params, std::span<const Document> corpus) {
  if (corpus.empty()) throw ConfigError("build_index: empty corpus");
  const auto tokens = tokenize_corpus(corpus, static_cast<std::uint32_t>(params.vocab_size()));
  DenseIndex index;
  index.matrix = Matrix(corpus.size(), params.dim());
  std::set<std::string> seen;
  for (const auto& doc : corpus) {
    if (!seen.insert(doc.id).second) throw DuplicateIdError(doc.id, 0);
    index.doc_ids.push_back(doc.id);
  }
  parallel_for(corpus.size(), [&](std::size_t i) {
    const auto e = encode(params, tokens[i]);
    std::copy(e.begin(), e.end(), index.matrix.row(i).begin());
  });
  return index;
}

std::vector<ScoredDoc> search(const DenseIndex& index, std::span<const double> query, std::size_t k) {
  if (k == 0) throw ConfigError("search: k must be at least 1");
  if (query.size() != index.matrix.cols()) throw DimensionError("search: query dimension mismatch");
  std::vector<ScoredDoc> ranked;
  ranked.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    ranked.push_back({index.doc_ids[i], similarity(index.matrix.row(i), query)});
  }
  const std::size_t keep = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                    ranks_before);
  ranked.resize(keep);
  return ranked;
}

RankedRun dense_run(const EncoderParams& params, const DenseIndex& index,
                    std::span<const Document> queries, std::size_t k) {
  const auto tokens = tokenize_corpus(queries, static_cast<std::uint32_t>(params.vocab_size()));
  std::vector<std::vector<ScoredDoc>> results(queries.size());
  parallel_for(queries.size(), [&](std::size_t q) {
    results[q] = search(index, encode(params, tokens[q]), k);
  });
  RankedRun run;
  for (std::size_t q = 0; q < queries.size(); ++q) run[queries[q].id] = std::move(results[q]);
  return run;
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ParseError("index file truncated", 0);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

}  // namespace

void save_index(const std::filesystem::path& path, const DenseIndex& index) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write index " + path.string());
  out.write("RIDX", 4);
  const std::uint32_t version = 1;
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((version >> (8 * i)) & 0xff));
  put_u64(out, index.size());
  put_u64(out, index.matrix.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    put_u64(out, index.doc_ids[i].size());
    out.write(index.doc_ids[i].data(), static_cast<std::streamsize>(index.doc_ids[i].size()));
    for (double v : index.matrix.row(i)) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw IoError("failed writing index " + path.string());
}

DenseIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open index " + path.string());
  std::array<char, 8> header{};
  if (!in.read(header.data(), 8) || std::string(header.data(), 4) != "RIDX" || header[4] != 1) {
    throw ParseError(path.string() + ": not a dense index file", 0);
  }
  const auto rows = get_u64(in);
  const auto cols = get_u64(in);
  DenseIndex index;
  index.matrix = Matrix(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto len = get_u64(in);
    if (len > (1u << 20)) throw ParseError("implausible doc id length", 0);
    std::string id(len, '\0');
    if (!in.read(id.data(), static_cast<std::streamsize>(len))) throw ParseError("index truncated", 0);
    index.doc_ids.push_back(std::move(id));
    for (double& v : index.matrix.row(i)) v = std::bit_cast<double>(get_u64(in));
  }
  return index;
}

}  // namespace recon
