#include "recon/run.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "recon/error.hpp"

namespace recon {

namespace {

std::string shortest(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> fields;
  std::string field;
  while (ss >> field) fields.push_back(field);
  return fields;
}

}  // namespace

void write_trec_run(const std::filesystem::path& path, const RankedRun& run,
                    const std::string& tag) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write run file " + path.string());
  for (const auto& [qid, docs] : run) {
    std::size_t rank = 1;
    for (const auto& doc : docs) {
      out << qid << " Q0 " << doc.doc_id << ' ' << rank++ << ' ' << shortest(doc.score) << ' '
          << tag << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

RankedRun read_trec_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open run file " + path.string());
  RankedRun run;
  std::map<std::string, std::set<std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 6) throw ParseError("expected `qid Q0 docid rank score tag`", line_no);
    ScoredDoc doc;
    doc.doc_id = fields[2];
    try {
      std::size_t used = 0;
      doc.score = std::stod(fields[4], &used);
      if (used != fields[4].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("bad score \"" + fields[4] + "\"", line_no);
    }
    if (!seen[fields[0]].insert(doc.doc_id).second) {
      throw ParseError("duplicate doc \"" + doc.doc_id + "\" for query " + fields[0], line_no);
    }
    run[fields[0]].push_back(std::move(doc));
  }
  // Rank order is re-derived from scores so foreign runs follow the tie rule.
  for (auto& [qid, docs] : run) std::sort(docs.begin(), docs.end(), ranks_before);
  return run;
}

void write_qrels(const std::filesystem::path& path, const Qrels& qrels) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write qrels file " + path.string());
  for (const auto& [qid, judged] : qrels) {
    for (const auto& [doc_id, gain] : judged) out << qid << "\t0\t" << doc_id << '\t' << gain << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Qrels read_qrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open qrels file " + path.string());
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 4) throw ParseError("expected `qid 0 docid gain`", line_no);
    int gain = 0;
    auto [ptr, ec] = std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), gain);
    if (ec != std::errc{} || ptr != fields[3].data() + fields[3].size() || gain < 0) {
      throw ParseError("bad gain \"" + fields[3] + "\"", line_no);
    }
    qrels[fields[0]][fields[2]] = gain;
  }
  return qrels;
}

}  // namespace recon
