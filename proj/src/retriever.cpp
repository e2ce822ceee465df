#include "cwebench/retriever.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "cwebench/errors.hpp"

namespace cwebench {

namespace {

std::unordered_map<std::string, long> token_counts(std::string_view text) {
  std::unordered_map<std::string, long> counts;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) {
      ++counts[token];
      token.clear();
    }
  };
  for (char c : text) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc))
      token.push_back(static_cast<char>(std::tolower(uc)));
    else
      flush();
  }
  flush();
  return counts;
}

}  // namespace

std::vector<DocChunk> chunk_docs(const std::vector<RetrievalDoc>& docs,
                                 std::size_t chunk_size, std::size_t overlap) {
  if (chunk_size == 0 || overlap >= chunk_size)
    throw Error(ErrorCode::BadChunkParams,
                "need 0 <= overlap < chunk_size, got overlap=" + std::to_string(overlap) +
                    " chunk_size=" + std::to_string(chunk_size));

  const std::size_t stride = chunk_size - overlap;
  std::vector<DocChunk> chunks;
  for (const auto& doc : docs) {
    if (doc.text.empty())
      throw Error(ErrorCode::BadChunkParams, "document '" + doc.doc_id + "' is empty");
    int index = 0;
    for (std::size_t start = 0;; start += stride) {
      std::size_t end = std::min(start + chunk_size, doc.text.size());
      chunks.push_back({doc.doc_id, index++, doc.text.substr(start, end - start), start, end});
      if (end == doc.text.size()) break;
    }
  }
  return chunks;
}

double lexical_score(std::string_view query, std::string_view chunk_text) {
  auto q = token_counts(query);
  auto c = token_counts(chunk_text);
  if (q.empty() || c.empty()) return 0.0;

  double dot = 0.0;
  for (const auto& [token, count] : q) {
    auto it = c.find(token);
    if (it != c.end()) dot += static_cast<double>(count) * it->second;
  }
  if (dot == 0.0) return 0.0;

  auto sum_squares = [](const std::unordered_map<std::string, long>& counts) {
    double s = 0.0;
    for (const auto& [token, count] : counts) s += static_cast<double>(count) * count;
    return s;
  };
  // sqrt of the product (not product of sqrts) keeps identical vectors at 1.0
  return dot / std::sqrt(sum_squares(q) * sum_squares(c));
}

ContextBundle build_context(std::string_view query, const std::vector<DocChunk>& chunks,
                            int k, const ChunkScorer& scorer) {
  ContextBundle bundle;
  if (k <= 0 || chunks.empty()) return bundle;

  std::vector<double> scores(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i)
    scores[i] = scorer ? scorer(query, chunks[i]) : lexical_score(query, chunks[i].text);

  std::vector<std::size_t> order(chunks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (chunks[a].doc_id != chunks[b].doc_id) return chunks[a].doc_id < chunks[b].doc_id;
    return chunks[a].index < chunks[b].index;
  });

  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  for (std::size_t i = 0; i < take; ++i) {
    const DocChunk& chunk = chunks[order[i]];
    if (!bundle.rendered.empty()) bundle.rendered += kContextDelimiter;
    bundle.rendered += chunk.text;
    bundle.chunks.push_back(chunk);
  }
  return bundle;
}

}  // namespace cwebench
