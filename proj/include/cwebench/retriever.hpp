#ifndef CWEBENCH_RETRIEVER_HPP
#define CWEBENCH_RETRIEVER_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "cwebench/cwe_catalog.hpp"

namespace cwebench {

inline constexpr std::size_t kDefaultChunkSize = 1000;
inline constexpr std::size_t kDefaultChunkOverlap = 200;

// Joins the selected chunk texts inside the rendered context.
inline constexpr const char* kContextDelimiter = "\n\n";

struct DocChunk {
  std::string doc_id;
  int index = 0;       // position of this chunk within its document
  std::string text;
  std::size_t begin = 0;  // char span [begin, end) in the source document
  std::size_t end = 0;
};

struct ContextBundle {
  std::vector<DocChunk> chunks;  // descending score, ties by (doc_id, index)
  std::string rendered;
};

// Sliding-window chunker: stride = chunk_size - overlap, so consecutive chunks
// of one document share exactly `overlap` characters.
std::vector<DocChunk> chunk_docs(const std::vector<RetrievalDoc>& docs,
                                 std::size_t chunk_size = kDefaultChunkSize,
                                 std::size_t overlap = kDefaultChunkOverlap);

// Cosine similarity over lowercase alphanumeric token frequency vectors.
double lexical_score(std::string_view query, std::string_view chunk_text);

using ChunkScorer = std::function<double(std::string_view query, const DocChunk& chunk)>;

// Scores every chunk against the query and keeps the top k. A null scorer
// means the lexical default.
ContextBundle build_context(std::string_view query, const std::vector<DocChunk>& chunks,
                            int k, const ChunkScorer& scorer = nullptr);

}  // namespace cwebench

#endif  // CWEBENCH_RETRIEVER_HPP
