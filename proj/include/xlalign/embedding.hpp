#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "xlalign/numeric.hpp"

namespace xlalign {

struct OccurrenceKey {
  std::int32_t layer = 0;
  std::int64_t sentence_id = 0;
  std::int64_t position = 0;

  auto operator<=>(const OccurrenceKey&) const = default;
  std::string to_string() const;
};

struct OccurrenceRecord {
  std::string token;
  std::int32_t layer = 0;
  std::int64_t sentence_id = 0;
  std::int64_t position = 0;
  Vec vector;

  OccurrenceKey key() const { return {layer, sentence_id, position}; }
};

// Per-language store of contextual embeddings, indexed by occurrence key
// and by (layer, token). Immutable once loaded; record order is preserved
// so dumps round-trip byte-for-byte.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;
  EmbeddingSpace(std::string language, std::size_t dim)
      : language_(std::move(language)), dim_(dim) {}

  void add_occurrence(OccurrenceRecord rec);

  const std::string& language() const { return language_; }
  std::size_t dim() const { return dim_; }
  const std::vector<OccurrenceRecord>& occurrences() const {
    return occurrences_;
  }
  const std::set<std::int32_t>& layers() const { return layers_; }
  const std::set<std::string>& vocab() const { return vocab_; }

  // Throws DataError naming the key when absent.
  const Vec& lookup(std::int32_t layer, std::int64_t sentence_id,
                    std::int64_t position) const;
  const Vec& lookup(const OccurrenceKey& key) const {
    return lookup(key.layer, key.sentence_id, key.position);
  }
  // nullptr when absent, for callers that skip-and-count.
  const Vec* find(std::int32_t layer, std::int64_t sentence_id,
                  std::int64_t position) const;
  const Vec* find(const OccurrenceKey& key) const {
    return find(key.layer, key.sentence_id, key.position);
  }

  // Occurrence indices of a token at a layer, in file order.
  const std::vector<std::size_t>* occurrences_of(std::int32_t layer,
                                                 const std::string& token) const;

 private:
  std::string language_;
  std::size_t dim_ = 0;
  std::vector<OccurrenceRecord> occurrences_;
  std::map<OccurrenceKey, std::size_t> by_key_;
  std::map<std::pair<std::int32_t, std::string>, std::vector<std::size_t>>
      by_layer_token_;
  std::set<std::int32_t> layers_;
  std::set<std::string> vocab_;
};

struct Anchor {
  Vec vector;
  std::int64_t count = 0;
};

// Context-independent word vectors at one layer: the mean of each token's
// occurrence vectors, with the occurrence count alongside.
struct AnchorTable {
  std::string language;
  std::int32_t layer = 0;
  std::size_t dim = 0;
  std::map<std::string, Anchor> anchors;
};

// Contextual dump format: header "CTXDUMP <dim>", then one record per
// line "token<TAB>layer<TAB>sentence_id<TAB>position<TAB>v1 v2 ... vd".
// Lines starting with '#' are comments. Malformed lines are skipped and
// counted; the load fails when they exceed 0.1% of data lines.
EmbeddingSpace load_contextual_dump(const std::string& path,
                                    const std::string& language = "",
                                    std::size_t* malformed_out = nullptr);
void write_contextual_dump(const EmbeddingSpace& space,
                           const std::string& path);

// Per-token mean at one layer; tokens with fewer than min_count
// occurrences are excluded and counted.
AnchorTable compute_anchors(const EmbeddingSpace& space, std::int32_t layer,
                            std::int64_t min_count = 1,
                            std::size_t* excluded_out = nullptr);

// Elementwise mean of a non-empty set of equal-dimension vectors.
Vec average_subwords(const std::vector<Vec>& vectors);

// Anchor table format: header "ANCHORS <language> <layer> <dim>", then
// "token<TAB>count<TAB>v1 ... vd" sorted by token byte order.
void write_anchor_table(const AnchorTable& table, const std::string& path);
AnchorTable load_anchor_table(const std::string& path);

}  // namespace xlalign
