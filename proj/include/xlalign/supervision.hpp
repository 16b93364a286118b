#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xlalign/embedding.hpp"
#include "xlalign/matrix.hpp"

namespace xlalign {

struct BilingualDictionary {
  std::vector<std::pair<std::string, std::string>> entries;
};

struct DictionaryLoadStats {
  std::size_t valid = 0;
  std::size_t duplicates = 0;
  std::size_t skipped = 0;  // blank-or-multiword lines
};

// MUSE convention: one "source_word target_word" pair per line, any mix
// of tabs and spaces. Lines that do not split into exactly two tokens
// are skipped (anchors are per-token, so multi-word sides are unusable).
BilingualDictionary load_dictionary(const std::string& path,
                                    DictionaryLoadStats* stats = nullptr);

using LinkSet = std::set<std::pair<std::int32_t, std::int32_t>>;

struct SentencePair {
  std::vector<std::string> source;
  std::vector<std::string> target;
};

struct ParallelCorpus {
  std::vector<SentencePair> sentence_pairs;
  std::optional<std::vector<LinkSet>> alignments;
};

// Two line-aligned token files, whitespace-separated.
ParallelCorpus load_parallel_corpus(const std::string& src_path,
                                    const std::string& tgt_path);

// Pharaoh format: one line per sentence pair of space-separated "i-j"
// links, 0-based.
std::vector<LinkSet> load_pharaoh(const std::string& path);
void write_pharaoh(const std::vector<LinkSet>& alignments,
                   const std::string& path);

// IBM Model 1 translation table with an exponential diagonal positional
// prior, trained by EM. A virtual NULL token occupies source position -1.
class WordAlignmentModel {
 public:
  // p(tgt | src); 0 when the pair was never seen.
  double translation_prob(const std::string& src, const std::string& tgt) const;
  double null_prob(const std::string& tgt) const;
  bool knows_source(const std::string& src) const;
  bool knows_target(const std::string& tgt) const;
  double diagonal_tension() const { return diagonal_tension_; }
  // Corpus log-likelihood recorded at the start of each EM iteration.
  const std::vector<double>& log_likelihoods() const { return log_likelihoods_; }

 private:
  friend WordAlignmentModel train_word_aligner(const ParallelCorpus&, int,
                                               double);
  std::map<std::string, std::map<std::string, double>> table_;
  std::map<std::string, double> null_table_;
  std::set<std::string> target_vocab_;
  double diagonal_tension_ = 0.0;
  std::vector<double> log_likelihoods_;
};

WordAlignmentModel train_word_aligner(const ParallelCorpus& corpus,
                                      int iterations,
                                      double diagonal_tension);

enum class AlignMode { forward, backward, intersection };

// forward: argmax target position per source token; backward: argmax
// source position (including NULL) per target token, NULL links dropped;
// intersection: links present in both.
ParallelCorpus align_corpus(const WordAlignmentModel& model,
                            const ParallelCorpus& corpus, AlignMode mode);

// Alignment error rate with all gold links treated as sure:
// 1 - 2|P ∩ G| / (|P| + |G|), totals over the corpus.
double compute_aer(const std::vector<LinkSet>& predicted,
                   const std::vector<LinkSet>& gold);

enum class PairProvenance { dictionary_anchor, parallel_contextual };

struct PairColumnRef {
  OccurrenceKey src;
  OccurrenceKey tgt;
};

// Row-paired supervision matrices: column k of xs and of xt are one
// translation pair. occurrence_refs is populated for contextual pairs
// (needed to tie fine-tuning results back to occurrences) and empty for
// anchor pairs.
struct TranslationPairs {
  std::int32_t layer = 0;
  Matrix xs;
  Matrix xt;
  std::vector<PairProvenance> provenance;
  std::vector<PairColumnRef> occurrence_refs;

  std::size_t size() const { return provenance.size(); }
};

TranslationPairs pairs_from_dictionary(const BilingualDictionary& dict,
                                       const AnchorTable& src_anchors,
                                       const AnchorTable& tgt_anchors,
                                       std::size_t* skipped_out = nullptr);

TranslationPairs pairs_from_parallel(const ParallelCorpus& corpus,
                                     const EmbeddingSpace& src_space,
                                     const EmbeddingSpace& tgt_space,
                                     std::int32_t layer,
                                     std::size_t* skipped_out = nullptr);

}  // namespace xlalign
