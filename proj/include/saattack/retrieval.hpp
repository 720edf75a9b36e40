#pragma once

// Cosine-similarity retrieval, recall-style attack success rates and
// source -> target transfer evaluation.

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "saattack/core.hpp"
#include "saattack/encoders.hpp"
#include "saattack/pipeline.hpp"

namespace saattack {

class RetrievalGallery {
 public:
  /// Ids must be unique; all embeddings share one dimension.
  void add(std::string id, EmbeddingVector embedding);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  bool contains(const std::string& id) const { return index_.contains(id); }
  const std::vector<std::pair<std::string, EmbeddingVector>>& items() const { return items_; }

 private:
  std::vector<std::pair<std::string, EmbeddingVector>> items_;
  std::map<std::string, std::size_t> index_;
};

/// Ids of the K most similar items, descending similarity, ties by ascending id.
std::vector<std::string> retrieve_topk(const EmbeddingVector& query, const RetrievalGallery& gallery,
                                       int k);

struct RetrievalQuery {
  std::string id;
  EmbeddingVector embedding;
};

/// Query id -> ids of its correct gallery counterparts.
using Pairing = std::map<std::string, std::set<std::string>>;

/// 100 * (#queries with no correct counterpart in their top-K) / #queries.
double asr_at_k(std::span<const RetrievalQuery> queries, const RetrievalGallery& gallery,
                const Pairing& pairing, int k);

/// One dataset entry: an image with one or more captions.
struct EvalSample {
  std::string id;
  ImageTensor image;
  std::vector<TextSample> captions;
};

enum class AsrDenominator {
  AllQueries,        // every adversarial query counts
  PreAttackCorrect,  // only queries whose benign version ranks a correct item first
};

std::string_view to_string(AsrDenominator d);
AsrDenominator parse_asr_denominator(std::string_view s);

struct EvalOptions {
  std::vector<int> ks = {1, 5, 10};
  AsrDenominator denominator = AsrDenominator::AllQueries;
};

struct AttackReport {
  std::string method;
  std::string source;  // short labels; default to the descriptors
  std::string target;
  std::string source_descriptor;
  std::string target_descriptor;
  /// "TR_R@K" then "IR_R@K" for each K, in that order. Values in [0, 100].
  std::vector<std::pair<std::string, double>> metrics;
  std::size_t sample_count = 0;
  AsrDenominator denominator = AsrDenominator::AllQueries;
  AttackConfig config;

  double metric(const std::string& name) const;
};

/// Text id used for caption `c` of entry `entry_id`.
std::string caption_id(const std::string& entry_id, std::size_t c);

/// pairs[i] was crafted from dataset[i] (its first caption). Under the target
/// encoder:
///  - TR: adversarial images query the text gallery, in which each entry's
///    first caption is replaced by its adversarial text; correct if any of
///    the entry's captions is in the top-K.
///  - IR: adversarial texts query the gallery of adversarial images.
AttackReport transfer_evaluate(std::span<const AdversarialPair> pairs, const std::string& method,
                               const std::string& source_desc, const DualEncoder& target,
                               std::span<const EvalSample> dataset, const EvalOptions& opts = {});

}  // namespace saattack
