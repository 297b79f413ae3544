#ifndef R2F_VLN_HPP
#define R2F_VLN_HPP

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "r2f/embedding_space.hpp"
#include "r2f/policy.hpp"

namespace r2f
{

struct Grammar
{
  std::vector<std::string> relations{"near", "next to", "beside", "close to", "by",
                                     "between", "around", "in front of", "behind"};
  std::vector<std::string> stoplist{"a",    "an",    "the",   "it",    "its",   "this", "that",
                                    "left", "right", "front", "back", "above", "below", "located"};

  static Grammar from_json(const nlohmann::json & j);
  static Grammar load(const std::string & path);
  nlohmann::json to_json() const;
};

struct ParsedInstruction
{
  std::string target_head;
  std::vector<std::string> target_attributes;
  std::vector<std::string> landmarks;

  /// "attr ... head near l1, l2, ..." (parses back to the same structure).
  std::string render() const;
  bool operator==(const ParsedInstruction &) const = default;
};

/// Keyword-split grammar. Throws Unparseable when nothing remains of the
/// target after filtering.
ParsedInstruction parse_instruction(const std::string & text, const Grammar & grammar = {});

/// Splits the target phrase into (registered concept, attributes) using the
/// longest registered suffix; falls back to (head, attributes) unchanged.
std::pair<std::string, std::vector<std::string>> resolve_target(const ParsedInstruction & parsed,
                                                                const ConceptRegistry & registry);

struct VlnConfig
{
  double tau_syn = 0.60;
  int k_syn = 5;
  double tau_l = 0.11;
  double synonym_cos = 0.7;
  int sweep_turns = 24;

  void validate() const;
};

struct LandmarkEmbeddings
{
  std::string landmark;
  std::vector<std::pair<std::string, Embedding>> embeddings;  // original first
};

struct LandmarkSet
{
  std::vector<LandmarkEmbeddings> entries;
  bool empty() const { return entries.empty(); }
};

/// Original plus the top (k_syn - 1) variants with cosine >= tau_syn to it,
/// ordered by descending cosine (stable on ties).
std::vector<std::pair<std::string, Embedding>> filter_variants(
  const std::pair<std::string, Embedding> & original,
  const std::vector<std::pair<std::string, Embedding>> & variants, double tau_syn, int k_syn);

LandmarkSet expand_landmarks(const ParsedInstruction & parsed, const SynonymLexicon & lexicon,
                             const ConceptRegistry & registry, const VlnConfig & cfg = {});

/// Per-landmark max similarity over every pixel of one frame.
std::vector<double> landmark_maxima(const Observation & obs, const LandmarkSet & landmarks);

bool verify_candidate(std::span<const Observation> sweep, const LandmarkSet & landmarks, double tau_l);

/// step_policy with landmark verification: a confirmed detection triggers a
/// full turn-in-place sweep before the approach; rejected candidates are
/// invalidated and suppressed.
Action vln_step_policy(PolicyInputs in, const LandmarkSet & landmarks, const VlnConfig & cfg,
                       PolicyState & state);

}  // namespace r2f

#endif  // R2F_VLN_HPP
