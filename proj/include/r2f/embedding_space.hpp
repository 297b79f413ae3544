#ifndef R2F_EMBEDDING_SPACE_HPP
#define R2F_EMBEDDING_SPACE_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "r2f/common.hpp"

namespace r2f
{

/// Unit vector in the shared vision-language space. The only way to build
/// one is through a normalising factory, so every live instance has norm 1.
class Embedding
{
public:
  Embedding() = default;

  /// Normalise `values`; throws InvalidArgument for empty, zero or non-finite input.
  static Embedding from_values(Eigen::VectorXd values);

  const Eigen::VectorXd & values() const { return values_; }
  std::size_t dimension() const { return static_cast<std::size_t>(values_.size()); }
  bool empty() const { return values_.size() == 0; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  Embedding operator-() const;
  bool operator==(const Embedding & other) const { return values_ == other.values_; }

private:
  explicit Embedding(Eigen::VectorXd values) : values_(std::move(values)) {}
  Eigen::VectorXd values_;
};

/// Dot product of two unit vectors.
double cosine(const Embedding & a, const Embedding & b);

struct ConceptSpec
{
  std::string name;
  std::uint64_t seed = 0;
  double match_cos = 0.18;
};

/// Seeded Gaussian direction for a named concept. The RNG seed is
/// fnv1a64(name) XOR spec.seed.
Embedding encode_concept(const ConceptSpec & spec, std::size_t dimension);

/// target_cos * base + sqrt(1 - target_cos^2) * r, with r a seeded unit vector
/// orthogonal to base.
Embedding make_related(const Embedding & base, double target_cos, std::uint64_t seed);

/// A seeded unit vector orthogonal to every vector in `against`.
Embedding orthogonal_direction(std::size_t dimension, std::span<const Embedding> against,
                               std::uint64_t seed);

/// Concept table for one scene: which names exist and their visual embeddings.
/// Visual embeddings are computed on first use and cached; the cache is
/// internally synchronised so a registry may be shared by concurrent episodes.
class ConceptRegistry
{
public:
  static constexpr std::size_t kDefaultDimension = 512;
  static constexpr double kDefaultMatchCos = 0.18;

  ConceptRegistry() : ConceptRegistry(kDefaultDimension, 0) {}
  ConceptRegistry(std::size_t dimension, std::uint64_t scene_seed,
                  double match_cos = kDefaultMatchCos);

  ConceptRegistry(const ConceptRegistry & other);
  ConceptRegistry & operator=(const ConceptRegistry & other);

  /// Adds `name` (idempotent). Throws InvalidArgument for an empty name or a
  /// match_cos that cannot be detected at the default threshold.
  const ConceptSpec & add(const std::string & name);
  const ConceptSpec & add(const ConceptSpec & spec);

  bool contains(std::string_view name) const;
  const ConceptSpec & spec(std::string_view name) const;
  std::vector<std::string> names() const;

  /// Visual embedding of a registered concept; throws UnknownConcept otherwise.
  const Embedding & visual(std::string_view name) const;

  /// Text-side embedding of an arbitrary noun phrase. Registered phrases and
  /// phrases whose last word is registered map near that concept (cos =
  /// match_cos); anything else gets a seeded, unrelated direction.
  Embedding embed_phrase(std::string_view phrase) const;

  std::size_t dimension() const { return dimension_; }
  std::uint64_t scene_seed() const { return scene_seed_; }
  double match_cos() const { return match_cos_; }

  nlohmann::json to_json() const;
  static ConceptRegistry from_json(const nlohmann::json & j);

private:
  std::size_t dimension_;
  std::uint64_t scene_seed_;
  double match_cos_;
  std::map<std::string, ConceptSpec, std::less<>> specs_;
  mutable std::map<std::string, Embedding, std::less<>> cache_;
  mutable std::unique_ptr<std::mutex> cache_mutex_;
};

/// Query embedding for "attr1 attr2 ... head". Throws UnknownConcept (listing
/// the registered names) when `head` is not registered.
Embedding encode_query(std::string_view head, std::span<const std::string> attributes,
                       const ConceptRegistry & registry);

/// Bundled noun -> synonyms table.
class SynonymLexicon
{
public:
  SynonymLexicon() = default;

  /// Throws InvalidArgument if any entry lists itself as a synonym.
  static SynonymLexicon from_json(const nlohmann::json & j);
  static SynonymLexicon load(const std::string & path);

  /// Synonyms of `noun`, empty on a miss.
  std::span<const std::string> synonyms(std::string_view noun) const;
  std::size_t size() const { return entries_.size(); }

private:
  std::map<std::string, std::vector<std::string>, std::less<>> entries_;
};

}  // namespace r2f

#endif  // R2F_EMBEDDING_SPACE_HPP
