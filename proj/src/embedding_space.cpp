#include "r2f/embedding_space.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace r2f
{

namespace
{

// Relative weight of the attribute direction added to a head-noun query.
// cos(query, head) = match_cos / sqrt(1 + w^2), which stays above
// match_cos - 0.03 for every match_cos <= 1 while w <= 0.25.
constexpr double kAttributeWeight = 0.2;

Eigen::VectorXd gaussian_vector(std::size_t dimension, std::uint64_t seed)
{
  std::mt19937_64 rng(mix64(seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(dimension));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = normal(rng);
  }
  return v;
}

std::uint64_t text_seed(std::string_view prefix, std::string_view text, std::uint64_t scene_seed)
{
  std::string key(prefix);
  key += text;
  return fnv1a64(key) ^ scene_seed;
}

std::string last_word(std::string_view phrase)
{
  auto end = phrase.find_last_not_of(' ');
  if (end == std::string_view::npos) {
    return {};
  }
  auto start = phrase.find_last_of(' ', end);
  start = (start == std::string_view::npos) ? 0 : start + 1;
  return std::string(phrase.substr(start, end - start + 1));
}

}  // namespace

Embedding Embedding::from_values(Eigen::VectorXd values)
{
  if (values.size() == 0) {
    throw InvalidArgument("embedding: empty vector");
  }
  if (!values.allFinite()) {
    throw InvalidArgument("embedding: non-finite component");
  }
  const double norm = values.norm();
  if (!(norm > 0.0)) {
    throw InvalidArgument("embedding: zero vector cannot be normalised");
  }
  values /= norm;
  return Embedding(std::move(values));
}

Embedding Embedding::operator-() const { return Embedding(-values_); }

double cosine(const Embedding & a, const Embedding & b)
{
  if (a.dimension() != b.dimension()) {
    throw InvalidArgument("cosine: dimension mismatch");
  }
  return a.values().dot(b.values());
}

Embedding encode_concept(const ConceptSpec & spec, std::size_t dimension)
{
  if (dimension < 2) {
    throw InvalidArgument("encode_concept: dimension must be >= 2");
  }
  if (spec.name.empty()) {
    throw InvalidArgument("encode_concept: empty concept name");
  }
  return Embedding::from_values(gaussian_vector(dimension, fnv1a64(spec.name) ^ spec.seed));
}

Embedding orthogonal_direction(std::size_t dimension, std::span<const Embedding> against,
                               std::uint64_t seed)
{
  // Orthonormal basis of span(against) first; projecting onto the raw
  // vectors one by one is only exact when they are already orthogonal.
  std::vector<Eigen::VectorXd> basis;
  for (const auto & e : against) {
    Eigen::VectorXd b = e.values();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto & q : basis) b -= b.dot(q) * q;
    }
    if (b.norm() > 1e-10) basis.push_back(b.normalized());
  }
  // Re-draw in the (measure-zero) event that the draw lies in span(against).
  for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
    Eigen::VectorXd r = gaussian_vector(dimension, seed + attempt * 0x9e3779b97f4a7c15ULL);
    // Two Gram-Schmidt passes keep the residual at machine precision.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto & q : basis) {
        r -= r.dot(q) * q;
      }
    }
    if (r.norm() > 1e-8) {
      return Embedding::from_values(std::move(r));
    }
  }
  throw InvalidArgument("orthogonal_direction: could not find an orthogonal direction");
}

Embedding make_related(const Embedding & base, double target_cos, std::uint64_t seed)
{
  if (!(std::abs(target_cos) <= 1.0)) {
    throw InvalidArgument("make_related: |target_cos| must be <= 1");
  }
  if (target_cos == 1.0) {
    return base;
  }
  const Embedding r = orthogonal_direction(base.dimension(), std::span(&base, 1), seed);
  const double s = std::sqrt(1.0 - target_cos * target_cos);
  return Embedding::from_values(target_cos * base.values() + s * r.values());
}

ConceptRegistry::ConceptRegistry(std::size_t dimension, std::uint64_t scene_seed, double match_cos)
: dimension_(dimension),
  scene_seed_(scene_seed),
  match_cos_(match_cos),
  cache_mutex_(std::make_unique<std::mutex>())
{
  if (dimension < 2) {
    throw InvalidArgument("ConceptRegistry: dimension must be >= 2");
  }
  if (!(match_cos > 0.0 && match_cos <= 1.0)) {
    throw InvalidArgument("ConceptRegistry: match_cos must lie in (0, 1]");
  }
}

ConceptRegistry::ConceptRegistry(const ConceptRegistry & other)
: dimension_(other.dimension_),
  scene_seed_(other.scene_seed_),
  match_cos_(other.match_cos_),
  specs_(other.specs_),
  cache_mutex_(std::make_unique<std::mutex>())
{
  std::lock_guard lock(*other.cache_mutex_);
  cache_ = other.cache_;
}

ConceptRegistry & ConceptRegistry::operator=(const ConceptRegistry & other)
{
  if (this != &other) {
    ConceptRegistry copy(other);
    dimension_ = copy.dimension_;
    scene_seed_ = copy.scene_seed_;
    match_cos_ = copy.match_cos_;
    specs_ = std::move(copy.specs_);
    cache_ = std::move(copy.cache_);
  }
  return *this;
}

const ConceptSpec & ConceptRegistry::add(const std::string & name)
{
  return add(ConceptSpec{name, scene_seed_, match_cos_});
}

const ConceptSpec & ConceptRegistry::add(const ConceptSpec & spec)
{
  if (spec.name.empty()) {
    throw InvalidArgument("ConceptRegistry: empty concept name");
  }
  // The default detector threshold is 0.14; a concept below it could never
  // be detected.
  if (!(spec.match_cos > 0.14 && spec.match_cos <= 1.0)) {
    throw InvalidArgument("ConceptRegistry: match_cos for '" + spec.name +
                          "' must lie in (0.14, 1]");
  }
  auto [it, inserted] = specs_.emplace(spec.name, spec);
  return it->second;
}

bool ConceptRegistry::contains(std::string_view name) const
{
  return specs_.find(name) != specs_.end();
}

const ConceptSpec & ConceptRegistry::spec(std::string_view name) const
{
  auto it = specs_.find(name);
  if (it == specs_.end()) {
    std::ostringstream msg;
    msg << "unknown concept '" << name << "'; registered:";
    for (const auto & [n, s] : specs_) {
      msg << ' ' << n;
    }
    throw UnknownConcept(msg.str());
  }
  return it->second;
}

std::vector<std::string> ConceptRegistry::names() const
{
  std::vector<std::string> out;
  out.reserve(specs_.size());
  for (const auto & [name, s] : specs_) {
    out.push_back(name);
  }
  return out;
}

const Embedding & ConceptRegistry::visual(std::string_view name) const
{
  const ConceptSpec & s = spec(name);
  std::lock_guard lock(*cache_mutex_);
  auto it = cache_.find(name);
  if (it == cache_.end()) {
    it = cache_.emplace(s.name, encode_concept(s, dimension_)).first;
  }
  return it->second;
}

Embedding ConceptRegistry::embed_phrase(std::string_view phrase) const
{
  std::string key(phrase);
  if (!contains(key)) {
    const std::string head = last_word(phrase);
    if (contains(head)) {
      key = head;
    } else {
      return encode_concept(ConceptSpec{"text:" + std::string(phrase), scene_seed_, match_cos_},
                            dimension_);
    }
  }
  const ConceptSpec & s = spec(key);
  return make_related(visual(key), s.match_cos, text_seed("query:", key, scene_seed_));
}

nlohmann::json ConceptRegistry::to_json() const
{
  nlohmann::json concepts = nlohmann::json::array();
  for (const auto & [name, s] : specs_) {
    concepts.push_back({{"name", s.name}, {"seed", s.seed}, {"match_cos", s.match_cos}});
  }
  return {{"dimension", dimension_},
          {"seed", scene_seed_},
          {"match_cos", match_cos_},
          {"concepts", concepts}};
}

ConceptRegistry ConceptRegistry::from_json(const nlohmann::json & j)
{
  ConceptRegistry reg(j.at("dimension").get<std::size_t>(), j.at("seed").get<std::uint64_t>(),
                      j.value("match_cos", kDefaultMatchCos));
  for (const auto & c : j.at("concepts")) {
    reg.add(ConceptSpec{c.at("name").get<std::string>(), c.at("seed").get<std::uint64_t>(),
                        c.value("match_cos", reg.match_cos())});
  }
  return reg;
}

Embedding encode_query(std::string_view head, std::span<const std::string> attributes,
                       const ConceptRegistry & registry)
{
  const ConceptSpec & s = registry.spec(head);  // throws UnknownConcept
  const Embedding & visual = registry.visual(head);
  Embedding query =
    make_related(visual, s.match_cos, text_seed("query:", head, registry.scene_seed()));
  if (attributes.empty()) {
    return query;
  }
  std::string joined;
  for (const auto & a : attributes) {
    joined += a;
    joined += ' ';
  }
  joined += head;
  const Embedding basis[] = {visual, query};
  const Embedding attr =
    orthogonal_direction(registry.dimension(), basis, text_seed("attr:", joined, registry.scene_seed()));
  return Embedding::from_values(query.values() + kAttributeWeight * attr.values());
}

SynonymLexicon SynonymLexicon::from_json(const nlohmann::json & j)
{
  if (!j.is_object()) {
    throw InvalidArgument("lexicon: expected a JSON object");
  }
  SynonymLexicon lex;
  for (const auto & [noun, syns] : j.items()) {
    std::vector<std::string> list;
    for (const auto & s : syns) {
      auto word = s.get<std::string>();
      if (word == noun) {
        throw InvalidArgument("lexicon: '" + noun + "' lists itself as a synonym");
      }
      list.push_back(std::move(word));
    }
    lex.entries_.emplace(noun, std::move(list));
  }
  return lex;
}

SynonymLexicon SynonymLexicon::load(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("lexicon: cannot open " + path);
  }
  return from_json(nlohmann::json::parse(in));
}

std::span<const std::string> SynonymLexicon::synonyms(std::string_view noun) const
{
  auto it = entries_.find(noun);
  if (it == entries_.end()) {
    return {};
  }
  return it->second;
}

}  // namespace r2f
