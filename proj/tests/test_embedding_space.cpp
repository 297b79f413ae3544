#include <gtest/gtest.h>

#include <cmath>

#include "r2f/embedding_space.hpp"
#include "support.hpp"

using namespace r2f;

TEST(Embedding, FactoryNormalises)
{
  Eigen::VectorXd v(3);
  v << 3.0, 0.0, 4.0;
  const Embedding e = Embedding::from_values(v);
  EXPECT_NEAR(e.values().norm(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(e[0], 0.6);
  EXPECT_THROW(Embedding::from_values(Eigen::VectorXd::Zero(4)), InvalidArgument);
  EXPECT_THROW(Embedding::from_values(Eigen::VectorXd()), InvalidArgument);
  v[1] = std::nan("");
  EXPECT_THROW(Embedding::from_values(v), InvalidArgument);
}

TEST(Embedding, CosineCases)
{
  const Embedding e = encode_concept({"chair", 7}, 512);
  EXPECT_NEAR(cosine(e, e), 1.0, 1e-12);
  EXPECT_NEAR(cosine(e, -e), -1.0, 1e-12);
  EXPECT_NEAR(cosine(test::unit(8, 0), test::unit(8, 3)), 0.0, 1e-9);
}

TEST(Embedding, EncodeConceptDeterministic)
{
  const Embedding a = encode_concept({"chair", 7}, 512);
  const Embedding b = encode_concept({"chair", 7}, 512);
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.dimension(), 512u);
  EXPECT_FALSE(a == encode_concept({"chair", 8}, 512));
}

TEST(Embedding, DistinctNamesNearlyOrthogonal)
{
  double sum = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Embedding a = encode_concept({"a" + std::to_string(i), 3}, 512);
    const Embedding b = encode_concept({"b" + std::to_string(i), 3}, 512);
    sum += std::abs(cosine(a, b));
  }
  EXPECT_LE(sum / 1000.0, 0.06);
}

TEST(Embedding, MakeRelatedHitsTarget)
{
  const Embedding e = encode_concept({"lamp", 1}, 512);
  EXPECT_NEAR((make_related(e, 1.0, 5).values() - e.values()).norm(), 0.0, 1e-12);
  EXPECT_NEAR(cosine(make_related(e, 0.0, 5), e), 0.0, 1e-6);
  for (double c : {0.18, 0.5, -0.3, 0.7}) {
    EXPECT_NEAR(cosine(make_related(e, c, 11), e), c, 1e-6) << c;
  }
  EXPECT_THROW(make_related(e, 1.5, 1), InvalidArgument);
}

TEST(Embedding, OrthogonalDirection)
{
  std::vector<Embedding> against = {encode_concept({"x", 1}, 64), encode_concept({"y", 1}, 64)};
  const Embedding o = orthogonal_direction(64, against, 9);
  for (const auto & a : against) EXPECT_NEAR(cosine(o, a), 0.0, 1e-9);
}

TEST(Registry, QueryCosines)
{
  ConceptRegistry reg(512, 42);
  reg.add("chair");
  reg.add("bed");
  const Embedding q = encode_query("chair", {}, reg);
  EXPECT_NEAR(cosine(q, reg.visual("chair")), 0.18, 1e-6);

  const std::vector<std::string> attrs = {"king", "size"};
  const double c = cosine(encode_query("bed", attrs, reg), reg.visual("bed"));
  EXPECT_GE(c, 0.15);
  EXPECT_LE(c, 0.18);
  EXPECT_THROW(encode_query("zzz", {}, reg), UnknownConcept);
}

// Attribute perturbation must keep the query detectable for any attribute set.
TEST(Registry, AttributeBoundOverLexiconWords)
{
  ConceptRegistry reg(512, 3);
  reg.add("bed");
  const std::vector<std::string> words = {"king", "size", "round", "dark", "wooden", "small", "red", "tall"};
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (std::size_t j = i; j < words.size(); ++j) {
      std::vector<std::string> a = {words[i]};
      if (j != i) a.push_back(words[j]);
      const double c = cosine(encode_query("bed", a, reg), reg.visual("bed"));
      EXPECT_GE(c, 0.15);
      EXPECT_LE(c, 0.18 + 1e-9);
    }
  }
}

TEST(Registry, PhraseEmbedding)
{
  ConceptRegistry reg(512, 4);
  reg.add("table");
  EXPECT_NEAR(cosine(reg.embed_phrase("table"), reg.visual("table")), 0.18, 1e-6);
  EXPECT_NEAR(cosine(reg.embed_phrase("wooden table"), reg.visual("table")), 0.18, 1e-6);
  EXPECT_LT(std::abs(cosine(reg.embed_phrase("staircase"), reg.visual("table"))), 0.2);
  EXPECT_THROW(reg.visual("staircase"), UnknownConcept);
  EXPECT_THROW(reg.add(""), InvalidArgument);
}

TEST(Registry, JsonRoundTrip)
{
  ConceptRegistry reg(128, 9);
  reg.add("sofa");
  reg.add("wall");
  const ConceptRegistry back = ConceptRegistry::from_json(reg.to_json());
  EXPECT_EQ(back.names(), reg.names());
  EXPECT_TRUE(back.visual("sofa") == reg.visual("sofa"));
}

TEST(Lexicon, RejectsSelfSynonym)
{
  EXPECT_THROW(SynonymLexicon::from_json({{"couch", {"couch", "sofa"}}}), InvalidArgument);
  const auto lex = SynonymLexicon::from_json({{"couch", {"sofa", "settee"}}});
  EXPECT_EQ(lex.synonyms("couch").size(), 2u);
  EXPECT_TRUE(lex.synonyms("bed").empty());
}
