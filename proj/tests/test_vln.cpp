#include <gtest/gtest.h>

#include <algorithm>

#include "r2f/vln.hpp"
#include "support.hpp"

using namespace r2f;

TEST(Parser, PaperExamples)
{
  ParsedInstruction p = parse_instruction("king size bed located near the chest drawer, painting, curtain, and pillow");
  EXPECT_EQ(p.target_head, "bed");
  EXPECT_EQ(p.target_attributes, std::vector<std::string>({"king", "size"}));
  EXPECT_EQ(p.landmarks, std::vector<std::string>({"chest drawer", "painting", "curtain", "pillow"}));

  p = parse_instruction("a sink");
  EXPECT_EQ(p.target_head, "sink");
  EXPECT_TRUE(p.target_attributes.empty());
  EXPECT_TRUE(p.landmarks.empty());

  p = parse_instruction("the round dark wooden table near the staircase");
  EXPECT_EQ(p.target_head, "table");
  EXPECT_EQ(p.target_attributes, std::vector<std::string>({"round", "dark", "wooden"}));
  EXPECT_EQ(p.landmarks, std::vector<std::string>({"staircase"}));
}

TEST(Parser, TemplateCorpus)
{
  const auto corpus = test::template_corpus();
  ASSERT_EQ(corpus.size(), 30u);
  for (const auto & c : corpus) EXPECT_EQ(parse_instruction(c.text), c.expected) << c.text;
}

TEST(Parser, RenderRoundTrips)
{
  for (const auto & c : test::template_corpus()) EXPECT_EQ(parse_instruction(c.expected.render()), c.expected);
}

TEST(Parser, Errors)
{
  EXPECT_THROW(parse_instruction("the"), Unparseable);
  EXPECT_THROW(parse_instruction("near the sofa"), Unparseable);
  EXPECT_THROW(parse_instruction(""), Unparseable);
}

TEST(Parser, GrammarFile)
{
  const Grammar g = Grammar::load(std::string(R2F_TEST_DATA_DIR) + "/vln_grammar.json");
  EXPECT_EQ(g.to_json(), Grammar{}.to_json());
}

TEST(Parser, ResolveLongestRegisteredSuffix)
{
  ConceptRegistry reg(64, 1);
  reg.add("chest drawer");
  reg.add("drawer");
  const auto [head, attrs] = resolve_target(parse_instruction("old chest drawer"), reg);
  EXPECT_EQ(head, "chest drawer");
  EXPECT_EQ(attrs, std::vector<std::string>({"old"}));
}

TEST(Landmarks, SynonymsAtConstructionCosineKept)
{
  ConceptRegistry reg(512, 2);
  const auto lex = SynonymLexicon::from_json({{"couch", {"sofa", "settee"}}});
  ParsedInstruction p{"bed", {}, {"couch"}};
  const LandmarkSet set = expand_landmarks(p, lex, reg);
  ASSERT_EQ(set.entries.size(), 1u);
  ASSERT_EQ(set.entries[0].embeddings.size(), 3u);
  EXPECT_EQ(set.entries[0].embeddings[0].first, "couch");
  for (std::size_t i = 1; i < 3; ++i) {
    EXPECT_NEAR(cosine(set.entries[0].embeddings[i].second, set.entries[0].embeddings[0].second), 0.7, 1e-6);
  }
}

TEST(Landmarks, FilterDropsAndTruncates)
{
  const Embedding base = encode_concept({"couch", 1}, 512);
  std::vector<std::pair<std::string, Embedding>> variants = {{"low", make_related(base, 0.5, 1)}};
  EXPECT_EQ(filter_variants({"couch", base}, variants, 0.6, 5).size(), 1u);

  variants.clear();
  const std::vector<double> cs = {0.61, 0.95, 0.7, 0.88, 0.65, 0.8, 0.75};
  for (std::size_t i = 0; i < cs.size(); ++i) variants.push_back({"v" + std::to_string(i), make_related(base, cs[i], i)});
  const auto kept = filter_variants({"couch", base}, variants, 0.6, 5);
  ASSERT_EQ(kept.size(), 5u);
  // Sort-and-truncate oracle.
  std::vector<std::pair<double, std::string>> ref;
  for (const auto & [n, e] : variants) ref.push_back({cosine(e, base), n});
  std::sort(ref.rbegin(), ref.rend());
  EXPECT_EQ(kept[0].first, "couch");
  for (std::size_t i = 1; i < 5; ++i) EXPECT_EQ(kept[i].first, ref[i - 1].second);
}

TEST(Verification, EmptySetPasses)
{
  EXPECT_TRUE(verify_candidate({}, LandmarkSet{}, 0.11));
}

TEST(Verification, VisibleLandmarkNoiseless)
{
  SceneSpec s = test::box_room(-3, -3, 3, 3, 5);
  test::add_object(s, "painting", Aabb(Vec3(2.7, -0.5, 1.0), Vec3(2.9, 0.5, 1.8)));
  const LandmarkSet set = expand_landmarks({"bed", {}, {"painting"}}, SynonymLexicon{}, s.registry);
  RenderOptions ro;
  ro.noise_sigma = 0.0;
  const std::vector<Observation> sweep = {render(s, {Vec2(0, 0), 0.0}, CameraModel{}, ro)};
  EXPECT_GE(landmark_maxima(sweep[0], set)[0], 0.18 - 1e-9);
  EXPECT_TRUE(verify_candidate(sweep, set, 0.11));
}

TEST(Verification, UnrelatedSceneRejectedUnderNoise)
{
  SceneSpec s = test::box_room(-3, -3, 3, 3, 8);
  test::add_object(s, "sofa", Aabb(Vec3(1.5, -1, 0), Vec3(2.5, 1, 0.8)));
  test::add_object(s, "lamp", Aabb(Vec3(-2.5, 1.5, 0), Vec3(-2.2, 1.8, 1.6)));
  const LandmarkSet set = expand_landmarks({"bed", {}, {"painting", "curtain"}}, SynonymLexicon{}, s.registry);
  int rejected = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RenderOptions ro;
    ro.noise_seed = seed;
    std::vector<Observation> sweep;
    for (int k = 0; k < 24; k += 4) sweep.push_back(render(s, {Vec2(0, 0), 15.0 * k}, CameraModel{}, ro));
    rejected += !verify_candidate(sweep, set, 0.11);
  }
  EXPECT_GE(rejected, 99);
}

TEST(VlnPolicy, RejectionSweepIs24Turns)
{
  const CameraModel cam;
  const PolicyConfig cfg;
  const PlannerConfig pc;
  const VlnConfig vc;
  const Embedding q = encode_concept({"bed", 3}, 512);
  const Observation o = test::flat_observation(cam, make_related(q, 0.18, 1));
  LandmarkSet set;
  set.entries.push_back({"painting", {{"painting", encode_concept({"painting", 3}, 512)}}});
  WorldModel world;
  PolicyState st = make_policy_state(cfg);
  st.spin_turns = cfg.initial_spin;
  st.detector.consecutive = cfg.n_cons - 1;

  std::vector<Action> actions;
  for (int i = 0; i < 40; ++i) {
    actions.push_back(vln_step_policy({o, cam, world, q, cfg, pc}, set, vc, st));
    if (i == 0) ASSERT_EQ(st.mode, Mode::Verify);
    if (st.mode != Mode::Verify) break;
  }
  ASSERT_EQ(actions.size(), 25u);
  EXPECT_TRUE(std::all_of(actions.begin(), actions.begin() + 24, [](Action a) { return a == Action::TurnLeft; }));
  ASSERT_EQ(st.invalidated_points.size(), 1u);
  EXPECT_EQ(st.suppressed_points.size(), 1u);
}

TEST(VlnConfig, Validate)
{
  VlnConfig c;
  EXPECT_NO_THROW(c.validate());
  c.k_syn = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}
