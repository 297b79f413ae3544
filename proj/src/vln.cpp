#include "r2f/vln.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace r2f
{

namespace
{

std::vector<std::string> words_of(const std::string & phrase)
{
  std::istringstream in(phrase);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string join(const std::vector<std::string> & words, std::size_t from = 0, std::size_t to = std::string::npos)
{
  std::string out;
  for (std::size_t i = from; i < std::min(to, words.size()); ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

std::vector<std::string> string_list(const nlohmann::json & j, const char * key)
{
  if (!j.contains(key)) return {};
  if (!j.at(key).is_array()) throw ConfigError(std::string("grammar: '") + key + "' must be a list");
  return j.at(key).get<std::vector<std::string>>();
}

}  // namespace

Grammar Grammar::from_json(const nlohmann::json & j)
{
  Grammar g;
  if (j.contains("relations")) g.relations = string_list(j, "relations");
  if (j.contains("stoplist")) g.stoplist = string_list(j, "stoplist");
  for (const auto & r : g.relations) {
    if (words_of(r).empty()) throw ConfigError("grammar: empty relation keyword");
  }
  return g;
}

Grammar Grammar::load(const std::string & path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("grammar: cannot open " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception & e) {
    throw ConfigError("grammar: " + path + ": " + e.what());
  }
}

nlohmann::json Grammar::to_json() const { return {{"relations", relations}, {"stoplist", stoplist}}; }

std::string ParsedInstruction::render() const
{
  std::string out = join(target_attributes);
  if (!out.empty()) out += ' ';
  out += target_head;
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    out += i == 0 ? " near " : ", ";
    out += landmarks[i];
  }
  return out;
}

ParsedInstruction parse_instruction(const std::string & text, const Grammar & grammar)
{
  // Lowercase; commas become their own token, other punctuation a space.
  std::string clean;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      clean += static_cast<char>(std::tolower(c));
    } else if (ch == ',') {
      clean += " , ";
    } else {
      clean += ' ';
    }
  }
  const std::vector<std::string> tokens = words_of(clean);

  std::vector<std::vector<std::string>> relations;
  for (const auto & r : grammar.relations) relations.push_back(words_of(r));
  std::stable_sort(relations.begin(), relations.end(),
                   [](const auto & a, const auto & b) { return a.size() > b.size(); });
  auto relation_at = [&](std::size_t i) -> std::size_t {
    for (const auto & r : relations) {
      if (i + r.size() <= tokens.size() && std::equal(r.begin(), r.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
        return r.size();
      }
    }
    return 0;
  };
  auto stop = [&](const std::string & w) {
    return w == "," || std::find(grammar.stoplist.begin(), grammar.stoplist.end(), w) != grammar.stoplist.end();
  };

  std::size_t split = tokens.size();
  std::size_t rel_len = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if ((rel_len = relation_at(i)) > 0) {
      split = i;
      break;
    }
  }

  ParsedInstruction p;
  std::vector<std::string> target;
  for (std::size_t i = 0; i < split; ++i) {
    if (!stop(tokens[i])) target.push_back(tokens[i]);
  }
  if (target.empty()) throw Unparseable("instruction has no target phrase: '" + text + "'");
  p.target_head = target.back();
  p.target_attributes.assign(target.begin(), target.end() - 1);

  std::vector<std::string> chunk;
  auto flush = [&] {
    std::vector<std::string> kept;
    for (const auto & w : chunk) {
      if (!stop(w)) kept.push_back(w);
    }
    chunk.clear();
    const std::string lm = join(kept);
    if (!lm.empty() && lm != p.target_head &&
        std::find(p.landmarks.begin(), p.landmarks.end(), lm) == p.landmarks.end()) {
      p.landmarks.push_back(lm);
    }
  };
  for (std::size_t i = split + rel_len; i < tokens.size();) {
    if (const std::size_t r = relation_at(i); r > 0) {
      flush();
      i += r;
      continue;
    }
    if (tokens[i] == "," || tokens[i] == "and") {
      flush();
    } else {
      chunk.push_back(tokens[i]);
    }
    ++i;
  }
  flush();
  return p;
}

std::pair<std::string, std::vector<std::string>> resolve_target(const ParsedInstruction & parsed,
                                                                const ConceptRegistry & registry)
{
  std::vector<std::string> words = parsed.target_attributes;
  words.push_back(parsed.target_head);
  for (std::size_t start = 0; start < words.size(); ++start) {
    const std::string suffix = join(words, start);
    if (registry.contains(suffix)) {
      return {suffix, std::vector<std::string>(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(start))};
    }
  }
  return {parsed.target_head, parsed.target_attributes};
}

void VlnConfig::validate() const
{
  if (!(tau_syn > -1.0 && tau_syn <= 1.0)) throw ConfigError("vln: tau_syn must lie in (-1, 1]");
  if (k_syn < 1) throw ConfigError("vln: k_syn must be >= 1");
  if (!(tau_l > -1.0 && tau_l < 1.0)) throw ConfigError("vln: tau_l must lie in (-1, 1)");
  if (!(std::abs(synonym_cos) <= 1.0)) throw ConfigError("vln: synonym_cos must lie in [-1, 1]");
  if (sweep_turns < 1) throw ConfigError("vln: sweep_turns must be >= 1");
}

std::vector<std::pair<std::string, Embedding>> filter_variants(
  const std::pair<std::string, Embedding> & original,
  const std::vector<std::pair<std::string, Embedding>> & variants, double tau_syn, int k_syn)
{
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const double c = cosine(variants[i].second, original.second);
    if (c >= tau_syn) scored.emplace_back(c, i);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto & a, const auto & b) { return a.first > b.first; });
  std::vector<std::pair<std::string, Embedding>> out{original};
  for (const auto & [c, i] : scored) {
    if (static_cast<int>(out.size()) >= k_syn) break;
    out.push_back(variants[i]);
  }
  return out;
}

LandmarkSet expand_landmarks(const ParsedInstruction & parsed, const SynonymLexicon & lexicon,
                             const ConceptRegistry & registry, const VlnConfig & cfg)
{
  LandmarkSet set;
  for (const auto & lm : parsed.landmarks) {
    const Embedding base = registry.embed_phrase(lm);
    auto syns = lexicon.synonyms(lm);
    if (syns.empty()) {
      const auto words = words_of(lm);
      if (words.size() > 1) syns = lexicon.synonyms(words.back());
    }
    std::vector<std::pair<std::string, Embedding>> variants;
    for (const auto & s : syns) {
      variants.emplace_back(s, make_related(base, cfg.synonym_cos, fnv1a64("syn:" + s) ^ registry.scene_seed()));
    }
    set.entries.push_back({lm, filter_variants({lm, base}, variants, cfg.tau_syn, cfg.k_syn)});
  }
  return set;
}

std::vector<double> landmark_maxima(const Observation & obs, const LandmarkSet & landmarks)
{
  const auto & palette = obs.features.palette;
  std::vector<char> used(palette.size(), 0);
  for (auto i : obs.features.index) used[i] = 1;
  std::vector<double> out;
  for (const auto & entry : landmarks.entries) {
    double best = -1.0;
    for (std::size_t k = 0; k < palette.size(); ++k) {
      if (!used[k]) continue;
      for (const auto & [name, e] : entry.embeddings) best = std::max(best, cosine(palette[k], e));
    }
    out.push_back(best);
  }
  return out;
}

bool verify_candidate(std::span<const Observation> sweep, const LandmarkSet & landmarks, double tau_l)
{
  if (landmarks.empty()) return true;
  std::vector<double> best(landmarks.entries.size(), -1.0);
  for (const auto & obs : sweep) {
    const auto m = landmark_maxima(obs, landmarks);
    for (std::size_t i = 0; i < m.size(); ++i) best[i] = std::max(best[i], m[i]);
  }
  return std::any_of(best.begin(), best.end(), [&](double v) { return v > tau_l; });
}

Action vln_step_policy(PolicyInputs in, const LandmarkSet & landmarks, const VlnConfig & cfg, PolicyState & state)
{
  if (landmarks.empty()) {
    in.defer_confirmation = false;
    return step_policy(in, state);
  }
  in.defer_confirmation = true;
  auto record = [&] {
    const auto m = landmark_maxima(in.obs, landmarks);
    if (state.sweep_max.empty()) state.sweep_max.assign(m.size(), -1.0);
    for (std::size_t i = 0; i < m.size(); ++i) state.sweep_max[i] = std::max(state.sweep_max[i], m[i]);
  };

  if (state.mode == Mode::Verify) {
    record();
    if (state.step_index + 1 >= in.cfg.t_max) {
      state.mode = Mode::Done;
      state.done = DoneReason::Budget;
      return Action::Stop;
    }
    if (state.sweep_turns < cfg.sweep_turns) {
      ++state.sweep_turns;
      ++state.step_index;
      state.last_action = Action::TurnLeft;
      return Action::TurnLeft;
    }
    const bool verified = std::any_of(state.sweep_max.begin(), state.sweep_max.end(),
                                      [&](double v) { return v > cfg.tau_l; });
    const Vec3 candidate = *state.candidate;
    if (verified) {
      begin_approach(in, state, candidate);
    } else {
      reject_candidate(state, candidate);
    }
    return step_policy(in, state);
  }

  const Action a = step_policy(in, state);
  if (state.mode == Mode::Verify && state.sweep_turns == 0) {
    record();
    state.sweep_turns = 1;
  }
  return a;
}

}  // namespace r2f
