// Copyright (C) 2026 The cgrg Authors
// SPDX-License-Identifier: Apache-2.0

#include "cgrg/synthetic.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <string>

#include "cgrg/error.hpp"

namespace cgrg {

namespace {

constexpr std::array kNames = {
    "sam",    "kim",    "alex",   "maria", "john",  "lena",   "omar",  "priya", "diego",
    "yuki",   "noah",   "emma",   "liam",  "olga",  "ravi",   "sofia", "hugo",  "nina",
    "ivan",   "chloe",  "mateo",  "zara",  "felix", "irene",  "kofi",  "hana",  "pablo",
    "greta",  "tomas",  "leila",  "oscar", "mei",   "anton",  "rosa",  "jonas", "amara",
    "viktor", "ingrid", "tariq",  "elsa"};

constexpr std::array kPlaces = {
    "toronto",  "tokyo",     "oxford",    "berlin",    "madrid",   "lisbon",    "oslo",
    "vienna",   "prague",    "dublin",    "zurich",    "geneva",   "munich",    "hamburg",
    "milan",    "turin",     "naples",    "athens",    "cairo",    "nairobi",   "lagos",
    "accra",    "mumbai",    "delhi",     "chennai",   "seoul",    "busan",     "osaka",
    "kyoto",    "beijing",   "shanghai",  "shenzhen",  "taipei",   "manila",    "jakarta",
    "bangkok",  "hanoi",     "sydney",    "perth",     "auckland", "lima",      "quito",
    "bogota",   "santiago",  "montreal",  "vancouver", "calgary",  "boston",    "chicago",
    "denver",   "seattle",   "austin",    "atlanta",   "helsinki", "stockholm", "copenhagen",
    "warsaw",   "krakow",    "budapest",  "bucharest", "porto", "belgrade", "zagreb",
    "riga",     "tallinn",   "vilnius",   "kyiv",      "istanbul", "ankara",    "tehran",
    "karachi",  "dhaka",     "colombo",   "kathmandu", "cambridge", "princeton", "stanford",
    "berkeley", "edinburgh", "glasgow"};

constexpr std::array kTopics = {
    "physics",      "chemistry",   "biology",      "geology",      "astronomy",
    "economics",    "linguistics", "philosophy",   "sociology",    "psychology",
    "robotics",     "genetics",    "ecology",      "optics",       "acoustics",
    "topology",     "algebra",     "calculus",     "statistics",   "cryptography",
    "neuroscience", "immunology",  "virology",     "botany",       "zoology",
    "archaeology",  "anthropology", "history",     "musicology",   "architecture",
    "oceanography", "meteorology", "seismology",   "volcanology",  "glaciology",
    "mineralogy",   "paleontology", "entomology",  "ornithology",  "mycology",
    "epidemiology", "pharmacology", "toxicology",  "nutrition",    "agronomy",
    "forestry",     "hydrology",   "cartography",  "demography",   "criminology",
    "logic",        "rhetoric",    "poetry",       "sculpture",    "painting",
    "photography",  "cinema",      "theatre",      "choreography", "composition",
    "semantics",    "phonetics",   "syntax",       "morphology",   "pragmatics",
    "thermodynamics", "mechanics", "electronics",  "photonics",    "plasma",
    "combinatorics", "geometry",   "probability",  "compilers",    "databases",
    "networking",   "graphics",    "verification", "cosmology",    "spectroscopy"};

constexpr int kFirstYear = 2010;
constexpr int kNumYears = 10;

// Every template names the year before the topic.
constexpr std::array kFactTemplates = {
    "in {Y} , {E} studied {T} at {P}",    "in {Y} , {E} taught {T} at {P}",
    "in {Y} , {E} researched {T} at {P}", "at {P} in {Y} , {E} lectured on {T}",
    "at {P} in {Y} , {E} worked on {T}"};

// Every template names the place before the topic and never puts them next to
// each other, so each surfaces as its own control phrase.
constexpr std::array kResponseTemplates = {
    "{E} was at {P} for {T} in {Y}", "i think {E} was at {P} working on {T} in {Y}",
    "{E} spent {Y} at {P} doing {T}", "in {Y} , {E} was at {P} for {T}",
    "as far as i know {E} was at {P} for {T} in {Y}"};

constexpr std::array kContextTemplates = {"do you know what {E} did ?", "tell me about {E} .",
                                          "what has {E} been up to ?",
                                          "have you heard about {E} ?"};

struct Fact {
  std::string entity;
  std::string topic;
  std::string place;
  int year = 0;
  std::size_t relation = 0;
};

std::string fill(std::string_view tmpl, const Fact& f) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      switch (tmpl[i + 1]) {
        case 'E': out += f.entity; break;
        case 'T': out += f.topic; break;
        case 'P': out += f.place; break;
        case 'Y': out += std::to_string(f.year); break;
        default: out.append(tmpl.substr(i, 3));
      }
      i += 2;
    } else {
      out.push_back(tmpl[i]);
    }
  }
  return out;
}

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

  // `count` distinct indices from [0, n).
  std::vector<std::size_t> distinct(std::size_t n, std::size_t count) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    for (std::size_t i = 0; i < count; ++i) std::swap(all[i], all[i + index(n - i)]);
    all.resize(count);
    return all;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 rng_;
};

std::string entity_name(int i) {
  const auto n = static_cast<int>(kNames.size());
  std::string name = kNames[static_cast<std::size_t>(i % n)];
  if (i >= n) name += std::to_string(i / n + 1);
  return name;
}

GroundedExample draw_example(Draw& draw, const SyntheticSpec& spec) {
  const auto facts_about_target = static_cast<std::size_t>(std::max(2, spec.n_facts_per_entity));
  const auto others = static_cast<std::size_t>(std::max(0, spec.n_other_facts));
  const std::size_t n_facts = facts_about_target + others;

  const auto people = draw.distinct(static_cast<std::size_t>(spec.n_entities), 1 + others);
  // f0 and f1 share the place; every other fact gets a fresh one.
  const auto places = draw.distinct(kPlaces.size(), n_facts - 1);
  const auto topics = draw.distinct(kTopics.size(), n_facts);
  const auto years = draw.distinct(kNumYears, std::min<std::size_t>(facts_about_target, kNumYears));

  const std::string target = entity_name(static_cast<int>(people[0]));
  std::vector<Fact> facts;
  for (std::size_t i = 0; i < n_facts; ++i) {
    Fact f;
    f.entity = i < facts_about_target ? target : entity_name(static_cast<int>(people[1 + i - facts_about_target]));
    f.topic = kTopics[topics[i]];
    f.place = kPlaces[places[i == 0 ? 0 : i - 1]];
    f.year = kFirstYear + static_cast<int>(i < years.size() ? years[i] : draw.index(kNumYears));
    f.relation = draw.index(kFactTemplates.size());
    facts.push_back(std::move(f));
  }

  GroundedExample ex;
  const Fact answer = facts[0];
  std::vector<std::size_t> order(n_facts);
  for (std::size_t i = 0; i < n_facts; ++i) order[i] = i;
  draw.shuffle(order);
  for (std::size_t i : order) ex.grounding.push_back(fill(kFactTemplates[facts[i].relation], facts[i]));

  ex.context.push_back(fill(kContextTemplates[draw.index(kContextTemplates.size())], answer));

  auto templates = draw.distinct(kResponseTemplates.size(), 2 + draw.index(4));
  ex.response = fill(kResponseTemplates[templates[0]], answer);
  std::vector<std::string> refs;
  for (std::size_t k = 1; k < templates.size(); ++k) refs.push_back(fill(kResponseTemplates[templates[k]], answer));
  ex.refs = std::move(refs);
  return ex;
}

}  // namespace

std::vector<GroundedExample> generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_examples < 1 || spec.n_entities < 1 || spec.n_facts_per_entity < 1) {
    throw InvalidArgument("synthetic sizes must be >= 1");
  }
  if (spec.n_entities < 1 + spec.n_other_facts) {
    throw InvalidArgument("n_entities must exceed the number of unrelated facts");
  }
  spec.extraction.validate();
  Draw draw(spec.seed);
  std::vector<GroundedExample> examples;
  examples.reserve(static_cast<std::size_t>(spec.n_examples));
  for (int i = 0; i < spec.n_examples; ++i) examples.push_back(draw_example(draw, spec));

  const DocFreq df = grounding_doc_freq(examples);
  for (auto& ex : examples) {
    // Redraw the rare example whose facts all landed on frequent tokens.
    for (int attempt = 0;; ++attempt) {
      ex.controls = extract_user_controls(ex.grounding, ex.response, ex.context, spec.extraction, df);
      if (!ex.controls.empty()) break;
      if (attempt > 100) throw Error("synthetic generator could not produce controls");
      ex = draw_example(draw, spec);
    }
    if (ex.controls.size() > kMaxControls) ex.controls.resize(kMaxControls);
    ex.gc = select_gc(ex.grounding, ex.controls);
  }
  return examples;
}

}  // namespace cgrg
