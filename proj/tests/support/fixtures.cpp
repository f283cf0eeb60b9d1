#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#ifndef OWLINK_TEST_DATA
#define OWLINK_TEST_DATA "tests/data"
#endif

namespace owlink::fixtures {

namespace fs = std::filesystem;

fs::path data_dir() { return OWLINK_TEST_DATA; }
fs::path tiny_dir() { return data_dir() / "tiny"; }

fs::path temp_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("owlink-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

namespace {

std::string num_id(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%03zu", prefix, i);
    return buf;
}

}  // namespace

KnowledgeGraph random_graph(std::size_t n_vertices, std::size_t n_relations, std::size_t n_triples,
                            std::uint64_t seed) {
    KnowledgeGraph g;
    for (std::size_t i = 0; i < n_vertices; ++i) g.vertices.add(num_id("v", i), "vertex " + std::to_string(i));
    for (std::size_t i = 0; i < n_relations; ++i) g.relations.add(num_id("r", i), "relation " + std::to_string(i));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> v(0, static_cast<Index>(n_vertices - 1));
    std::uniform_int_distribution<Index> r(0, static_cast<Index>(n_relations - 1));
    const std::size_t cap = n_vertices * n_vertices * n_relations;
    for (std::size_t tries = 0; g.triples().size() < std::min(n_triples, cap) && tries < 100 * n_triples; ++tries) {
        Triple t{v(rng), r(rng), v(rng)};
        if (t.head != t.tail && !g.has_triple(t)) g.add_triple(t);
    }
    return g;
}

KnowledgeGraph memorization_graph(std::uint64_t seed) {
    KnowledgeGraph g;
    for (std::size_t i = 0; i < 50; ++i) g.vertices.add(num_id("v", i), "");
    for (std::size_t i = 0; i < 5; ++i) g.relations.add(num_id("r", i), "");
    std::mt19937_64 rng(seed);
    std::vector<Index> perm(50);
    for (Index r = 0; r < 5; ++r) {
        std::iota(perm.begin(), perm.end(), Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        std::uniform_int_distribution<Index> tail(0, 49);
        for (std::size_t i = 0; i < 20; ++i) g.add_triple({perm[i], r, tail(rng)});
    }
    return g;
}

RawCorpus random_corpus(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::size_t nv = std::uniform_int_distribution<std::size_t>(30, 60)(rng);
    const std::size_t nr = std::uniform_int_distribution<std::size_t>(3, 7)(rng);
    RawCorpus c;
    c.graph = random_graph(nv, nr, nv * 3, seed + 17);
    std::uniform_int_distribution<int> n_mentions(1, 4), n_contexts(1, 5);
    for (Index v = 0; v < nv; ++v) {
        const int k = n_mentions(rng);
        for (int j = 0; j < k; ++j) {
            const std::string surface = "name" + std::to_string(v) + "x" + std::to_string(j);
            const Index m = c.mentions.add({c.graph.vertices.id(v) + ":" + surface, v, surface});
            const int nc = n_contexts(rng);
            for (int s = 0; s < nc; ++s)
                c.contexts.add({m, "doc" + std::to_string(s), "text about " + surface + " number " + std::to_string(s)});
        }
    }
    return c;
}

std::vector<std::string> split_oracle(const RawCorpus& raw, const BuildConfig& config, const DatasetBundle& out) {
    std::vector<std::string> errs;
    auto fail = [&](std::string s) { errs.push_back(std::move(s)); };
    for (auto& e : validate(out)) fail("validate: " + e);

    // every input mention lands in exactly one split with all its contexts
    std::map<std::string, int> where;
    auto note = [&](const MentionMap& ms, int s) {
        for (const auto& m : ms.all())
            if (!where.emplace(m.id, s).second) fail("mention " + m.id + " in two splits");
    };
    note(out.closed_mentions, 0);
    note(out.validation.mentions, 1);
    note(out.test.mentions, 2);
    if (where.size() != raw.mentions.size()) fail("mention count differs from input");
    std::map<std::string, std::size_t> want_ctx, got_ctx;
    for (const auto& c : raw.contexts.all()) ++want_ctx[raw.mentions[c.mention].id];
    for (const auto& c : out.closed_contexts.all()) ++got_ctx[out.closed_mentions[c.mention].id];
    for (const auto* s : {&out.validation, &out.test})
        for (const auto& c : s->contexts.all()) ++got_ctx[s->mentions[c.mention].id];
    if (want_ctx != got_ctx) fail("contexts do not follow their mentions");

    // kept relations, recomputed from the selection contract
    auto sel = select_relations(raw.graph, graph_stats(raw.graph), config);
    std::set<std::string> kept;
    for (auto r : sel.kept_relations) kept.insert(raw.graph.relations.id(r));
    std::set<std::string> out_rel(out.graph.relations.ids().begin(), out.graph.relations.ids().end());
    if (kept != out_rel) fail("relation table differs from selection");

    // closed vertices: those with a closed mention
    std::set<std::string> closed_v;
    for (const auto& m : out.closed_mentions.all()) closed_v.insert(out.graph.vertices.id(m.vertex));

    // concept vertices keep all mentions closed
    std::set<std::string> concept_rel;
    for (auto r : sel.concept_relations) concept_rel.insert(raw.graph.relations.id(r));
    auto stats = graph_stats(raw.graph);
    std::set<Index> concept_v;
    for (const auto& t : raw.graph.triples()) {
        if (!concept_rel.count(raw.graph.relations.id(t.relation))) continue;
        // relation statistics do not depend on other relations, so the raw
        // graph gives the same minority side as the kept one
        concept_v.insert(stats[t.relation].range <= stats[t.relation].domain ? t.tail : t.head);
    }
    std::map<Index, std::pair<std::size_t, std::size_t>> per_vertex;  // (total, closed)
    for (const auto& m : raw.mentions.all()) {
        auto& [total, closed] = per_vertex[m.vertex];
        ++total;
        closed += where.count(m.id) && where[m.id] == 0;
    }
    for (const auto& [v, counts] : per_vertex) {
        std::size_t want = counts.first;
        if (!concept_v.count(v)) {
            want = static_cast<std::size_t>(std::floor(config.target_mention_split * counts.first + 0.5));
            if (config.closed_world_threshold) want = std::min(want, *config.closed_world_threshold);
        }
        if (counts.second != want)
            fail("vertex " + raw.graph.vertices.id(v) + " has " + std::to_string(counts.second) +
                 " closed mentions, expected " + std::to_string(want));
    }

    // closed triples: kept triples between closed vertices
    std::set<std::tuple<std::string, std::string, std::string>> want_t, got_t;
    for (const auto& t : raw.graph.triples()) {
        const auto& h = raw.graph.vertices.id(t.head);
        const auto& r = raw.graph.relations.id(t.relation);
        const auto& tl = raw.graph.vertices.id(t.tail);
        if (kept.count(r) && closed_v.count(h) && closed_v.count(tl)) want_t.insert({h, r, tl});
    }
    for (const auto& t : out.graph.triples())
        got_t.insert({out.graph.vertices.id(t.head), out.graph.relations.id(t.relation), out.graph.vertices.id(t.tail)});
    if (want_t != got_t) fail("closed triples differ from oracle");

    // task triples: every kept triple touching an open mention's vertex
    // whose other endpoint is closed, with the closed side recorded
    for (const auto* s : {&out.validation, &out.test}) {
        std::set<std::tuple<std::string, std::string, std::string, std::string>> want, got;
        for (const auto& m : s->mentions.all()) {
            const auto& vid = out.graph.vertices.id(m.vertex);
            for (const auto& t : raw.graph.triples()) {
                const auto& h = raw.graph.vertices.id(t.head);
                const auto& r = raw.graph.relations.id(t.relation);
                const auto& tl = raw.graph.vertices.id(t.tail);
                if (!kept.count(r)) continue;
                if (h == vid && closed_v.count(tl)) want.insert({m.id, r, tl, "tail"});
                if (tl == vid && closed_v.count(h)) want.insert({m.id, r, h, "head"});
            }
        }
        for (const auto& t : s->tasks)
            got.insert({s->mentions[t.mention].id, out.graph.relations.id(t.relation), out.graph.vertices.id(t.vertex),
                        std::string(to_string(t.direction))});
        if (want != got) fail("task triples differ from oracle");
        if (got.size() != s->tasks.size()) fail("duplicate task triples");
    }
    return errs;
}

IdentifierFixture identifier_fixture(std::uint64_t seed) {
    constexpr std::size_t kEntities = 100, kRelations = 3, kAliases = 10, kSentences = 3;
    std::mt19937_64 rng(seed);
    KnowledgeGraph g;
    for (std::size_t i = 0; i < kEntities; ++i) g.vertices.add(num_id("e", i), "entity " + std::to_string(i));
    for (std::size_t r = 0; r < kRelations; ++r) g.relations.add(num_id("rel", r), "relation " + std::to_string(r));
    std::uniform_int_distribution<Index> any(0, kEntities - 1);
    for (Index e = 0; e < kEntities; ++e)
        for (Index r = 0; r < kRelations; ++r)
            for (int j = 0; j < 2; ++j) {
                Triple t{e, r, any(rng)};
                if (t.tail != e && !g.has_triple(t)) g.add_triple(t);
            }

    const std::vector<std::string> fillers = {"the", "record", "shows", "that", "notes", "says", "of", "and",
                                              "report", "about", "from", "was"};
    std::uniform_int_distribution<std::size_t> filler(0, fillers.size() - 1);
    auto id_token = [&](Index e) { return num_id("uid", e); };

    MentionMap mentions;
    ContextStore contexts;
    for (Index e = 0; e < kEntities; ++e)
        for (std::size_t a = 0; a < kAliases; ++a) {
            const std::string surface = num_id("alias", e) + "x" + std::to_string(a);
            const Index m = mentions.add({g.vertices.id(e) + ":" + surface, e, surface});
            for (std::size_t s = 0; s < kSentences; ++s)
                contexts.add({m, "synthetic",
                              fillers[filler(rng)] + " " + surface + " " + fillers[filler(rng)] + " " + id_token(e) +
                                  " " + fillers[filler(rng)]});
        }

    BuildConfig config;
    config.total_relation_count = kRelations;
    config.target_mention_split = 0.7;
    config.target_validation_split = 0.2;
    config.seed = seed;
    IdentifierFixture fx;
    fx.bundle = split(g, mentions, contexts, config);

    // relabel identifier tokens of open-world contexts by a permutation
    std::vector<Index> perm(kEntities);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    fx.shuffled = fx.bundle;
    for (auto* sp : {&fx.shuffled.validation, &fx.shuffled.test})
        for (auto& c : sp->contexts.mutable_records()) {
            const auto pos = c.sentence.find("uid");
            const auto e = static_cast<Index>(std::stoul(c.sentence.substr(pos + 3, 3)));
            c.sentence.replace(pos, 6, id_token(perm[e]));
        }
    return fx;
}

OpenWorldModel random_model(std::size_t vocab, std::size_t d_in, std::size_t d, std::size_t n_vertices,
                            std::size_t n_relations, std::uint64_t seed) {
    OpenWorldModel m;
    for (std::size_t i = 2; i < vocab; ++i) m.vocab.add("w" + std::to_string(i));
    m.encoder = init_encoder(m.vocab.size(), d_in, seed);
    // larger entries than the defaults so gradients are not tiny
    for (auto& x : m.encoder.table) x *= 5.0;
    m.projection = init_projection(d_in, d, seed + 1);
    std::mt19937_64 rng(seed + 2);
    std::normal_distribution<double> normal(0.0, 0.5);
    for (auto& x : m.projection.bias) x = normal(rng);
    m.graph = init_embeddings(n_vertices, n_relations, d, seed + 3);
    for (auto& x : m.graph.entity) x *= 5.0;
    for (auto& x : m.graph.relation) x *= 5.0;
    return m;
}

}  // namespace owlink::fixtures
