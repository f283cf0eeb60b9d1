#include "owlink/builder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <unordered_map>

#include "owlink/tsv.hpp"

namespace owlink {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

std::string single_line(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return out;
}

std::size_t fraction_of(std::size_t n, double frac) {
    return static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
}

}  // namespace

std::vector<IngestionRecord> read_ingestion(const std::filesystem::path& path) {
    std::vector<IngestionRecord> out;
    read_records(path, 4, [&](const auto& cols, std::size_t) {
        out.push_back({std::string(cols[0]), std::string(cols[1]), std::string(cols[3]), std::string(cols[2])});
    });
    return out;
}

void BuildConfig::validate() const {
    std::vector<std::string> errs;
    if (concept_relation_count > total_relation_count)
        errs.push_back("concept_relations must not exceed total_relations");
    if (!(target_mention_split > 0.0 && target_mention_split < 1.0))
        errs.push_back("target_mention_split must lie in (0, 1)");
    if (!(target_validation_split > 0.0 && target_validation_split < 1.0))
        errs.push_back("target_validation_split must lie in (0, 1)");
    if (errs.empty()) return;
    std::string msg = "invalid build config:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
}

BuildConfig BuildConfig::from(const KeyValueConfig& kv) {
    static const std::set<std::string> known = {"concept_relations",     "total_relations",
                                                "closed_world_threshold", "target_mention_split",
                                                "target_validation_split", "mention_threshold", "seed"};
    if (auto unknown = kv.unknown_keys(known); !unknown.empty()) {
        std::string msg = "unknown build config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
    BuildConfig c;
    auto nonneg = [&](const char* key, std::int64_t fallback) {
        auto v = kv.get_int(key, fallback);
        if (v < 0) throw ConfigError(std::string(key) + " must be >= 0");
        return static_cast<std::size_t>(v);
    };
    c.concept_relation_count = nonneg("concept_relations", 0);
    c.total_relation_count = nonneg("total_relations", 0);
    if (kv.has("closed_world_threshold")) c.closed_world_threshold = nonneg("closed_world_threshold", 0);
    c.target_mention_split = kv.get_double("target_mention_split", c.target_mention_split);
    c.target_validation_split = kv.get_double("target_validation_split", c.target_validation_split);
    c.mention_threshold = nonneg("mention_threshold", 0);
    c.seed = kv.get_uint("seed", 0);
    c.validate();
    return c;
}

KeyValueConfig BuildConfig::to_config() const {
    KeyValueConfig kv;
    kv.set("concept_relations", std::to_string(concept_relation_count));
    kv.set("total_relations", std::to_string(total_relation_count));
    if (closed_world_threshold) kv.set("closed_world_threshold", std::to_string(*closed_world_threshold));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", target_mention_split);
    kv.set("target_mention_split", buf);
    std::snprintf(buf, sizeof buf, "%g", target_validation_split);
    kv.set("target_validation_split", buf);
    kv.set("mention_threshold", std::to_string(mention_threshold));
    kv.set("seed", std::to_string(seed));
    return kv;
}

std::optional<double> relation_ratio(std::size_t domain, std::size_t range) {
    if (domain == 0 && range == 0) return std::nullopt;
    auto lo = std::min(domain, range);
    auto hi = std::max(domain, range);
    return static_cast<double>(lo) / static_cast<double>(hi);
}

RelationSelection select_relations(const KnowledgeGraph& g, const std::vector<RelationStats>& stats,
                                   const BuildConfig& config, const RelationOverrides& overrides) {
    config.validate();
    RelationSelection sel;
    std::vector<std::pair<double, Index>> ordered;
    for (Index r = 0; r < stats.size(); ++r) {
        if (auto ratio = relation_ratio(stats[r].domain, stats[r].range))
            ordered.emplace_back(*ratio, r);
        else
            sel.undefined.push_back(r);
    }
    std::sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return g.relations.id(a.second) < g.relations.id(b.second);
    });
    std::vector<Index> rank(stats.size(), static_cast<Index>(-1));
    for (Index i = 0; i < ordered.size(); ++i) rank[ordered[i].second] = i;
    auto by_rank = [&](std::vector<Index>& v) {
        std::sort(v.begin(), v.end(), [&](Index a, Index b) { return rank[a] < rank[b]; });
    };
    auto resolve = [&](const std::vector<std::string>& ids) {
        std::vector<Index> out;
        for (const auto& id : ids) {
            auto r = g.relations.find(id);
            if (!r) throw ConfigError("override names unknown relation '" + id + "'");
            if (rank[*r] == static_cast<Index>(-1))
                throw ConfigError("override names relation without triples '" + id + "'");
            out.push_back(*r);
        }
        by_rank(out);
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    };

    if (overrides.kept_relations) {
        sel.kept_relations = resolve(*overrides.kept_relations);
    } else {
        if (config.total_relation_count > ordered.size())
            throw ConfigError("total_relations (" + std::to_string(config.total_relation_count) +
                              ") exceeds relations with triples (" + std::to_string(ordered.size()) + ")");
        for (std::size_t i = 0; i < config.total_relation_count; ++i) sel.kept_relations.push_back(ordered[i].second);
    }
    if (overrides.concept_relations) {
        sel.concept_relations = resolve(*overrides.concept_relations);
        for (auto r : sel.concept_relations)
            if (std::find(sel.kept_relations.begin(), sel.kept_relations.end(), r) == sel.kept_relations.end())
                throw ConfigError("concept relation '" + g.relations.id(r) + "' is not kept");
    } else {
        auto n = std::min(config.concept_relation_count, sel.kept_relations.size());
        sel.concept_relations.assign(sel.kept_relations.begin(), sel.kept_relations.begin() + static_cast<long>(n));
    }
    return sel;
}

std::vector<Index> concept_vertices(const KnowledgeGraph& g, const std::vector<Index>& concept_relations) {
    auto stats = graph_stats(g);
    std::vector<char> is_concept(g.relations.size(), 0);
    for (auto r : concept_relations) {
        if (r >= g.relations.size()) throw DataError("concept relation out of range");
        is_concept[r] = 1;
    }
    std::set<Index> out;
    for (const auto& t : g.triples()) {
        if (!is_concept[t.relation]) continue;
        const auto& s = stats[t.relation];
        out.insert(s.range <= s.domain ? t.tail : t.head);
    }
    return {out.begin(), out.end()};
}

Harvest harvest(const std::vector<IngestionRecord>& records, const IdTable& vertices, std::size_t mention_threshold) {
    Harvest h;
    // (vertex, folded surface) -> contexts, ordered for a canonical result
    std::map<std::pair<std::string, std::string>, std::vector<Context>> grouped;
    for (const auto& rec : records) {
        if (!vertices.contains(rec.vertex)) {
            ++h.report.unknown_vertex;
            continue;
        }
        auto surface = lower(single_line(rec.mention_surface));
        auto sentence = single_line(rec.sentence);
        if (surface.empty() || lower(sentence).find(surface) == std::string::npos) {
            ++h.report.surface_not_found;
            continue;
        }
        grouped[{rec.vertex, surface}].push_back({0, single_line(rec.origin), std::move(sentence)});
    }
    std::vector<Context> kept;
    for (auto& [key, ctxs] : grouped) {
        if (ctxs.size() < mention_threshold) {
            ++h.report.dropped_mentions;
            h.report.dropped_contexts += ctxs.size();
            continue;
        }
        auto m = h.mentions.add({key.first + ":" + key.second, vertices.at(key.first), key.second});
        for (auto& c : ctxs) {
            c.mention = m;
            kept.push_back(std::move(c));
        }
    }
    std::stable_sort(kept.begin(), kept.end(), [&](const Context& a, const Context& b) {
        return std::tie(h.mentions[a.mention].id, a.origin, a.sentence) <
               std::tie(h.mentions[b.mention].id, b.origin, b.sentence);
    });
    for (auto& c : kept) h.contexts.add(std::move(c));
    return h;
}

DatasetBundle split(const KnowledgeGraph& g, const MentionMap& mentions, const ContextStore& contexts,
                    const BuildConfig& config, const RelationOverrides& overrides) {
    config.validate();
    for (const auto& m : mentions.all())
        if (m.vertex >= g.vertices.size()) throw DataError("mention '" + m.id + "' has unknown vertex");
    for (const auto& c : contexts.all())
        if (c.mention >= mentions.size()) throw DataError("context references unknown mention");

    auto sel = select_relations(g, graph_stats(g), config, overrides);

    // graph restricted to the kept relations; vertex table unchanged
    KnowledgeGraph kept;
    for (Index v = 0; v < g.vertices.size(); ++v) kept.vertices.add(g.vertices.id(v), g.vertices.label(v));
    std::vector<Index> rmap(g.relations.size(), static_cast<Index>(-1));
    {
        auto ids = sel.kept_relations;
        std::sort(ids.begin(), ids.end(), [&](Index a, Index b) { return g.relations.id(a) < g.relations.id(b); });
        for (auto r : ids) rmap[r] = kept.relations.add(g.relations.id(r), g.relations.label(r));
    }
    for (const auto& t : g.triples())
        if (rmap[t.relation] != static_cast<Index>(-1)) kept.add_triple({t.head, rmap[t.relation], t.tail});
    std::vector<Index> concept_rel;
    for (auto r : sel.concept_relations) concept_rel.push_back(rmap[r]);

    std::vector<char> is_concept(g.vertices.size(), 0);
    for (auto v : concept_vertices(kept, concept_rel)) is_concept[v] = 1;

    // mentions per vertex in id order, so the seeded shuffle is canonical
    auto per_vertex = mentions.by_vertex(g.vertices.size());
    std::vector<char> closed(mentions.size(), 0);
    std::mt19937_64 rng(config.seed);
    for (Index v = 0; v < per_vertex.size(); ++v) {
        auto& ms = per_vertex[v];
        if (ms.empty()) continue;
        std::sort(ms.begin(), ms.end(), [&](Index a, Index b) { return mentions[a].id < mentions[b].id; });
        if (is_concept[v]) {
            for (auto m : ms) closed[m] = 1;
            continue;
        }
        std::shuffle(ms.begin(), ms.end(), rng);
        auto n_closed = fraction_of(ms.size(), config.target_mention_split);
        if (config.closed_world_threshold) n_closed = std::min(n_closed, *config.closed_world_threshold);
        for (std::size_t i = 0; i < n_closed; ++i) closed[ms[i]] = 1;
    }

    std::vector<char> vertex_closed(g.vertices.size(), 0);
    for (Index m = 0; m < mentions.size(); ++m)
        if (closed[m]) vertex_closed[mentions[m].vertex] = 1;

    DatasetBundle b;
    b.graph.vertices = kept.vertices;
    b.graph.relations = kept.relations;
    for (const auto& t : kept.triples())
        if (vertex_closed[t.head] && vertex_closed[t.tail]) b.graph.add_triple(t);

    // open mentions in id order, then a seeded validation/test assignment
    std::vector<Index> open;
    for (Index m = 0; m < mentions.size(); ++m)
        if (!closed[m]) open.push_back(m);
    std::sort(open.begin(), open.end(), [&](Index a, Index c) { return mentions[a].id < mentions[c].id; });
    std::shuffle(open.begin(), open.end(), rng);
    auto n_val = fraction_of(open.size(), config.target_validation_split);

    std::size_t n_closed_total = 0;
    for (auto c : closed) n_closed_total += c;
    if (mentions.size() > 0 && (n_closed_total == 0 || n_val == 0 || n_val == open.size()))
        throw ConfigError("split fractions leave the closed-world, validation or test split empty");

    std::vector<Index> new_id(mentions.size());
    std::vector<int> split_of(mentions.size(), 0);  // 0 closed, 1 validation, 2 test
    for (std::size_t i = 0; i < open.size(); ++i) split_of[open[i]] = i < n_val ? 1 : 2;
    for (Index m = 0; m < mentions.size(); ++m) {
        auto& target = split_of[m] == 0 ? b.closed_mentions
                       : split_of[m] == 1 ? b.validation.mentions
                                          : b.test.mentions;
        new_id[m] = target.add(mentions[m]);
    }
    for (const auto& c : contexts.all()) {
        Context nc = c;
        nc.mention = new_id[c.mention];
        auto& store = split_of[c.mention] == 0 ? b.closed_contexts
                      : split_of[c.mention] == 1 ? b.validation.contexts
                                                 : b.test.contexts;
        store.add(std::move(nc));
    }

    // task triples against the kept graph; the other endpoint must be closed
    std::vector<std::vector<Triple>> as_head(g.vertices.size()), as_tail(g.vertices.size());
    for (const auto& t : kept.triples()) {
        as_head[t.head].push_back(t);
        as_tail[t.tail].push_back(t);
    }
    for (Index m = 0; m < mentions.size(); ++m) {
        if (split_of[m] == 0) continue;
        auto& s = split_of[m] == 1 ? b.validation : b.test;
        auto v = mentions[m].vertex;
        for (const auto& t : as_head[v])
            if (vertex_closed[t.tail]) s.tasks.push_back({new_id[m], t.relation, t.tail, Direction::Tail});
        for (const auto& t : as_tail[v])
            if (vertex_closed[t.head]) s.tasks.push_back({new_id[m], t.relation, t.head, Direction::Head});
    }

    canonicalize(b);
    require_valid(b);
    return b;
}

namespace {

SplitStats split_stats(const OpenSplit& s) {
    SplitStats out;
    out.mentions = s.mentions.size();
    out.contexts = s.contexts.size();
    out.task_triples = s.tasks.size();
    std::set<std::pair<Index, Index>> ranking, linking;
    for (const auto& t : s.tasks) {
        ranking.insert({t.vertex, t.relation});
        linking.insert({t.mention, t.relation});
    }
    out.ranking_queries = ranking.size();
    out.linking_queries = linking.size();
    return out;
}

}  // namespace

StatsReport stats_report(const DatasetBundle& b) {
    StatsReport r;
    r.relations = b.graph.relations.size();
    r.closed_vertices = b.closed_vertices().size();
    r.closed_mentions = b.closed_mentions.size();
    r.closed_triples = b.graph.triples().size();
    r.closed_contexts = b.closed_contexts.size();
    r.validation = split_stats(b.validation);
    r.test = split_stats(b.test);
    return r;
}

std::string StatsReport::to_text() const {
    std::string out;
    auto line = [&](const std::string& k, std::size_t v) { out += k + " = " + std::to_string(v) + "\n"; };
    line("relations", relations);
    line("closed.vertices", closed_vertices);
    line("closed.mentions", closed_mentions);
    line("closed.triples", closed_triples);
    line("closed.contexts", closed_contexts);
    for (auto [name, s] : {std::pair<const char*, const SplitStats*>{"validation", &validation}, {"test", &test}}) {
        std::string p = name;
        line(p + ".mentions", s->mentions);
        line(p + ".contexts", s->contexts);
        line(p + ".ranking_queries", s->ranking_queries);
        line(p + ".linking_queries", s->linking_queries);
        line(p + ".task_triples", s->task_triples);
    }
    return out;
}

}  // namespace owlink
