#include "owlink/core.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_set>

namespace owlink {

std::string_view to_string(Direction d) { return d == Direction::Head ? "head" : "tail"; }

Direction parse_direction(std::string_view s) {
    if (s == "head") return Direction::Head;
    if (s == "tail") return Direction::Tail;
    throw DataError("invalid direction '" + std::string(s) + "' (expected head or tail)");
}

Index IdTable::add(std::string id, std::string label) {
    if (id.empty()) throw DataError("empty id");
    if (index_.count(id)) throw DataError("duplicate id '" + id + "'");
    auto i = static_cast<Index>(ids_.size());
    index_.emplace(id, i);
    ids_.push_back(std::move(id));
    labels_.push_back(std::move(label));
    return i;
}

const Index* IdTable::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &it->second;
}

Index IdTable::at(std::string_view id) const {
    if (auto p = find(id)) return *p;
    throw DataError("unknown id '" + std::string(id) + "'");
}

void KnowledgeGraph::add_triple(Triple t) {
    if (t.head >= vertices.size() || t.tail >= vertices.size() || t.relation >= relations.size())
        throw DataError("triple references unknown vertex or relation");
    if (!present_.insert(t).second)
        throw DataError("duplicate triple (" + vertices.id(t.head) + ", " + relations.id(t.relation) +
                        ", " + vertices.id(t.tail) + ")");
    triples_.push_back(t);
}

bool KnowledgeGraph::has_triple(const Triple& t) const { return present_.count(t) > 0; }

Index MentionMap::add(Mention m) {
    if (m.id.empty()) throw DataError("empty mention id");
    if (m.surface.empty()) throw DataError("mention '" + m.id + "' has an empty surface");
    if (index_.count(m.id)) throw DataError("duplicate mention id '" + m.id + "'");
    auto i = static_cast<Index>(mentions_.size());
    index_.emplace(m.id, i);
    mentions_.push_back(std::move(m));
    return i;
}

const Index* MentionMap::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &it->second;
}

Index MentionMap::at(std::string_view id) const {
    if (auto p = find(id)) return *p;
    throw DataError("unknown mention id '" + std::string(id) + "'");
}

std::vector<std::vector<Index>> MentionMap::by_vertex(std::size_t vertex_count) const {
    std::vector<std::vector<Index>> out(vertex_count);
    for (Index i = 0; i < mentions_.size(); ++i)
        if (mentions_[i].vertex < vertex_count) out[mentions_[i].vertex].push_back(i);
    return out;
}

void ContextStore::add(Context c) { records_.push_back(std::move(c)); }

std::vector<std::vector<Index>> ContextStore::by_mention(std::size_t mention_count) const {
    std::vector<std::vector<Index>> out(mention_count);
    for (Index i = 0; i < records_.size(); ++i)
        if (records_[i].mention < mention_count) out[records_[i].mention].push_back(i);
    return out;
}

const OpenSplit& DatasetBundle::open(std::string_view name) const {
    if (name == "validation" || name == "open-validation") return validation;
    if (name == "test" || name == "open-test") return test;
    throw DataError("unknown split '" + std::string(name) + "'");
}

std::vector<Index> DatasetBundle::closed_vertices() const {
    std::vector<char> mark(graph.vertices.size(), 0);
    for (const auto& m : closed_mentions.all()) mark[m.vertex] = 1;
    for (const auto& t : graph.triples()) mark[t.head] = mark[t.tail] = 1;
    std::vector<Index> out;
    for (Index v = 0; v < mark.size(); ++v)
        if (mark[v]) out.push_back(v);
    return out;
}

namespace {

bool single_line_nonempty(const std::string& s) {
    return !s.empty() && s.find('\n') == std::string::npos && s.find('\r') == std::string::npos;
}

void check_split(const DatasetBundle& b, const OpenSplit& s, std::string_view name,
                 const std::vector<char>& closed, std::vector<std::string>& out) {
    const auto nv = b.graph.vertices.size();
    for (const auto& m : s.mentions.all()) {
        if (m.vertex >= nv) out.push_back(std::string(name) + ": mention '" + m.id + "' has unknown vertex");
        if (b.closed_mentions.find(m.id))
            out.push_back(std::string(name) + ": mention '" + m.id + "' is also closed-world");
    }
    for (std::size_t i = 0; i < s.contexts.size(); ++i) {
        const auto& c = s.contexts[static_cast<Index>(i)];
        if (c.mention >= s.mentions.size())
            out.push_back(std::string(name) + ": context " + std::to_string(i) + " has unknown mention");
        if (!single_line_nonempty(c.sentence))
            out.push_back(std::string(name) + ": context " + std::to_string(i) + " sentence empty or multi-line");
    }
    std::set<std::tuple<Index, Index, Index, int>> seen;
    for (const auto& t : s.tasks) {
        if (t.mention >= s.mentions.size() || t.relation >= b.graph.relations.size() || t.vertex >= nv) {
            out.push_back(std::string(name) + ": task triple with unknown id");
            continue;
        }
        if (!closed[t.vertex])
            out.push_back(std::string(name) + ": task vertex '" + b.graph.vertices.id(t.vertex) +
                          "' is not closed-world");
        if (!seen.insert({t.mention, t.relation, t.vertex, static_cast<int>(t.direction)}).second)
            out.push_back(std::string(name) + ": duplicate task triple for mention '" +
                          s.mentions[t.mention].id + "'");
    }
}

}  // namespace

std::vector<std::string> validate(const DatasetBundle& b) {
    std::vector<std::string> out;
    const auto nv = b.graph.vertices.size();
    for (const auto& m : b.closed_mentions.all())
        if (m.vertex >= nv) out.push_back("closed: mention '" + m.id + "' has unknown vertex");
    for (std::size_t i = 0; i < b.closed_contexts.size(); ++i) {
        const auto& c = b.closed_contexts[static_cast<Index>(i)];
        if (c.mention >= b.closed_mentions.size())
            out.push_back("closed: context " + std::to_string(i) + " has unknown mention");
        if (!single_line_nonempty(c.sentence))
            out.push_back("closed: context " + std::to_string(i) + " sentence empty or multi-line");
    }
    std::vector<char> closed(nv, 0);
    for (auto v : b.closed_vertices()) closed[v] = 1;
    check_split(b, b.validation, "open-validation", closed, out);
    check_split(b, b.test, "open-test", closed, out);
    for (const auto& m : b.validation.mentions.all())
        if (b.test.mentions.find(m.id))
            out.push_back("mention '" + m.id + "' occurs in both open-world splits");
    return out;
}

void require_valid(const DatasetBundle& b) {
    auto errs = validate(b);
    if (errs.empty()) return;
    std::string msg = "invalid bundle:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw DataError(msg);
}

namespace {

std::vector<Index> order_by(std::size_t n, auto less) {
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), less);
    return order;
}

std::vector<Index> inverse(const std::vector<Index>& order) {
    std::vector<Index> inv(order.size());
    for (Index i = 0; i < order.size(); ++i) inv[order[i]] = i;
    return inv;
}

struct MentionRemap {
    MentionMap mentions;
    std::vector<Index> old_to_new;
};

MentionRemap remap_mentions(const MentionMap& in, const std::vector<Index>& vmap) {
    auto order = order_by(in.size(), [&](Index a, Index b) { return in[a].id < in[b].id; });
    MentionRemap r;
    for (auto i : order) {
        Mention m = in[i];
        m.vertex = vmap[m.vertex];
        r.mentions.add(std::move(m));
    }
    r.old_to_new = inverse(order);
    return r;
}

ContextStore remap_contexts(const ContextStore& in, const MentionRemap& mr) {
    std::vector<Context> recs = in.all();
    for (auto& c : recs) c.mention = mr.old_to_new[c.mention];
    const auto& ms = mr.mentions;
    std::stable_sort(recs.begin(), recs.end(), [&](const Context& a, const Context& b) {
        return std::tie(ms[a.mention].id, a.origin, a.sentence) < std::tie(ms[b.mention].id, b.origin, b.sentence);
    });
    ContextStore out;
    for (auto& c : recs) out.add(std::move(c));
    return out;
}

OpenSplit remap_split(const OpenSplit& s, const std::vector<Index>& vmap, const std::vector<Index>& rmap) {
    OpenSplit out;
    auto mr = remap_mentions(s.mentions, vmap);
    out.contexts = remap_contexts(s.contexts, mr);
    out.tasks = s.tasks;
    for (auto& t : out.tasks) {
        t.mention = mr.old_to_new[t.mention];
        t.relation = rmap[t.relation];
        t.vertex = vmap[t.vertex];
    }
    // mention, relation and vertex indices are id-ordered after remapping
    std::sort(out.tasks.begin(), out.tasks.end(), [](const TaskTriple& a, const TaskTriple& b) {
        return std::tuple(a.mention, a.relation, a.vertex, a.direction) <
               std::tuple(b.mention, b.relation, b.vertex, b.direction);
    });
    out.mentions = std::move(mr.mentions);
    return out;
}

}  // namespace

void canonicalize(DatasetBundle& b) {
    const auto& g = b.graph;
    auto vorder = order_by(g.vertices.size(), [&](Index x, Index y) { return g.vertices.id(x) < g.vertices.id(y); });
    auto rorder = order_by(g.relations.size(), [&](Index x, Index y) { return g.relations.id(x) < g.relations.id(y); });
    auto vmap = inverse(vorder);
    auto rmap = inverse(rorder);

    KnowledgeGraph ng;
    for (auto v : vorder) ng.vertices.add(g.vertices.id(v), g.vertices.label(v));
    for (auto r : rorder) ng.relations.add(g.relations.id(r), g.relations.label(r));
    std::vector<Triple> ts;
    ts.reserve(g.triples().size());
    for (const auto& t : g.triples()) ts.push_back({vmap[t.head], rmap[t.relation], vmap[t.tail]});
    std::sort(ts.begin(), ts.end());
    for (const auto& t : ts) ng.add_triple(t);

    auto closed = remap_mentions(b.closed_mentions, vmap);
    b.closed_contexts = remap_contexts(b.closed_contexts, closed);
    b.closed_mentions = std::move(closed.mentions);
    b.validation = remap_split(b.validation, vmap, rmap);
    b.test = remap_split(b.test, vmap, rmap);
    b.graph = std::move(ng);
}

std::vector<RelationStats> graph_stats(const KnowledgeGraph& g) {
    std::vector<RelationStats> out(g.relations.size());
    std::vector<std::unordered_set<Index>> heads(out.size()), tails(out.size());
    for (const auto& t : g.triples()) {
        heads[t.relation].insert(t.head);
        tails[t.relation].insert(t.tail);
        ++out[t.relation].triples;
    }
    for (std::size_t r = 0; r < out.size(); ++r) {
        out[r].domain = heads[r].size();
        out[r].range = tails[r].size();
    }
    return out;
}

}  // namespace owlink
