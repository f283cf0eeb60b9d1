#include "owlink/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <tuple>
#include <unordered_set>

#include "owlink/kernels.hpp"
#include "owlink/tsv.hpp"

namespace owlink {

// ---- ranked lists ----

namespace {

void require_unique(const std::vector<RankedItem>& items) {
    std::unordered_set<Index> seen;
    for (const auto& it : items)
        if (!seen.insert(it.id).second)
            throw std::invalid_argument("ranked list has duplicate id " + std::to_string(it.id));
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return splitmix(splitmix(splitmix(seed ^ a) ^ b) ^ c);
}

}  // namespace

RankedList RankedList::from_scores(std::vector<RankedItem> items) {
    require_unique(items);
    std::sort(items.begin(), items.end(), ranks_before);
    RankedList l;
    l.items_ = std::move(items);
    return l;
}

RankedList RankedList::from_scores(std::span<const Index> ids, std::span<const double> scores) {
    if (ids.size() != scores.size()) throw std::invalid_argument("ids and scores differ in length");
    std::vector<RankedItem> items(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) items[i] = {ids[i], scores[i]};
    return from_scores(std::move(items));
}

RankedList RankedList::from_ordered(std::vector<RankedItem> items) {
    require_unique(items);
    RankedList l;
    l.items_ = std::move(items);
    return l;
}

RankedList RankedList::softmax() const {
    std::vector<double> s(items_.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = items_[i].score;
    kernels::softmax_inplace(s);
    RankedList l = *this;
    for (std::size_t i = 0; i < s.size(); ++i) l.items_[i].score = s[i];
    return l;
}

FilteredRank target_filtered_rank(const RankedList& ranking, std::span<const Index> truths, Index target) {
    if (std::find(truths.begin(), truths.end(), target) == truths.end())
        throw std::invalid_argument("target is not one of the truths");
    const std::unordered_set<Index> others(truths.begin(), truths.end());
    std::size_t pos = 0;
    for (const auto& it : ranking.items()) {
        if (it.id == target) return {pos + 1, true};
        if (!others.count(it.id)) ++pos;
    }
    return {pos + 1, false};
}

// ---- helpers ----

std::string_view to_string(Task t) { return t == Task::Ranking ? "ranking" : "linking"; }

Task parse_task(std::string_view s) {
    if (s == "ranking") return Task::Ranking;
    if (s == "linking") return Task::Linking;
    throw std::invalid_argument("unknown task '" + std::string(s) + "' (expected ranking or linking)");
}

std::vector<Index> sample_contexts(std::size_t total, std::size_t n, std::uint64_t seed) {
    std::vector<Index> all(total);
    std::iota(all.begin(), all.end(), Index{0});
    if (n >= total) return all;
    std::mt19937_64 rng(seed);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(n);
    std::sort(all.begin(), all.end());
    return all;
}

RankedList contexts_to_mentions(const RankedList& contexts, const ContextStore& store) {
    std::vector<RankedItem> out;
    std::unordered_set<Index> seen;
    for (const auto& it : contexts.items()) {
        if (it.id >= store.size()) throw std::out_of_range("context index out of range");
        const Index m = store[it.id].mention;
        if (seen.insert(m).second) out.push_back({m, it.score});
    }
    return RankedList::from_ordered(std::move(out));
}

namespace {

std::vector<Index> sample_ids(std::vector<Index> ids, std::size_t n, std::uint64_t seed) {
    if (ids.size() <= n) return ids;
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    ids.resize(n);
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace

// ---- neural ----

NeuralRanker::NeuralRanker(const OpenWorldModel& model, const DatasetBundle& bundle, const OpenSplit& split,
                           std::string_view split_name, const EvalOptions& options, const ExternalEncodings* external)
    : model_(model), split_(split), options_(options) {
    if (model.graph.n_entities != bundle.graph.vertices.size() ||
        model.graph.n_relations != bundle.graph.relations.size())
        throw std::invalid_argument("model is not bound to this dataset");
    if (model.external != (external != nullptr))
        throw std::invalid_argument(model.external ? "model expects external encodings"
                                                   : "model was trained without external encodings");
    features_ = prepare_contexts(model.vocab, split.contexts, split.mentions, split_name, model.masked, external);
    sampled_ = sample_contexts(split.contexts.size(), options.subsample, options.seed);
    const std::size_t w = model.graph.width();
    reps_.resize(sampled_.size() * w);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::size_t i = 0; i < sampled_.size(); ++i) {
        auto y = project(model.projection, model.text_vector(features_, sampled_[i]));
        std::copy(y.begin(), y.end(), reps_.begin() + static_cast<std::ptrdiff_t>(i * w));
    }
    candidates_ = bundle.closed_vertices();
    by_mention_ = split.contexts.by_mention(split.mentions.size());
}

RankedList NeuralRanker::rank_contexts(Index vertex, Index relation, Direction dir) const {
    if (sampled_.empty()) throw std::invalid_argument("empty query corpus");
    const auto& g = model_.graph;
    // psi(c, r, v) = <c, v (.) conj r> and psi(v, r, c) = <c, v (.) r>
    std::vector<double> q(g.width());
    query_vector(g.entity_row(vertex), g.relation_row(relation), dir == Direction::Tail ? Direction::Head : Direction::Tail,
                 q);
    std::vector<double> scores(sampled_.size());
    kernels::score_all(q, {reps_.data(), sampled_.size(), g.width()}, scores);
    return RankedList::from_scores(sampled_, scores).softmax();
}

RankedList NeuralRanker::link(Index mention, Index relation, Direction dir) const {
    if (mention >= by_mention_.size() || by_mention_[mention].empty())
        throw std::invalid_argument("mention '" + (mention < split_.mentions.size() ? split_.mentions[mention].id : "?") +
                                    "' has no contexts");
    auto sigma = sample_ids(by_mention_[mention], options_.ctx_per_mention,
                            mix_seed(options_.seed, mention, relation, static_cast<std::uint64_t>(dir)));
    auto c = model_.represent(features_, sigma);
    auto scores = open_scores(model_, c, relation, dir, candidates_);
    return RankedList::from_scores(candidates_, scores);
}

// ---- bm25 ----

BowRanker::BowRanker(const DatasetBundle& bundle, const OpenSplit& split, const EvalOptions& eval_options,
                     const BowOptions& options, const InvertedIndex* vertex_index)
    : bundle_(bundle), split_(split), eval_options_(eval_options), options_(options) {
    sampled_ = sample_contexts(split.contexts.size(), eval_options.subsample, eval_options.seed);
    std::vector<std::vector<std::string>> docs;
    docs.reserve(sampled_.size());
    for (auto c : sampled_) docs.push_back(bow_tokens(split.contexts[c].sentence));
    context_index_ = InvertedIndex::build(docs, options.params);
    vertex_index_ = vertex_index ? *vertex_index : build_vertex_index(bundle, options.params);
    if (vertex_index_.doc_count() != bundle.graph.vertices.size())
        throw std::invalid_argument("vertex index does not match the dataset");
    by_mention_ = split.contexts.by_mention(split.mentions.size());
}

RankedList BowRanker::rank_contexts(Index vertex, Index relation, Direction dir) const {
    auto local = rank_contexts_bow(bundle_, context_index_, vertex, relation, dir, options_,
                                   mix_seed(options_.seed, vertex, relation, static_cast<std::uint64_t>(dir)));
    // sampled_ is ascending, so relabelling keeps the (score, id) order
    std::vector<RankedItem> items;
    items.reserve(local.size());
    for (const auto& it : local.items()) items.push_back({sampled_[it.id], it.score});
    return RankedList::from_ordered(std::move(items));
}

RankedList BowRanker::link(Index mention, Index relation, Direction dir) const {
    std::vector<std::string> sentences;
    for (auto c : by_mention_.at(mention)) sentences.push_back(split_.contexts[c].sentence);
    if (sentences.empty()) return {};
    return link_mention_bow(bundle_, vertex_index_, sentences, relation, dir, options_,
                            mix_seed(options_.seed, mention, relation, static_cast<std::uint64_t>(dir)));
}

// ---- random ----

RandomRanker::RandomRanker(const DatasetBundle& bundle, const OpenSplit& split, std::uint64_t seed)
    : n_contexts_(split.contexts.size()), candidates_(bundle.closed_vertices()), seed_(seed) {}

RankedList RandomRanker::rank_contexts(Index vertex, Index relation, Direction dir) const {
    std::vector<RankedItem> items(n_contexts_);
    const auto s = mix_seed(seed_, vertex, relation, static_cast<std::uint64_t>(dir));
    for (Index i = 0; i < n_contexts_; ++i)
        items[i] = {i, static_cast<double>(splitmix(s ^ i) >> 11) * 0x1.0p-53};
    return RankedList::from_scores(std::move(items));
}

RankedList RandomRanker::link(Index mention, Index relation, Direction dir) const {
    std::vector<RankedItem> items;
    const auto s = mix_seed(seed_ + 1, mention, relation, static_cast<std::uint64_t>(dir));
    for (auto v : candidates_) items.push_back({v, static_cast<double>(splitmix(s ^ v) >> 11) * 0x1.0p-53});
    return RankedList::from_scores(std::move(items));
}

// ---- protocol ----

double EvalReport::hits_at(std::size_t k) const {
    for (std::size_t i = 0; i < ks.size(); ++i)
        if (ks[i] == k) return hits[i];
    throw std::invalid_argument("hits@" + std::to_string(k) + " was not computed");
}

std::string EvalReport::to_text() const {
    std::string out;
    char buf[64];
    auto line = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return std::string(buf);
    };
    line("task", std::string(to_string(task)));
    line("split", split);
    if (!model.empty()) line("model", model);
    line("seed", std::to_string(seed));
    line("subsample", std::to_string(subsample));
    line("ctx_per_mention", std::to_string(ctx_per_mention));
    line("triples", std::to_string(triples));
    line("queries", std::to_string(queries));
    line("misses", std::to_string(misses));
    for (std::size_t i = 0; i < ks.size(); ++i) line("hits@" + std::to_string(ks[i]), num(hits[i]));
    line("mrr", num(mrr));
    return out;
}

void EvalReport::write_queries_tsv(const std::filesystem::path& path, const DatasetBundle& bundle,
                                   const OpenSplit& split) const {
    LineWriter w(path);
    w.write_line(task == Task::Ranking ? "# vertex\trelation\tdirection\tmention\trank\tfound"
                                       : "# mention\trelation\tdirection\tvertex\trank\tfound");
    for (const auto& r : results) {
        const std::string& query =
            task == Task::Ranking ? bundle.graph.vertices.id(r.query) : split.mentions[r.query].id;
        const std::string& target =
            task == Task::Ranking ? split.mentions[r.target].id : bundle.graph.vertices.id(r.target);
        w.write_line(join_tabs({query, bundle.graph.relations.id(r.relation), std::string(to_string(r.direction)),
                                target, std::to_string(r.rank), r.found ? "1" : "0"}));
    }
}

void summarize(EvalReport& report) {
    report.triples = report.results.size();
    report.hits.assign(report.ks.size(), 0.0);
    report.mrr = 0.0;
    report.misses = 0;
    for (const auto& r : report.results) {
        if (!r.found) {
            ++report.misses;
            continue;
        }
        report.mrr += 1.0 / static_cast<double>(r.rank);
        for (std::size_t i = 0; i < report.ks.size(); ++i)
            if (r.rank <= report.ks[i]) report.hits[i] += 1.0;
    }
    if (report.triples == 0) return;
    const double n = static_cast<double>(report.triples);
    report.mrr /= n;
    for (auto& h : report.hits) h /= n;
}

EvalReport evaluate(Task task, const Ranker& ranker, const DatasetBundle& bundle, const OpenSplit& split,
                    std::string_view split_name, const EvalOptions& options) {
    (void)bundle;
    EvalReport report;
    report.task = task;
    report.split = std::string(split_name);
    report.ks = options.ks;
    report.subsample = options.subsample;
    report.ctx_per_mention = options.ctx_per_mention;
    report.seed = options.seed;

    // query key -> (truths, task triples in file order)
    using Key = std::tuple<Index, Index, int>;
    std::map<Key, std::vector<Index>> truths;
    std::vector<Key> order;
    for (const auto& t : split.tasks) {
        const Index query = task == Task::Ranking ? t.vertex : t.mention;
        const Index target = task == Task::Ranking ? t.mention : t.vertex;
        Key k{query, t.relation, static_cast<int>(t.direction)};
        auto [it, fresh] = truths.try_emplace(k);
        if (fresh) order.push_back(k);
        if (std::find(it->second.begin(), it->second.end(), target) == it->second.end()) it->second.push_back(target);
    }
    report.queries = order.size();

    std::vector<std::vector<QueryResult>> per_query(order.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t q = 0; q < order.size(); ++q) {
        const auto [query, rel, dir_i] = order[q];
        const auto dir = static_cast<Direction>(dir_i);
        RankedList list = task == Task::Ranking ? contexts_to_mentions(ranker.rank_contexts(query, rel, dir), split.contexts)
                                                : ranker.link(query, rel, dir);
        const auto& tr = truths.at(order[q]);
        for (auto target : tr) {
            auto fr = target_filtered_rank(list, tr, target);
            per_query[q].push_back({query, rel, dir, target, fr.rank, fr.found});
        }
    }
    for (auto& v : per_query) report.results.insert(report.results.end(), v.begin(), v.end());
    summarize(report);
    return report;
}

}  // namespace owlink
