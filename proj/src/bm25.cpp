#include "owlink/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "owlink/binary_io.hpp"
#include "owlink/kernels.hpp"
#include "owlink/text.hpp"

namespace owlink {

namespace {

constexpr char kIndexMagic[9] = "OWLBM25I";

}  // namespace

double bm25_idf(std::size_t doc_count, std::size_t doc_frequency) {
    const double n = static_cast<double>(doc_frequency);
    return std::log(1.0 + (static_cast<double>(doc_count) - n + 0.5) / (n + 0.5));
}

InvertedIndex InvertedIndex::build(const std::vector<std::vector<std::string>>& docs, Bm25Params params) {
    InvertedIndex idx;
    idx.params_ = params;
    idx.lengths_.reserve(docs.size());
    for (Index d = 0; d < docs.size(); ++d) {
        idx.lengths_.push_back(static_cast<std::uint32_t>(docs[d].size()));
        std::map<std::string_view, std::uint32_t> tf;
        for (const auto& t : docs[d]) ++tf[t];
        for (const auto& [term, n] : tf) {
            auto it = idx.postings_.find(term);
            if (it == idx.postings_.end()) it = idx.postings_.emplace(std::string(term), Postings{}).first;
            it->second.docs.push_back(d);
            it->second.tfs.push_back(n);
        }
    }
    idx.finish();
    return idx;
}

void InvertedIndex::finish() {
    double total = 0.0;
    for (auto l : lengths_) total += l;
    avg_len_ = lengths_.empty() ? 0.0 : total / static_cast<double>(lengths_.size());
    norm_.resize(lengths_.size());
    for (std::size_t d = 0; d < lengths_.size(); ++d) {
        const double rel = avg_len_ > 0 ? static_cast<double>(lengths_[d]) / avg_len_ : 0.0;
        norm_[d] = params_.k1 * (1.0 - params_.b + params_.b * rel);
    }
}

std::size_t InvertedIndex::doc_frequency(std::string_view term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.docs.size();
}

double InvertedIndex::idf(std::string_view term) const { return bm25_idf(doc_count(), doc_frequency(term)); }

std::vector<double> InvertedIndex::score_all(std::span<const std::string> query) const {
    std::map<std::string_view, std::uint32_t> qtf;
    for (const auto& t : query) ++qtf[t];
    std::vector<kernels::TermPostings> terms;
    for (const auto& [term, q] : qtf) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& p = it->second;
        terms.push_back({p.docs, p.tfs, static_cast<double>(q) * bm25_idf(doc_count(), p.docs.size())});
    }
    std::vector<double> out(doc_count());
    kernels::bm25(terms, norm_, params_.k1, out);
    return out;
}

double InvertedIndex::score(std::span<const std::string> query, Index doc) const {
    if (doc >= doc_count()) throw std::out_of_range("bm25: document not in index");
    return score_all(query)[doc];
}

RankedList InvertedIndex::search(std::span<const std::string> query, std::size_t top_n) const {
    auto scores = score_all(query);
    std::vector<RankedItem> items;
    for (Index d = 0; d < scores.size(); ++d)
        if (scores[d] > 0) items.push_back({d, scores[d]});
    std::sort(items.begin(), items.end(), ranks_before);
    if (top_n > 0 && items.size() > top_n) items.resize(top_n);
    return RankedList::from_scores(std::move(items));
}

void InvertedIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("unwritable path: " + path.string());
    binio::put_magic(out, kIndexMagic);
    binio::put_u32(out, 1);
    binio::put_f64(out, params_.k1);
    binio::put_f64(out, params_.b);
    binio::put_u32(out, static_cast<std::uint32_t>(lengths_.size()));
    for (auto l : lengths_) binio::put_u32(out, l);
    binio::put_u32(out, static_cast<std::uint32_t>(postings_.size()));
    for (const auto& [term, p] : postings_) {
        binio::put_string(out, term);
        binio::put_u32(out, static_cast<std::uint32_t>(p.docs.size()));
        for (std::size_t i = 0; i < p.docs.size(); ++i) {
            binio::put_u32(out, p.docs[i]);
            binio::put_u32(out, p.tfs[i]);
        }
    }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    binio::expect_magic(in, kIndexMagic);
    if (auto v = binio::get_u32(in); v != 1) throw std::runtime_error("unsupported index version " + std::to_string(v));
    InvertedIndex idx;
    idx.params_.k1 = binio::get_f64(in);
    idx.params_.b = binio::get_f64(in);
    idx.lengths_.resize(binio::get_u32(in));
    for (auto& l : idx.lengths_) l = binio::get_u32(in);
    const auto n_terms = binio::get_u32(in);
    for (std::uint32_t t = 0; t < n_terms; ++t) {
        auto term = binio::get_string(in);
        Postings p;
        const auto n = binio::get_u32(in);
        for (std::uint32_t i = 0; i < n; ++i) {
            p.docs.push_back(binio::get_u32(in));
            p.tfs.push_back(binio::get_u32(in));
            if (p.docs.back() >= idx.lengths_.size() || (i > 0 && p.docs[i] <= p.docs[i - 1]))
                throw std::runtime_error(path.string() + ": corrupt postings for '" + term + "'");
        }
        idx.postings_.emplace(std::move(term), std::move(p));
    }
    idx.finish();
    return idx;
}

std::vector<std::string> bow_tokens(std::string_view sentence) { return split_words(sentence); }

namespace {

std::vector<std::vector<Index>> closed_contexts_by_vertex(const DatasetBundle& b) {
    std::vector<std::vector<Index>> out(b.graph.vertices.size());
    for (Index i = 0; i < b.closed_contexts.size(); ++i)
        out[b.closed_mentions[b.closed_contexts[i].mention].vertex].push_back(i);
    return out;
}

// Vertices completing the partial triple: for a tail-side vertex v the
// partners are heads h with (h, r, v); for a head-side v, tails t with (v, r, t).
std::vector<Index> partners(const KnowledgeGraph& g, Index vertex, Index relation, Direction side) {
    std::vector<Index> out;
    for (const auto& t : g.triples()) {
        if (t.relation != relation) continue;
        if (side == Direction::Tail && t.tail == vertex) out.push_back(t.head);
        if (side == Direction::Head && t.head == vertex) out.push_back(t.tail);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

template <typename T>
std::vector<T> sample(std::vector<T> xs, std::size_t n, std::mt19937_64& rng) {
    if (xs.size() <= n) return xs;
    std::shuffle(xs.begin(), xs.end(), rng);
    xs.resize(n);
    return xs;
}

}  // namespace

InvertedIndex build_vertex_index(const DatasetBundle& bundle, Bm25Params params) {
    const auto by_vertex = closed_contexts_by_vertex(bundle);
    std::vector<std::vector<std::string>> docs(by_vertex.size());
    for (std::size_t v = 0; v < by_vertex.size(); ++v)
        for (auto c : by_vertex[v])
            for (auto& t : bow_tokens(bundle.closed_contexts[c].sentence)) docs[v].push_back(std::move(t));
    return InvertedIndex::build(docs, params);
}

std::vector<std::string> ranking_query(const DatasetBundle& bundle, Index vertex, Index relation, Direction dir,
                                       const BowOptions& options, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto by_vertex = closed_contexts_by_vertex(bundle);
    std::vector<std::string> query;
    for (auto rep : sample(partners(bundle.graph, vertex, relation, dir), options.n_repr, rng))
        for (auto c : sample(by_vertex[rep], options.n_ctx, rng))
            for (auto& t : bow_tokens(bundle.closed_contexts[c].sentence)) query.push_back(std::move(t));
    return query;
}

RankedList rank_contexts_bow(const DatasetBundle& bundle, const InvertedIndex& context_index, Index vertex,
                             Index relation, Direction dir, const BowOptions& options, std::uint64_t seed) {
    if (options.n_repr == 0) return {};
    if (partners(bundle.graph, vertex, relation, dir).empty()) return {};
    auto query = ranking_query(bundle, vertex, relation, dir, options, seed);
    auto scores = context_index.score_all(query);
    std::vector<Index> ids(scores.size());
    for (Index i = 0; i < ids.size(); ++i) ids[i] = i;
    return RankedList::from_scores(ids, scores);
}

RankedList link_mention_bow(const DatasetBundle& bundle, const InvertedIndex& vertex_index,
                            std::span<const std::string> mention_sentences, Index relation, Direction dir,
                            const BowOptions& options, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::string> sentences(mention_sentences.begin(), mention_sentences.end());
    std::vector<std::string> query;
    for (const auto& s : sample(std::move(sentences), options.n_ctx, rng))
        for (auto& t : bow_tokens(s)) query.push_back(std::move(t));
    auto hits = vertex_index.search(query, options.top_n);

    // the mention plays the role of each retrieved vertex; a tail-side target
    // u completes (v, r, u), a head-side target completes (u, r, v)
    const Direction partner_side = dir == Direction::Tail ? Direction::Head : Direction::Tail;
    std::map<Index, double> acc;
    for (std::size_t p = 0; p < hits.size(); ++p)
        for (auto u : partners(bundle.graph, hits[p].id, relation, partner_side))
            acc[u] += 1.0 / static_cast<double>(p + 1);
    std::vector<RankedItem> items;
    for (const auto& [u, s] : acc) items.push_back({u, s});
    return RankedList::from_scores(std::move(items));
}

}  // namespace owlink
