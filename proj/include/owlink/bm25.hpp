#ifndef OWLINK_BM25_HPP
#define OWLINK_BM25_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "owlink/core.hpp"
#include "owlink/ranking.hpp"

namespace owlink {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    friend bool operator==(const Bm25Params&, const Bm25Params&) = default;
};

/// idf(t) = ln(1 + (N - n + 0.5) / (n + 0.5)); never negative.
double bm25_idf(std::size_t doc_count, std::size_t doc_frequency);

class InvertedIndex {
public:
    struct Postings {
        std::vector<Index> docs;  // ascending
        std::vector<std::uint32_t> tfs;

        friend bool operator==(const Postings&, const Postings&) = default;
    };

    InvertedIndex() = default;
    /// Each document is a token multiset (order irrelevant).
    static InvertedIndex build(const std::vector<std::vector<std::string>>& docs, Bm25Params params = {});

    std::size_t doc_count() const { return lengths_.size(); }
    double avg_doc_length() const { return avg_len_; }
    const std::vector<std::uint32_t>& doc_lengths() const { return lengths_; }
    const Bm25Params& params() const { return params_; }
    const std::map<std::string, Postings, std::less<>>& postings() const { return postings_; }
    std::size_t doc_frequency(std::string_view term) const;
    double idf(std::string_view term) const;

    /// BM25 of every document. A query term occurring q times contributes
    /// q times; distinct terms are added in lexicographic order.
    std::vector<double> score_all(std::span<const std::string> query) const;
    double score(std::span<const std::string> query, Index doc) const;

    /// Documents with a positive score, by (score desc, id asc); at most
    /// `top_n` of them when top_n > 0.
    RankedList search(std::span<const std::string> query, std::size_t top_n = 0) const;

    void save(const std::filesystem::path& path) const;
    static InvertedIndex load(const std::filesystem::path& path);

    friend bool operator==(const InvertedIndex&, const InvertedIndex&) = default;

private:
    void finish();

    Bm25Params params_;
    std::map<std::string, Postings, std::less<>> postings_;
    std::vector<std::uint32_t> lengths_;
    double avg_len_ = 0.0;
    std::vector<double> norm_;
};

struct BowOptions {
    Bm25Params params;
    std::size_t n_repr = 10;
    std::size_t n_ctx = 20;
    std::size_t top_n = 25;
    std::uint64_t seed = 0;
};

/// Tokens of a sentence for retrieval (no masking).
std::vector<std::string> bow_tokens(std::string_view sentence);

/// Vertex documents: the concatenated closed-world contexts of each vertex.
/// Document i belongs to vertex i.
InvertedIndex build_vertex_index(const DatasetBundle& bundle, Bm25Params params = {});

/// Query document for context ranking: sampled closed-world contexts of up
/// to n_repr representatives completing the partial triple. Empty when no
/// representative exists.
std::vector<std::string> ranking_query(const DatasetBundle& bundle, Index vertex, Index relation, Direction dir,
                                       const BowOptions& options, std::uint64_t seed);

/// Contexts of the indexed corpus ranked against the query document; every
/// document is listed. Empty when there is no representative.
RankedList rank_contexts_bow(const DatasetBundle& bundle, const InvertedIndex& context_index, Index vertex,
                             Index relation, Direction dir, const BowOptions& options, std::uint64_t seed);

/// Links a mention (given its context sentences) to closed vertices by
/// accumulating 1/p over retrieved vertex documents at position p.
RankedList link_mention_bow(const DatasetBundle& bundle, const InvertedIndex& vertex_index,
                            std::span<const std::string> mention_sentences, Index relation, Direction dir,
                            const BowOptions& options, std::uint64_t seed);

}  // namespace owlink

#endif
