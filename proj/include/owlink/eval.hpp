#ifndef OWLINK_EVAL_HPP
#define OWLINK_EVAL_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "owlink/bm25.hpp"
#include "owlink/core.hpp"
#include "owlink/inductive.hpp"
#include "owlink/ranking.hpp"

namespace owlink {

enum class Task { Ranking, Linking };

std::string_view to_string(Task t);
Task parse_task(std::string_view s);

struct EvalOptions {
    static constexpr std::size_t kDefaultSubsample = 400000;
    static constexpr std::size_t kDefaultContextsPerMention = 100;

    std::size_t subsample = kDefaultSubsample;  // contexts drawn from Q for ranking
    std::size_t ctx_per_mention = kDefaultContextsPerMention;
    std::uint64_t seed = 0;
    std::vector<std::size_t> ks{1, 10, 100};
};

/// Uniform sample of at most `n` context indices out of `total`, sorted.
std::vector<Index> sample_contexts(std::size_t total, std::size_t n, std::uint64_t seed);

/// Each mention keeps the position of its best-ranked context.
RankedList contexts_to_mentions(const RankedList& contexts, const ContextStore& store);

/// Common interface of the neural models and the BM25 baseline over one
/// open-world split. Both methods are safe to call concurrently.
class Ranker {
public:
    virtual ~Ranker() = default;
    /// Contexts of the split (indices into its context store) for the
    /// partial triple whose closed vertex `vertex` sits on side `dir`.
    virtual RankedList rank_contexts(Index vertex, Index relation, Direction dir) const = 0;
    /// Closed vertices for the mention, the target sitting on side `dir`.
    virtual RankedList link(Index mention, Index relation, Direction dir) const = 0;
};

class NeuralRanker : public Ranker {
public:
    NeuralRanker(const OpenWorldModel& model, const DatasetBundle& bundle, const OpenSplit& split,
                 std::string_view split_name, const EvalOptions& options, const ExternalEncodings* external = nullptr);

    RankedList rank_contexts(Index vertex, Index relation, Direction dir) const override;
    RankedList link(Index mention, Index relation, Direction dir) const override;

    const std::vector<Index>& sampled_contexts() const { return sampled_; }

private:
    const OpenWorldModel& model_;
    const OpenSplit& split_;
    EvalOptions options_;
    ContextFeatures features_;
    std::vector<Index> sampled_;
    std::vector<double> reps_;  // sampled contexts x 2d
    std::vector<Index> candidates_;
    std::vector<std::vector<Index>> by_mention_;
};

class BowRanker : public Ranker {
public:
    BowRanker(const DatasetBundle& bundle, const OpenSplit& split, const EvalOptions& eval_options,
              const BowOptions& options, const InvertedIndex* vertex_index = nullptr);

    RankedList rank_contexts(Index vertex, Index relation, Direction dir) const override;
    RankedList link(Index mention, Index relation, Direction dir) const override;

private:
    const DatasetBundle& bundle_;
    const OpenSplit& split_;
    EvalOptions eval_options_;
    BowOptions options_;
    std::vector<Index> sampled_;
    InvertedIndex context_index_;  // over the sampled contexts
    InvertedIndex vertex_index_;
    std::vector<std::vector<Index>> by_mention_;
};

/// Ranked list of a random scorer, for sanity baselines and tests.
class RandomRanker : public Ranker {
public:
    RandomRanker(const DatasetBundle& bundle, const OpenSplit& split, std::uint64_t seed);
    RankedList rank_contexts(Index vertex, Index relation, Direction dir) const override;
    RankedList link(Index mention, Index relation, Direction dir) const override;

private:
    std::size_t n_contexts_;
    std::vector<Index> candidates_;
    std::uint64_t seed_;
};

struct QueryResult {
    Index query = 0;  // vertex for ranking, mention for linking
    Index relation = 0;
    Direction direction = Direction::Tail;
    Index target = 0;  // mention for ranking, vertex for linking
    std::size_t rank = 0;
    bool found = false;
};

struct EvalReport {
    Task task = Task::Linking;
    std::string split;
    std::string model;
    std::vector<std::size_t> ks;
    std::vector<double> hits;
    double mrr = 0.0;
    std::size_t triples = 0;
    std::size_t queries = 0;
    std::size_t misses = 0;
    std::size_t subsample = 0;
    std::size_t ctx_per_mention = 0;
    std::uint64_t seed = 0;
    std::vector<QueryResult> results;

    double hits_at(std::size_t k) const;
    /// One "key = value" per line with stable key names.
    std::string to_text() const;
    void write_queries_tsv(const std::filesystem::path& path, const DatasetBundle& bundle,
                           const OpenSplit& split) const;
};

/// Micro-averaged metrics from per-triple filtered ranks.
void summarize(EvalReport& report);

EvalReport evaluate(Task task, const Ranker& ranker, const DatasetBundle& bundle, const OpenSplit& split,
                    std::string_view split_name, const EvalOptions& options);

}  // namespace owlink

#endif
