#ifndef OWLINK_BUILDER_HPP
#define OWLINK_BUILDER_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "owlink/config.hpp"
#include "owlink/core.hpp"

namespace owlink {

struct IngestionRecord {
    std::string vertex;
    std::string mention_surface;
    std::string sentence;
    std::string origin;
};

/// Reads vertex<TAB>surface<TAB>origin<TAB>sentence records (.gz allowed).
std::vector<IngestionRecord> read_ingestion(const std::filesystem::path& path);

struct BuildConfig {
    std::size_t concept_relation_count = 0;
    std::size_t total_relation_count = 0;
    std::optional<std::size_t> closed_world_threshold;
    double target_mention_split = 0.7;
    double target_validation_split = 0.1;
    std::size_t mention_threshold = 0;
    std::uint64_t seed = 0;

    /// Throws ConfigError listing every problem.
    void validate() const;

    static BuildConfig from(const KeyValueConfig& kv);
    KeyValueConfig to_config() const;
};

/// Manually chosen relation ids; either list may be left unset.
struct RelationOverrides {
    std::optional<std::vector<std::string>> concept_relations;
    std::optional<std::vector<std::string>> kept_relations;
};

/// min(dom, rg) / max(dom, rg); nullopt when the relation has no triples.
std::optional<double> relation_ratio(std::size_t domain, std::size_t range);

struct RelationSelection {
    std::vector<Index> concept_relations;  // ordered by (ratio, id)
    std::vector<Index> kept_relations;     // ordered by (ratio, id)
    std::vector<Index> undefined;          // relations without triples, skipped
};

RelationSelection select_relations(const KnowledgeGraph& g, const std::vector<RelationStats>& stats,
                                   const BuildConfig& config, const RelationOverrides& overrides = {});

/// Union over concept relations of the minority side: tails when
/// rg(r) <= dom(r), heads otherwise.
std::vector<Index> concept_vertices(const KnowledgeGraph& g, const std::vector<Index>& concept_relations);

struct HarvestReport {
    std::size_t surface_not_found = 0;
    std::size_t unknown_vertex = 0;
    std::size_t dropped_mentions = 0;
    std::size_t dropped_contexts = 0;
};

struct Harvest {
    MentionMap mentions;
    ContextStore contexts;
    HarvestReport report;
};

/// One mention per (vertex, lower-cased surface). Mentions with fewer than
/// `mention_threshold` contexts are dropped together with their contexts.
Harvest harvest(const std::vector<IngestionRecord>& records, const IdTable& vertices, std::size_t mention_threshold);

/// Open/closed split at mention level plus task-triple derivation. The
/// returned bundle is canonical and keeps only the selected relations.
DatasetBundle split(const KnowledgeGraph& g, const MentionMap& mentions, const ContextStore& contexts,
                    const BuildConfig& config, const RelationOverrides& overrides = {});

struct SplitStats {
    std::size_t mentions = 0;
    std::size_t contexts = 0;
    std::size_t task_triples = 0;
    std::size_t ranking_queries = 0;  // distinct (vertex, relation)
    std::size_t linking_queries = 0;  // distinct (mention, relation)
};

struct StatsReport {
    std::size_t relations = 0;
    std::size_t closed_vertices = 0;
    std::size_t closed_mentions = 0;
    std::size_t closed_triples = 0;
    std::size_t closed_contexts = 0;
    SplitStats validation;
    SplitStats test;

    std::string to_text() const;
};

StatsReport stats_report(const DatasetBundle& b);

}  // namespace owlink

#endif
