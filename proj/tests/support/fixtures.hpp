#ifndef OWLINK_TEST_FIXTURES_HPP
#define OWLINK_TEST_FIXTURES_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "owlink/builder.hpp"
#include "owlink/core.hpp"
#include "owlink/inductive.hpp"

namespace owlink::fixtures {

std::filesystem::path data_dir();
std::filesystem::path tiny_dir();

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

/// Random graph with `n_triples` distinct triples (fewer if saturated).
KnowledgeGraph random_graph(std::size_t n_vertices, std::size_t n_relations, std::size_t n_triples,
                            std::uint64_t seed);

/// 50 vertices, 5 relations; each relation maps 20 random heads to random
/// tails.
KnowledgeGraph memorization_graph(std::uint64_t seed);

/// Raw inputs for the dataset builder.
struct RawCorpus {
    KnowledgeGraph graph;
    MentionMap mentions;
    ContextStore contexts;
};
RawCorpus random_corpus(std::uint64_t seed);

/// Independent re-derivation of the builder's guarantees; returns every
/// violation found.
std::vector<std::string> split_oracle(const RawCorpus& raw, const BuildConfig& config, const DatasetBundle& out);

/// Unique-identifier fixture: 100 entities with 10 aliases each over a random
/// 3-relation graph. Every context of an entity carries the entity's
/// identifier token; aliases are split 70/30 by the dataset builder.
struct IdentifierFixture {
    DatasetBundle bundle;
    /// Same bundle with the identifier tokens of open-world contexts
    /// relabelled by a random permutation.
    DatasetBundle shuffled;
};
IdentifierFixture identifier_fixture(std::uint64_t seed);

/// Random model over `bundle` with small dimensions (for gradient checks).
OpenWorldModel random_model(std::size_t vocab, std::size_t d_in, std::size_t d, std::size_t n_vertices,
                            std::size_t n_relations, std::uint64_t seed);

}  // namespace owlink::fixtures

#endif
