#ifndef OWLINK_BUNDLE_IO_HPP
#define OWLINK_BUNDLE_IO_HPP

#include <filesystem>
#include <string>

#include "owlink/core.hpp"

namespace owlink {

/// vertices.tsv, relations.tsv and the named triples file of `dir`.
KnowledgeGraph load_graph(const std::filesystem::path& dir, const std::string& triples_file = "triples.tsv");

/// Loads a dataset directory. The result is validated and canonicalized;
/// any problem raises DataError naming the file and line.
DatasetBundle load_bundle(const std::filesystem::path& dir);

struct SaveOptions {
    bool gzip_contexts = false;
};

/// Writes the canonical form of `b`. Refuses invalid bundles before
/// touching the filesystem.
void save_bundle(const DatasetBundle& b, const std::filesystem::path& dir, SaveOptions opts = {});

}  // namespace owlink

#endif
