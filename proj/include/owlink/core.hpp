#ifndef OWLINK_CORE_HPP
#define OWLINK_CORE_HPP

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace owlink {

using Index = std::uint32_t;

/// Raised for any malformed, dangling or inconsistent dataset content.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Which endpoint of a triple is predicted. `Tail` means the known side is
/// the head; `Head` means the known side is the tail.
enum class Direction { Head, Tail };

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view s);

struct Triple {
    Index head = 0;
    Index relation = 0;
    Index tail = 0;

    friend bool operator==(const Triple&, const Triple&) = default;
    friend auto operator<=>(const Triple&, const Triple&) = default;
};

/// Labeled id table; ids are opaque keys, labels are never used for lookup.
class IdTable {
public:
    Index add(std::string id, std::string label);
    Index at(std::string_view id) const;
    const Index* find(std::string_view id) const;
    bool contains(std::string_view id) const { return find(id) != nullptr; }

    std::size_t size() const { return ids_.size(); }
    const std::string& id(Index i) const { return ids_[i]; }
    const std::string& label(Index i) const { return labels_[i]; }
    const std::vector<std::string>& ids() const { return ids_; }

    friend bool operator==(const IdTable& a, const IdTable& b) {
        return a.ids_ == b.ids_ && a.labels_ == b.labels_;
    }

private:
    std::vector<std::string> ids_;
    std::vector<std::string> labels_;
    std::unordered_map<std::string, Index> index_;
};

class KnowledgeGraph {
public:
    IdTable vertices;
    IdTable relations;

    /// Throws DataError on dangling indices or duplicates.
    void add_triple(Triple t);
    bool has_triple(const Triple& t) const;
    const std::vector<Triple>& triples() const { return triples_; }

    friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
        return a.vertices == b.vertices && a.relations == b.relations && a.triples_ == b.triples_;
    }

private:
    std::vector<Triple> triples_;
    std::set<Triple> present_;
};

struct Mention {
    std::string id;
    Index vertex = 0;
    std::string surface;

    friend bool operator==(const Mention&, const Mention&) = default;
};

/// Vertex-scoped mentions: identical surfaces under different vertices are
/// distinct mention ids.
class MentionMap {
public:
    Index add(Mention m);
    Index at(std::string_view id) const;
    const Index* find(std::string_view id) const;

    std::size_t size() const { return mentions_.size(); }
    const Mention& operator[](Index i) const { return mentions_[i]; }
    const std::vector<Mention>& all() const { return mentions_; }

    /// Mention indices grouped by vertex index.
    std::vector<std::vector<Index>> by_vertex(std::size_t vertex_count) const;

    friend bool operator==(const MentionMap& a, const MentionMap& b) {
        return a.mentions_ == b.mentions_;
    }

private:
    std::vector<Mention> mentions_;
    std::unordered_map<std::string, Index> index_;
};

struct Context {
    Index mention = 0;
    std::string origin;
    std::string sentence;

    friend bool operator==(const Context&, const Context&) = default;
};

class ContextStore {
public:
    void add(Context c);
    std::size_t size() const { return records_.size(); }
    const Context& operator[](Index i) const { return records_[i]; }
    const std::vector<Context>& all() const { return records_; }
    std::vector<Context>& mutable_records() { return records_; }

    /// Context indices grouped by mention index.
    std::vector<std::vector<Index>> by_mention(std::size_t mention_count) const;

    friend bool operator==(const ContextStore&, const ContextStore&) = default;

private:
    std::vector<Context> records_;
};

/// Ground truth unit shared by ranking and linking: the open-world mention,
/// the relation, the closed-world vertex and which side the vertex is on.
struct TaskTriple {
    Index mention = 0;
    Index relation = 0;
    Index vertex = 0;
    Direction direction = Direction::Tail;

    friend bool operator==(const TaskTriple&, const TaskTriple&) = default;
};

struct OpenSplit {
    MentionMap mentions;
    ContextStore contexts;
    std::vector<TaskTriple> tasks;

    friend bool operator==(const OpenSplit&, const OpenSplit&) = default;
};

struct DatasetBundle {
    KnowledgeGraph graph;
    MentionMap closed_mentions;
    ContextStore closed_contexts;
    OpenSplit validation;
    OpenSplit test;

    const OpenSplit& open(std::string_view name) const;

    /// Closed-world vertices: those carrying a closed-world mention or
    /// occurring in a closed-world triple. Sorted by vertex index.
    std::vector<Index> closed_vertices() const;

    friend bool operator==(const DatasetBundle&, const DatasetBundle&) = default;
};

/// Returns every invariant violation; empty when the bundle is sound.
std::vector<std::string> validate(const DatasetBundle& b);

/// Throws DataError listing all violations.
void require_valid(const DatasetBundle& b);

/// Re-orders every table by id (contexts by mention id, origin, sentence)
/// and remaps indices accordingly.
void canonicalize(DatasetBundle& b);

struct RelationStats {
    std::size_t domain = 0;  // distinct heads
    std::size_t range = 0;   // distinct tails
    std::size_t triples = 0;
};

std::vector<RelationStats> graph_stats(const KnowledgeGraph& g);

}  // namespace owlink

#endif
