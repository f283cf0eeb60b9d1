#ifndef OWLINK_WORKBENCH_HPP
#define OWLINK_WORKBENCH_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "owlink/bm25.hpp"
#include "owlink/core.hpp"
#include "owlink/eval.hpp"
#include "owlink/inductive.hpp"

namespace owlink {

/// Error with a machine-readable code ("unknown-relation", "no-contexts", ...)
/// and the HTTP status it maps to.
class WorkbenchError : public std::runtime_error {
public:
    WorkbenchError(std::string code, const std::string& message, int status = 400)
        : std::runtime_error(message), code_(std::move(code)), status_(status) {}
    const std::string& code() const { return code_; }
    int status() const { return status_; }

private:
    std::string code_;
    int status_;
};

enum class Engine { Neural, Bow };
Engine parse_engine(std::string_view s);
std::string_view to_string(Engine e);

struct OverlayEntry {
    std::uint64_t id = 0;
    std::string mention;
    std::string relation;
    std::string vertex;
    Direction direction = Direction::Tail;
    std::string timestamp;
    std::string provenance;

    friend bool operator==(const OverlayEntry&, const OverlayEntry&) = default;
};

/// Active overlay after replaying an append-only log of accept and
/// retract records, in acceptance order.
class Overlay {
public:
    /// Appends an accept record unless an identical active triple exists;
    /// returns the entry id either way.
    std::uint64_t accept(OverlayEntry entry, std::string* log_line = nullptr);
    /// Appends a tombstone; false when `id` is not active.
    bool retract(std::uint64_t id, const std::string& timestamp, std::string* log_line = nullptr);

    std::vector<OverlayEntry> active() const;
    std::size_t log_size() const { return log_.size(); }
    const std::vector<std::string>& log() const { return log_; }

    /// Rebuilds the state from log lines.
    static Overlay replay(const std::vector<std::string>& lines);

private:
    std::vector<OverlayEntry> entries_;
    std::vector<bool> retracted_;
    std::vector<std::string> log_;
    std::uint64_t next_id_ = 1;
};

struct RankingItem {
    Index context = 0;
    std::string sentence;
    std::string mention;
    double score = 0.0;
};

struct LinkingItem {
    std::string vertex;
    std::string label;
    double score = 0.0;
};

template <typename T>
struct Page {
    std::size_t total = 0;
    std::size_t offset = 0;
    std::vector<T> items;
};

struct WorkspaceOptions {
    std::string split = "test";
    EvalOptions eval;
    BowOptions bow;
    /// Append-only overlay log; empty keeps the overlay in memory only.
    std::filesystem::path overlay_log;
};

class Workspace {
public:
    Workspace(DatasetBundle bundle, std::optional<OpenWorldModel> model, WorkspaceOptions options,
              const ExternalEncodings* external = nullptr);

    Page<RankingItem> query_ranking(std::string_view vertex, std::string_view relation, std::string_view direction,
                                    std::size_t limit, std::size_t offset, Engine engine) const;
    Page<LinkingItem> query_linking(std::string_view mention, std::string_view relation, std::string_view direction,
                                    std::size_t limit, std::size_t offset, Engine engine) const;

    std::uint64_t accept_triple(std::string_view mention, std::string_view relation, std::string_view vertex,
                                std::string_view direction, std::string provenance = "workbench");
    void retract_triple(std::uint64_t id);

    /// Active overlay rows in the tasks TSV format, header included.
    std::string export_tsv() const;
    void export_overlay(const std::filesystem::path& path) const;

    struct Stats {
        std::size_t vertices, relations, closed_triples, closed_mentions, closed_contexts;
        std::size_t split_mentions, split_contexts, split_tasks;
        std::size_t overlay_active, overlay_log;
        bool has_model;
        std::string split;
    };
    Stats stats() const;

    const DatasetBundle& bundle() const { return bundle_; }
    const OpenSplit& split() const { return bundle_.open(options_.split); }
    const Ranker& ranker(Engine e) const;

private:
    Index vertex_index(std::string_view id) const;
    Index relation_index(std::string_view id) const;
    Index mention_index(std::string_view id) const;

    DatasetBundle bundle_;
    std::optional<OpenWorldModel> model_;
    WorkspaceOptions options_;
    std::unique_ptr<Ranker> neural_;
    std::unique_ptr<Ranker> bow_;
    std::vector<std::vector<Index>> contexts_by_mention_;

    mutable std::shared_mutex mutex_;
    Overlay overlay_;
};

/// JSON API over a workspace. Every response body is {"data": ..., "error": ...}.
class HttpService {
public:
    explicit HttpService(Workspace& ws);
    ~HttpService();
    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    /// Binds to `port`, or to a free port when 0; returns the bound port.
    int bind(const std::string& host, int port);
    void listen();  // blocks until stop()
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace owlink

#endif
