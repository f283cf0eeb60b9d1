#include "owlink/workbench.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>

#include "owlink/tsv.hpp"

namespace owlink {

Engine parse_engine(std::string_view s) {
    if (s == "neural" || s.empty()) return Engine::Neural;
    if (s == "bow") return Engine::Bow;
    throw WorkbenchError("unknown-engine", "unknown engine '" + std::string(s) + "' (expected neural or bow)");
}

std::string_view to_string(Engine e) { return e == Engine::Neural ? "neural" : "bow"; }

namespace {

std::string now_utc() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Direction direction_arg(std::string_view s) {
    try {
        return parse_direction(s);
    } catch (const std::exception&) {
        throw WorkbenchError("unknown-direction", "direction must be head or tail, got '" + std::string(s) + "'");
    }
}

}  // namespace

// ---- overlay ----

std::uint64_t Overlay::accept(OverlayEntry entry, std::string* log_line) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (!retracted_[i] && e.mention == entry.mention && e.relation == entry.relation && e.vertex == entry.vertex &&
            e.direction == entry.direction)
            return e.id;
    }
    if (entry.id == 0) entry.id = next_id_;
    next_id_ = std::max(next_id_, entry.id + 1);
    auto line = join_tabs({"accept", std::to_string(entry.id), entry.mention, entry.relation, entry.vertex,
                           std::string(to_string(entry.direction)), entry.timestamp, entry.provenance});
    entries_.push_back(std::move(entry));
    retracted_.push_back(false);
    log_.push_back(line);
    if (log_line) *log_line = std::move(line);
    return entries_.back().id;
}

bool Overlay::retract(std::uint64_t id, const std::string& timestamp, std::string* log_line) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].id != id || retracted_[i]) continue;
        retracted_[i] = true;
        auto line = join_tabs({"retract", std::to_string(id), timestamp});
        log_.push_back(line);
        if (log_line) *log_line = std::move(line);
        return true;
    }
    return false;
}

std::vector<OverlayEntry> Overlay::active() const {
    std::vector<OverlayEntry> out;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (!retracted_[i]) out.push_back(entries_[i]);
    return out;
}

Overlay Overlay::replay(const std::vector<std::string>& lines) {
    Overlay o;
    for (std::size_t n = 0; n < lines.size(); ++n) {
        if (lines[n].empty()) continue;
        auto cols = split_tabs(lines[n]);
        const std::string where = "overlay log line " + std::to_string(n + 1);
        if (cols[0] == "accept" && cols.size() == 8) {
            OverlayEntry e{std::stoull(std::string(cols[1])), std::string(cols[2]), std::string(cols[3]),
                           std::string(cols[4]), parse_direction(cols[5]), std::string(cols[6]), std::string(cols[7])};
            o.accept(std::move(e));
        } else if (cols[0] == "retract" && cols.size() == 3) {
            if (!o.retract(std::stoull(std::string(cols[1])), std::string(cols[2])))
                throw DataError(where + ": retracts an entry that is not active");
        } else {
            throw DataError(where + ": malformed record");
        }
    }
    return o;
}

// ---- workspace ----

Workspace::Workspace(DatasetBundle bundle, std::optional<OpenWorldModel> model, WorkspaceOptions options,
                     const ExternalEncodings* external)
    : bundle_(std::move(bundle)), model_(std::move(model)), options_(std::move(options)) {
    const auto& s = bundle_.open(options_.split);
    if (model_) neural_ = std::make_unique<NeuralRanker>(*model_, bundle_, s, options_.split, options_.eval, external);
    bow_ = std::make_unique<BowRanker>(bundle_, s, options_.eval, options_.bow);
    contexts_by_mention_ = s.contexts.by_mention(s.mentions.size());
    if (!options_.overlay_log.empty() && std::filesystem::exists(options_.overlay_log)) {
        std::vector<std::string> lines;
        LineReader in(options_.overlay_log);
        std::string line;
        while (in.next(line)) lines.push_back(line);
        overlay_ = Overlay::replay(lines);
    }
}

const Ranker& Workspace::ranker(Engine e) const {
    if (e == Engine::Bow) return *bow_;
    if (!neural_) throw WorkbenchError("no-model", "no neural model loaded; use engine=bow", 409);
    return *neural_;
}

Index Workspace::vertex_index(std::string_view id) const {
    if (auto p = bundle_.graph.vertices.find(id)) return *p;
    throw WorkbenchError("unknown-vertex", "unknown vertex '" + std::string(id) + "'", 404);
}

Index Workspace::relation_index(std::string_view id) const {
    if (auto p = bundle_.graph.relations.find(id)) return *p;
    throw WorkbenchError("unknown-relation", "unknown relation '" + std::string(id) + "'", 404);
}

Index Workspace::mention_index(std::string_view id) const {
    if (auto p = split().mentions.find(id)) return *p;
    throw WorkbenchError("unknown-mention", "unknown mention '" + std::string(id) + "'", 404);
}

namespace {

template <typename T, typename Fn>
Page<T> paginate(const RankedList& list, std::size_t limit, std::size_t offset, Fn make) {
    Page<T> page;
    page.total = list.size();
    page.offset = offset;
    for (std::size_t i = offset; i < list.size() && i < offset + limit; ++i) page.items.push_back(make(list[i]));
    return page;
}

}  // namespace

Page<RankingItem> Workspace::query_ranking(std::string_view vertex, std::string_view relation,
                                           std::string_view direction, std::size_t limit, std::size_t offset,
                                           Engine engine) const {
    const Index v = vertex_index(vertex);
    const Index r = relation_index(relation);
    const Direction dir = direction_arg(direction);
    const auto& rk = ranker(engine);
    const auto list = rk.rank_contexts(v, r, dir);
    const auto& s = split();
    return paginate<RankingItem>(list, limit, offset, [&](const RankedItem& it) {
        const auto& c = s.contexts[it.id];
        return RankingItem{it.id, c.sentence, s.mentions[c.mention].id, it.score};
    });
}

Page<LinkingItem> Workspace::query_linking(std::string_view mention, std::string_view relation,
                                           std::string_view direction, std::size_t limit, std::size_t offset,
                                           Engine engine) const {
    const Index m = mention_index(mention);
    const Index r = relation_index(relation);
    const Direction dir = direction_arg(direction);
    if (contexts_by_mention_[m].empty())
        throw WorkbenchError("no-contexts", "mention '" + std::string(mention) + "' has no contexts", 422);
    const auto list = ranker(engine).link(m, r, dir);
    const auto& vs = bundle_.graph.vertices;
    return paginate<LinkingItem>(list, limit, offset, [&](const RankedItem& it) {
        return LinkingItem{vs.id(it.id), vs.label(it.id), it.score};
    });
}

std::uint64_t Workspace::accept_triple(std::string_view mention, std::string_view relation, std::string_view vertex,
                                       std::string_view direction, std::string provenance) {
    mention_index(mention);
    relation_index(relation);
    vertex_index(vertex);
    const Direction dir = direction_arg(direction);
    std::unique_lock lock(mutex_);
    std::string line;
    const auto before = overlay_.log_size();
    const auto id = overlay_.accept({0, std::string(mention), std::string(relation), std::string(vertex), dir,
                                     now_utc(), std::move(provenance)},
                                    &line);
    if (overlay_.log_size() != before && !options_.overlay_log.empty()) {
        std::ofstream out(options_.overlay_log, std::ios::app);
        if (!out || !(out << line << '\n'))
            throw WorkbenchError("unwritable-path", "cannot append to " + options_.overlay_log.string(), 500);
    }
    return id;
}

void Workspace::retract_triple(std::uint64_t id) {
    std::unique_lock lock(mutex_);
    std::string line;
    if (!overlay_.retract(id, now_utc(), &line))
        throw WorkbenchError("unknown-triple", "no active overlay triple with id " + std::to_string(id), 404);
    if (!options_.overlay_log.empty()) {
        std::ofstream out(options_.overlay_log, std::ios::app);
        if (!out || !(out << line << '\n'))
            throw WorkbenchError("unwritable-path", "cannot append to " + options_.overlay_log.string(), 500);
    }
}

std::string Workspace::export_tsv() const {
    std::shared_lock lock(mutex_);
    std::string out = "# mention_id\trelation\tvertex\tdirection\n";
    for (const auto& e : overlay_.active())
        out += join_tabs({e.mention, e.relation, e.vertex, std::string(to_string(e.direction))}) + "\n";
    return out;
}

void Workspace::export_overlay(const std::filesystem::path& path) const {
    const auto text = export_tsv();
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text))
        throw WorkbenchError("unwritable-path", "cannot write " + path.string(), 500);
}

Workspace::Stats Workspace::stats() const {
    std::shared_lock lock(mutex_);
    const auto& s = split();
    return {bundle_.graph.vertices.size(),
            bundle_.graph.relations.size(),
            bundle_.graph.triples().size(),
            bundle_.closed_mentions.size(),
            bundle_.closed_contexts.size(),
            s.mentions.size(),
            s.contexts.size(),
            s.tasks.size(),
            overlay_.active().size(),
            overlay_.log_size(),
            model_.has_value(),
            options_.split};
}

}  // namespace owlink
