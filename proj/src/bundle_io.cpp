#include "owlink/bundle_io.hpp"

#include "owlink/tsv.hpp"

namespace owlink {

namespace fs = std::filesystem;

namespace {

std::string where(const fs::path& p, std::size_t line) { return p.filename().string() + ":" + std::to_string(line); }

fs::path context_file(const fs::path& dir, std::string_view split) {
    auto plain = dir / ("contexts." + std::string(split) + ".tsv");
    auto gz = dir / ("contexts." + std::string(split) + ".tsv.gz");
    if (!fs::exists(plain) && fs::exists(gz)) return gz;
    return plain;
}

void load_mentions(const fs::path& path, const KnowledgeGraph& g, MentionMap& out) {
    read_records(path, 3, [&](const auto& cols, std::size_t line) {
        auto v = g.vertices.find(cols[1]);
        if (!v) throw DataError(where(path, line) + ": unknown vertex id '" + std::string(cols[1]) + "'");
        try {
            out.add({std::string(cols[0]), *v, std::string(cols[2])});
        } catch (const DataError& e) {
            throw DataError(where(path, line) + ": " + e.what());
        }
    });
}

void load_contexts(const fs::path& path, const MentionMap& mentions, ContextStore& out) {
    read_records(path, 3, [&](const auto& cols, std::size_t line) {
        auto m = mentions.find(cols[0]);
        if (!m) throw DataError(where(path, line) + ": unknown mention id '" + std::string(cols[0]) + "'");
        if (cols[2].empty()) throw DataError(where(path, line) + ": empty sentence");
        out.add({*m, std::string(cols[1]), std::string(cols[2])});
    });
}

void load_tasks(const fs::path& path, const KnowledgeGraph& g, const MentionMap& mentions,
                std::vector<TaskTriple>& out) {
    read_records(path, 4, [&](const auto& cols, std::size_t line) {
        auto m = mentions.find(cols[0]);
        if (!m) throw DataError(where(path, line) + ": unknown mention id '" + std::string(cols[0]) + "'");
        auto r = g.relations.find(cols[1]);
        if (!r) throw DataError(where(path, line) + ": unknown relation id '" + std::string(cols[1]) + "'");
        auto v = g.vertices.find(cols[2]);
        if (!v) throw DataError(where(path, line) + ": unknown vertex id '" + std::string(cols[2]) + "'");
        Direction d;
        try {
            d = parse_direction(cols[3]);
        } catch (const DataError& e) {
            throw DataError(where(path, line) + ": " + e.what());
        }
        out.push_back({*m, *r, *v, d});
    });
}

void load_split(const fs::path& dir, std::string_view name, const KnowledgeGraph& g, OpenSplit& s) {
    load_mentions(dir / ("mentions." + std::string(name) + ".tsv"), g, s.mentions);
    load_contexts(context_file(dir, name), s.mentions, s.contexts);
    load_tasks(dir / ("tasks." + std::string(name) + ".tsv"), g, s.mentions, s.tasks);
}

void check_files(const fs::path& dir) {
    const char* required[] = {"vertices.tsv", "relations.tsv", "triples.closed.tsv",
                              "mentions.closed.tsv", "mentions.open-validation.tsv", "mentions.open-test.tsv",
                              "tasks.open-validation.tsv", "tasks.open-test.tsv"};
    std::string missing;
    for (const char* f : required)
        if (!fs::exists(dir / f)) missing += std::string(missing.empty() ? "" : ", ") + f;
    for (const char* s : {"closed", "open-validation", "open-test"})
        if (!fs::exists(context_file(dir, s)))
            missing += std::string(missing.empty() ? "" : ", ") + "contexts." + s + ".tsv";
    if (!missing.empty()) throw DataError("missing file in " + dir.string() + ": " + missing);
}

void write_mentions(const fs::path& path, const KnowledgeGraph& g, const MentionMap& ms) {
    LineWriter w(path);
    w.write_line("# mention_id\tvertex_id\tsurface");
    for (const auto& m : ms.all()) w.write_line(join_tabs({m.id, g.vertices.id(m.vertex), m.surface}));
}

void write_contexts(const fs::path& path, const MentionMap& ms, const ContextStore& cs) {
    LineWriter w(path);
    w.write_line("# mention_id\torigin\tsentence");
    for (const auto& c : cs.all()) w.write_line(join_tabs({ms[c.mention].id, c.origin, c.sentence}));
}

void write_tasks(const fs::path& path, const KnowledgeGraph& g, const OpenSplit& s) {
    LineWriter w(path);
    w.write_line("# mention_id\trelation\tvertex\tdirection");
    for (const auto& t : s.tasks)
        w.write_line(join_tabs({s.mentions[t.mention].id, g.relations.id(t.relation), g.vertices.id(t.vertex),
                                to_string(t.direction)}));
}

}  // namespace

KnowledgeGraph load_graph(const fs::path& dir, const std::string& triples_file) {
    KnowledgeGraph g;
    read_records(dir / "vertices.tsv", 2, [&](const auto& cols, std::size_t line) {
        try {
            g.vertices.add(std::string(cols[0]), std::string(cols[1]));
        } catch (const DataError& e) {
            throw DataError(where(dir / "vertices.tsv", line) + ": " + e.what());
        }
    });
    read_records(dir / "relations.tsv", 2, [&](const auto& cols, std::size_t line) {
        try {
            g.relations.add(std::string(cols[0]), std::string(cols[1]));
        } catch (const DataError& e) {
            throw DataError(where(dir / "relations.tsv", line) + ": " + e.what());
        }
    });
    const auto tpath = dir / triples_file;
    read_records(tpath, 3, [&](const auto& cols, std::size_t line) {
        auto h = g.vertices.find(cols[0]);
        auto r = g.relations.find(cols[1]);
        auto t = g.vertices.find(cols[2]);
        if (!h) throw DataError(where(tpath, line) + ": unknown vertex id '" + std::string(cols[0]) + "'");
        if (!r) throw DataError(where(tpath, line) + ": unknown relation id '" + std::string(cols[1]) + "'");
        if (!t) throw DataError(where(tpath, line) + ": unknown vertex id '" + std::string(cols[2]) + "'");
        try {
            g.add_triple({*h, *r, *t});
        } catch (const DataError& e) {
            throw DataError(where(tpath, line) + ": " + e.what());
        }
    });
    return g;
}

DatasetBundle load_bundle(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("missing file: dataset directory " + dir.string());
    check_files(dir);

    DatasetBundle b;
    b.graph = load_graph(dir, "triples.closed.tsv");
    auto& g = b.graph;
    load_mentions(dir / "mentions.closed.tsv", g, b.closed_mentions);
    load_contexts(context_file(dir, "closed"), b.closed_mentions, b.closed_contexts);
    load_split(dir, "open-validation", g, b.validation);
    load_split(dir, "open-test", g, b.test);

    require_valid(b);
    canonicalize(b);
    return b;
}

void save_bundle(const DatasetBundle& in, const fs::path& dir, SaveOptions opts) {
    require_valid(in);
    DatasetBundle b = in;
    canonicalize(b);

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("unwritable path: " + dir.string());

    const auto& g = b.graph;
    {
        LineWriter w(dir / "vertices.tsv");
        w.write_line("# id\tlabel");
        for (Index v = 0; v < g.vertices.size(); ++v) w.write_line(join_tabs({g.vertices.id(v), g.vertices.label(v)}));
    }
    {
        LineWriter w(dir / "relations.tsv");
        w.write_line("# id\tlabel");
        for (Index r = 0; r < g.relations.size(); ++r)
            w.write_line(join_tabs({g.relations.id(r), g.relations.label(r)}));
    }
    {
        LineWriter w(dir / "triples.closed.tsv");
        w.write_line("# head\trelation\ttail");
        for (const auto& t : g.triples())
            w.write_line(join_tabs({g.vertices.id(t.head), g.relations.id(t.relation), g.vertices.id(t.tail)}));
    }
    const std::string ext = opts.gzip_contexts ? ".tsv.gz" : ".tsv";
    auto ctx_path = [&](std::string_view split) {
        // never leave a stale file of the other compression next to the new one
        fs::remove(dir / ("contexts." + std::string(split) + (opts.gzip_contexts ? ".tsv" : ".tsv.gz")));
        return dir / ("contexts." + std::string(split) + ext);
    };
    write_mentions(dir / "mentions.closed.tsv", g, b.closed_mentions);
    write_contexts(ctx_path("closed"), b.closed_mentions, b.closed_contexts);
    for (auto [name, split] : {std::pair<const char*, const OpenSplit*>{"open-validation", &b.validation},
                               {"open-test", &b.test}}) {
        write_mentions(dir / ("mentions." + std::string(name) + ".tsv"), g, split->mentions);
        write_contexts(ctx_path(name), split->mentions, split->contexts);
        write_tasks(dir / ("tasks." + std::string(name) + ".tsv"), g, *split);
    }
}

}  // namespace owlink
