#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "owlink/bundle_io.hpp"
#include "owlink/tsv.hpp"

using namespace owlink;
namespace fs = std::filesystem;

namespace {

void append(const fs::path& p, const std::string& line) {
    std::ofstream out(p, std::ios::app);
    out << line << "\n";
}

std::string error_of(const fs::path& dir) {
    try {
        load_bundle(dir);
    } catch (const DataError& e) {
        return e.what();
    }
    return {};
}

fs::path tiny_copy(const std::string& name) {
    auto dir = fixtures::temp_dir(name);
    for (const auto& e : fs::directory_iterator(fixtures::tiny_dir())) fs::copy(e.path(), dir / e.path().filename());
    return dir;
}

}  // namespace

TEST_CASE("the tiny bundle loads with the expected contents") {
    const auto b = load_bundle(fixtures::tiny_dir());
    CHECK(b.graph.vertices.size() == 6);
    CHECK(b.graph.relations.size() == 2);
    CHECK(b.graph.triples().size() == 3);
    CHECK(b.closed_mentions.size() == 4);
    CHECK(b.closed_contexts.size() == 6);
    CHECK(b.validation.mentions.size() == 1);
    CHECK(b.test.contexts.size() == 2);
    REQUIRE(b.test.tasks.size() == 2);
    const auto& t = b.test.tasks[0];
    CHECK(b.graph.relations.id(t.relation) == "born_in");
    CHECK(b.graph.vertices.id(t.vertex) == "berlin");
    CHECK(t.direction == Direction::Tail);
    CHECK(b.closed_mentions[0].surface == "Alice Smith");
}

TEST_CASE("save then load is the identity, also with gzip contexts") {
    const auto b = load_bundle(fixtures::tiny_dir());
    for (bool gz : {false, true}) {
        auto dir = fixtures::temp_dir(gz ? "roundtrip-gz" : "roundtrip");
        save_bundle(b, dir, {gz});
        CHECK(fs::exists(dir / (gz ? "contexts.closed.tsv.gz" : "contexts.closed.tsv")));
        CHECK(load_bundle(dir) == b);
    }
}

TEST_CASE("saving an invalid bundle leaves the directory untouched") {
    auto b = load_bundle(fixtures::tiny_dir());
    b.test.tasks.push_back({0, 0, b.graph.vertices.at("dave"), Direction::Tail});
    auto dir = fixtures::temp_dir("invalid-save");
    CHECK_THROWS_AS(save_bundle(b, dir), DataError);
    CHECK(fs::is_empty(dir));
}

TEST_CASE("load errors name file and line") {
    SUBCASE("dangling vertex in a triple") {
        auto dir = tiny_copy("bad-triple");
        append(dir / "triples.closed.tsv", "alice\tknows\tnobody");
        const auto msg = error_of(dir);
        CHECK(msg.find("triples.closed.tsv:5") != std::string::npos);
        CHECK(msg.find("nobody") != std::string::npos);
    }
    SUBCASE("wrong column count") {
        auto dir = tiny_copy("bad-columns");
        append(dir / "mentions.closed.tsv", "x:x\talice");
        CHECK(error_of(dir).find("mentions.closed.tsv:6") != std::string::npos);
    }
    SUBCASE("bad direction") {
        auto dir = tiny_copy("bad-direction");
        append(dir / "tasks.open-test.tsv", "carol:carol\tknows\tbob\tsideways");
        CHECK(error_of(dir).find("tasks.open-test.tsv:4") != std::string::npos);
    }
    SUBCASE("context for unknown mention") {
        auto dir = tiny_copy("bad-context");
        append(dir / "contexts.open-test.tsv", "eve:eve\tx\tEve is here.");
        CHECK(error_of(dir).find("unknown mention id 'eve:eve'") != std::string::npos);
    }
    SUBCASE("missing file") {
        auto dir = tiny_copy("missing-file");
        fs::remove(dir / "tasks.open-validation.tsv");
        CHECK(error_of(dir).find("tasks.open-validation.tsv") != std::string::npos);
    }
    SUBCASE("task vertex that is not closed-world") {
        auto dir = tiny_copy("open-task-vertex");
        append(dir / "tasks.open-test.tsv", "carol:carol\tknows\tdave\ttail");
        CHECK(error_of(dir).find("not closed-world") != std::string::npos);
    }
}

TEST_CASE("gzip line reader and writer round trip") {
    auto dir = fixtures::temp_dir("gz-lines");
    {
        LineWriter w(dir / "x.tsv.gz");
        for (int i = 0; i < 1000; ++i) w.write_line("line\t" + std::to_string(i));
    }
    LineReader r(dir / "x.tsv.gz");
    std::string line;
    int n = 0;
    while (r.next(line)) {
        CHECK(line == "line\t" + std::to_string(n));
        ++n;
    }
    CHECK(n == 1000);
}

TEST_CASE("tab splitting keeps empty fields") {
    const auto cols = split_tabs("a\t\tc");
    REQUIRE(cols.size() == 3);
    CHECK(cols[1].empty());
    CHECK(join_tabs({"a", "", "c"}) == "a\t\tc");
}
