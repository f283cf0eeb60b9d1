#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "owlink/builder.hpp"
#include "owlink/complex.hpp"
#include "owlink/config.hpp"
#include "owlink/inductive.hpp"

using namespace owlink;

TEST_CASE("key value parsing trims and skips comments") {
    const auto kv = KeyValueConfig::parse("# c\n  dim = 12 \n\nname=a b\nflag = yes\n");
    CHECK(kv.get_int("dim", 0) == 12);
    CHECK(kv.get_string("name", "") == "a b");
    CHECK(kv.get_bool("flag", false));
    CHECK(kv.get_double("missing", 2.5) == 2.5);
    CHECK(kv.to_string() == "dim = 12\nflag = yes\nname = a b\n");
    CHECK_THROWS_WITH_AS(KeyValueConfig::parse("a = 1\nbroken\n", "x.conf"), "x.conf:2: expected key = value",
                         ConfigError);
    CHECK_THROWS_AS(KeyValueConfig::parse("= 3"), ConfigError);
}

TEST_CASE("typed getters reject malformed values") {
    const auto kv = KeyValueConfig::parse("i = 3x\nu = -1\nd = 1e-3\nb = maybe\n");
    CHECK_THROWS_AS(kv.get_int("i", 0), ConfigError);
    CHECK_THROWS_AS(kv.get_uint("u", 0), ConfigError);
    CHECK(kv.get_double("d", 0) == 1e-3);
    CHECK_THROWS_AS(kv.get_bool("b", false), ConfigError);
    CHECK(kv.unknown_keys({"i", "d"}) == std::vector<std::string>{"b", "u"});
}

TEST_CASE("later values win on merge") {
    auto a = KeyValueConfig::parse("x = 1\ny = 2\n");
    a.merge(KeyValueConfig::parse("y = 3\nz = 4\n"));
    CHECK(a.get_int("x", 0) == 1);
    CHECK(a.get_int("y", 0) == 3);
    CHECK(a.get_int("z", 0) == 4);
}

TEST_CASE("every shipped preset parses with its family") {
    const auto names = list_presets();
    CHECK(names.size() == 40);
    for (const auto& n : names) {
        CAPTURE(n);
        const auto kv = load_preset(n);
        if (n.rfind("build-", 0) == 0) CHECK_NOTHROW(BuildConfig::from(kv));
        else if (n.rfind("kgc-", 0) == 0) CHECK_NOTHROW(KgcTrainConfig::from(kv));
        else CHECK_NOTHROW(InductiveTrainConfig::from(kv));
    }
    CHECK_THROWS_AS(load_preset("nope"), ConfigError);
}

TEST_CASE("multi presets carry more than one context per sample") {
    CHECK(InductiveTrainConfig::from(load_preset("joint-multi-tiny")).mode() == ContextMode::Multi);
    CHECK(InductiveTrainConfig::from(load_preset("joint-single-tiny")).mode() == ContextMode::Single);
}

TEST_CASE("checksums and the run manifest") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
    auto dir = fixtures::temp_dir("manifest");
    {
        std::ofstream out(dir / "a.txt");
        out << "a";
    }
    CHECK(file_checksum(dir / "a.txt") == "af63dc4c8601ec8c");
    RunManifest m{"owlink x", "00ff", 7, {"in"}, {dir / "a.txt"}, 1.5};
    m.write(dir);
    const auto kv = KeyValueConfig::load(dir / "manifest.txt");
    CHECK(kv.get_string("command", "") == "owlink x");
    CHECK(kv.get_uint("seed", 0) == 7);
    CHECK(kv.get_string("artifact", "") == "a.txt af63dc4c8601ec8c");
    CHECK(kv.get_string("wall_seconds", "") == "1.500");
}
