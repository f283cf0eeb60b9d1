#include <doctest.h>

#include <fstream>

#include "fixtures.hpp"
#include "owlink/text.hpp"

using namespace owlink;

TEST_CASE("words are lower-cased runs of letters and digits") {
    CHECK(split_words("Alice Smith, born 1970!") == std::vector<std::string>{"alice", "smith", "born", "1970"});
    CHECK(split_words("  ").empty());
    CHECK(split_words("Zürich-Nord") == std::vector<std::string>{"zürich", "nord"});
}

TEST_CASE("vocabulary keeps reserved ids and first-seen order") {
    const auto v = Vocabulary::build({"b a b", "c a"}, 2);
    CHECK(v.size() == 4);
    CHECK(v.token(Vocabulary::kUnknown) == Vocabulary::kUnknownToken);
    CHECK(v.token(Vocabulary::kMask) == Vocabulary::kMaskToken);
    CHECK(v.token(2) == "b");
    CHECK(v.token(3) == "a");
    CHECK(v.lookup("c") == Vocabulary::kUnknown);

    auto dir = fixtures::temp_dir("vocab");
    v.save(dir / "vocab.txt");
    CHECK(Vocabulary::load(dir / "vocab.txt") == v);
}

TEST_CASE("masking replaces every surface word") {
    const auto v = Vocabulary::build({"alice smith was born in paris"});
    const auto ids = tokenize("Alice Smith was born in Paris", v, std::string_view("alice smith"));
    REQUIRE(ids.size() == 6);
    CHECK(ids[0] == Vocabulary::kMask);
    CHECK(ids[1] == Vocabulary::kMask);
    CHECK(ids[2] == v.lookup("was"));
    const auto plain = tokenize("Alice met Zed", v);
    CHECK(plain[0] == v.lookup("alice"));
    CHECK(plain[2] == Vocabulary::kUnknown);
}

TEST_CASE("encoding is the mean of token rows, projection is affine") {
    auto enc = init_encoder(5, 3, 1);
    const std::vector<Index> toks = {2, 4, 2};
    const auto x = encode(enc, toks);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(x[k] == doctest::Approx((2 * enc.row(2)[k] + enc.row(4)[k]) / 3));
    CHECK(encode(enc, std::vector<Index>{}) == std::vector<double>(3, 0.0));
    CHECK_THROWS_AS(encode(enc, std::vector<Index>{9}), std::out_of_range);

    const auto p = init_projection(3, 2, 4);
    const auto y = project(p, x);
    REQUIRE(y.size() == 4);
    for (std::size_t j = 0; j < 4; ++j) {
        double want = p.bias[j];
        for (std::size_t i = 0; i < 3; ++i) want += p.weight[i * 4 + j] * x[i];
        CHECK(y[j] == doctest::Approx(want));
    }
}

TEST_CASE("multi-context encoding averages before projecting") {
    const auto enc = init_encoder(6, 4, 2);
    const auto p = init_projection(4, 3, 3);
    const std::vector<std::vector<Index>> ctx = {{2, 3}, {4}, {5, 5, 2}};
    const auto multi = encode_multi(enc, p, ctx);
    // linearity: mean of projected singles equals projected mean
    std::vector<double> mean(6, 0.0);
    for (const auto& c : ctx) {
        const auto y = project(p, encode(enc, c));
        for (std::size_t j = 0; j < 6; ++j) mean[j] += y[j] / 3;
    }
    for (std::size_t j = 0; j < 6; ++j) CHECK(multi[j] == doctest::Approx(mean[j]).epsilon(1e-12));
    CHECK_THROWS(encode_multi(enc, p, {}));
}

TEST_CASE("external encodings round trip and reject bad files") {
    ExternalEncodings e;
    e.dim = 3;
    e.vectors["test/0"] = {0.1, -2.5, 1e-20};
    e.vectors["closed/4"] = {1, 2, 3};
    auto dir = fixtures::temp_dir("external");
    export_external_encodings(e, dir / "enc.tsv");
    CHECK(import_external_encodings(dir / "enc.tsv") == e);

    {
        std::ofstream out(dir / "bad.tsv");
        out << "1 3\nclosed/0\t1 2\n";
    }
    CHECK_THROWS_AS(import_external_encodings(dir / "bad.tsv"), DataError);
    {
        std::ofstream out(dir / "count.tsv");
        out << "2 2\nclosed/0\t1 2\n";
    }
    CHECK_THROWS_AS(import_external_encodings(dir / "count.tsv"), DataError);
    CHECK(context_key("test", 12) == "test/12");
}
