#include "owlink/text.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "owlink/tsv.hpp"

namespace owlink {

namespace {

bool word_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

}  // namespace

std::vector<std::string> split_words(std::string_view sentence) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : sentence) {
        if (word_char(c)) {
            cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

Vocabulary::Vocabulary() {
    add(std::string(kUnknownToken));
    add(std::string(kMaskToken));
}

Index Vocabulary::add(const std::string& token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    auto i = static_cast<Index>(tokens_.size());
    index_.emplace(token, i);
    tokens_.push_back(token);
    return i;
}

Index Vocabulary::lookup(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnknown : it->second;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& sentences, std::size_t min_count) {
    std::unordered_map<std::string, std::size_t> counts;
    std::vector<std::string> order;
    for (const auto& s : sentences)
        for (auto& w : split_words(s))
            if (counts[w]++ == 0) order.push_back(w);
    Vocabulary v;
    for (const auto& w : order)
        if (counts[w] >= min_count) v.add(w);
    return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    LineReader in(path);
    std::string line;
    std::vector<std::string> tokens;
    while (in.next(line)) tokens.push_back(line);
    if (tokens.size() < 2 || tokens[0] != kUnknownToken || tokens[1] != kMaskToken)
        throw DataError(path.string() + ": vocabulary must start with " + std::string(kUnknownToken) + " and " +
                        std::string(kMaskToken));
    Vocabulary v;
    for (std::size_t i = 2; i < tokens.size(); ++i) {
        if (v.index_.count(tokens[i]))
            throw DataError(path.string() + ":" + std::to_string(i + 1) + ": duplicate token");
        v.add(tokens[i]);
    }
    return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
    LineWriter w(path);
    for (const auto& t : tokens_) w.write_line(t);
}

std::vector<Index> tokenize(std::string_view sentence, const Vocabulary& vocab,
                            std::optional<std::string_view> mask_surface) {
    std::set<std::string> masked;
    if (mask_surface)
        for (auto& w : split_words(*mask_surface)) masked.insert(std::move(w));
    std::vector<Index> out;
    for (const auto& w : split_words(sentence))
        out.push_back(masked.count(w) ? Vocabulary::kMask : vocab.lookup(w));
    return out;
}

TokenEncoder init_encoder(std::size_t vocab_size, std::size_t d, std::uint64_t seed) {
    TokenEncoder enc(vocab_size, d);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 0.1);
    for (auto& x : enc.table) x = normal(rng);
    return enc;
}

std::vector<double> encode(const TokenEncoder& enc, std::span<const Index> tokens) {
    std::vector<double> out(enc.dim, 0.0);
    if (tokens.empty()) return out;
    for (auto t : tokens) {
        if (t >= enc.rows) throw std::out_of_range("token index outside the encoder table");
        auto r = enc.row(t);
        for (std::size_t k = 0; k < enc.dim; ++k) out[k] += r[k];
    }
    const double inv = 1.0 / static_cast<double>(tokens.size());
    for (auto& x : out) x *= inv;
    return out;
}

Projection init_projection(std::size_t d_in, std::size_t complex_dim, std::uint64_t seed) {
    Projection p(d_in, complex_dim);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(d_in)));
    for (auto& x : p.weight) x = normal(rng);
    return p;
}

std::vector<double> project(const Projection& p, std::span<const double> x) {
    if (x.size() != p.in_dim)
        throw std::invalid_argument("project: input has " + std::to_string(x.size()) + " dims, projection expects " +
                                    std::to_string(p.in_dim));
    std::vector<double> y = p.bias;
    for (std::size_t i = 0; i < p.in_dim; ++i) {
        const double xi = x[i];
        const double* w = p.weight.data() + i * p.out_dim;
        for (std::size_t j = 0; j < p.out_dim; ++j) y[j] += w[j] * xi;
    }
    return y;
}

std::vector<double> encode_multi(const TokenEncoder& enc, const Projection& p,
                                 const std::vector<std::vector<Index>>& contexts) {
    if (contexts.empty()) throw std::invalid_argument("encode_multi: empty context set");
    std::vector<double> mean(enc.dim, 0.0);
    for (const auto& c : contexts) {
        auto e = encode(enc, c);
        for (std::size_t k = 0; k < enc.dim; ++k) mean[k] += e[k];
    }
    const double inv = 1.0 / static_cast<double>(contexts.size());
    for (auto& x : mean) x *= inv;
    return project(p, mean);
}

ExternalEncodings import_external_encodings(const std::filesystem::path& path) {
    LineReader in(path);
    std::string line;
    if (!in.next(line)) throw DataError(path.string() + ": empty encodings file");
    std::size_t count = 0, dim = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> count >> dim) || dim == 0) throw DataError(path.string() + ":1: header must be '<count> <dim>'");
    }
    ExternalEncodings out;
    out.dim = dim;
    while (in.next(line)) {
        if (line.empty()) continue;
        auto cols = split_tabs(line);
        if (cols.size() != 2) throw DataError(path.string() + ":" + std::to_string(in.line_number()) + ": malformed line");
        std::vector<double> v;
        std::istringstream vs{std::string(cols[1])};
        double x;
        while (vs >> x) v.push_back(x);
        if (v.size() != dim)
            throw DataError(path.string() + ":" + std::to_string(in.line_number()) + ": dimension " +
                            std::to_string(v.size()) + " differs from header dimension " + std::to_string(dim));
        if (!out.vectors.emplace(std::string(cols[0]), std::move(v)).second)
            throw DataError(path.string() + ":" + std::to_string(in.line_number()) + ": duplicate context id");
    }
    if (out.vectors.size() != count)
        throw DataError(path.string() + ": header announces " + std::to_string(count) + " rows, found " +
                        std::to_string(out.vectors.size()));
    return out;
}

void export_external_encodings(const ExternalEncodings& enc, const std::filesystem::path& path) {
    LineWriter w(path);
    w.write_line(std::to_string(enc.vectors.size()) + " " + std::to_string(enc.dim));
    char buf[32];
    for (const auto& [id, v] : enc.vectors) {
        if (v.size() != enc.dim) throw DataError("encoding '" + id + "' has the wrong dimension");
        std::string line = id + "\t";
        for (std::size_t k = 0; k < v.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", v[k]);
            if (k) line.push_back(' ');
            line += buf;
        }
        w.write_line(line);
    }
}

std::string context_key(std::string_view split, Index context) {
    return std::string(split) + "/" + std::to_string(context);
}

}  // namespace owlink
