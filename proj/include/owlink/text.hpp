#ifndef OWLINK_TEXT_HPP
#define OWLINK_TEXT_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "owlink/core.hpp"

namespace owlink {

/// Lower-cased words split on anything that is not an ASCII letter or
/// digit; bytes >= 0x80 count as word characters so UTF-8 stays intact.
std::vector<std::string> split_words(std::string_view sentence);

class Vocabulary {
public:
    static constexpr Index kUnknown = 0;
    static constexpr Index kMask = 1;
    static constexpr std::string_view kUnknownToken = "[UNK]";
    static constexpr std::string_view kMaskToken = "[MASK]";

    Vocabulary();

    /// Adds words seen at least `min_count` times, in first-seen order.
    static Vocabulary build(const std::vector<std::string>& sentences, std::size_t min_count = 1);
    static Vocabulary load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    Index add(const std::string& token);
    Index lookup(std::string_view token) const;
    std::size_t size() const { return tokens_.size(); }
    const std::string& token(Index i) const { return tokens_[i]; }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, Index> index_;
};

/// Words of `sentence` mapped through the vocabulary. With `mask_surface`
/// every token that also occurs in the surface becomes the mask token.
std::vector<Index> tokenize(std::string_view sentence, const Vocabulary& vocab,
                            std::optional<std::string_view> mask_surface = std::nullopt);

/// Mean-pooled token embedding table (the context encoder).
struct TokenEncoder {
    std::size_t dim = 0;  // d'
    std::size_t rows = 0;
    std::vector<double> table;  // rows x dim
    bool trainable = true;

    TokenEncoder() = default;
    TokenEncoder(std::size_t vocab_size, std::size_t d) : dim(d), rows(vocab_size), table(vocab_size * d, 0.0) {}

    std::span<double> row(Index i) { return {table.data() + i * dim, dim}; }
    std::span<const double> row(Index i) const { return {table.data() + i * dim, dim}; }

    friend bool operator==(const TokenEncoder&, const TokenEncoder&) = default;
};

TokenEncoder init_encoder(std::size_t vocab_size, std::size_t d, std::uint64_t seed);

/// Mean of the token rows; zero vector for an empty sequence.
std::vector<double> encode(const TokenEncoder& enc, std::span<const Index> tokens);

/// Affine map R^{d'} -> C^d stored as W (d' x 2d, row-major) and b (2d).
struct Projection {
    std::size_t in_dim = 0;   // d'
    std::size_t out_dim = 0;  // 2d
    std::vector<double> weight;
    std::vector<double> bias;

    Projection() = default;
    Projection(std::size_t d_in, std::size_t complex_dim)
        : in_dim(d_in), out_dim(2 * complex_dim), weight(d_in * 2 * complex_dim, 0.0), bias(2 * complex_dim, 0.0) {}

    std::size_t complex_dim() const { return out_dim / 2; }

    friend bool operator==(const Projection&, const Projection&) = default;
};

Projection init_projection(std::size_t d_in, std::size_t complex_dim, std::uint64_t seed);

/// y[j] = sum_i W[i][j] x[i] + b[j]; the first d outputs are real parts.
std::vector<double> project(const Projection& p, std::span<const double> x);

/// Projects the mean of the per-context encodings. Throws on an empty set.
std::vector<double> encode_multi(const TokenEncoder& enc, const Projection& p,
                                 const std::vector<std::vector<Index>>& contexts);

/// Fixed context vectors produced outside this library.
struct ExternalEncodings {
    std::size_t dim = 0;
    std::map<std::string, std::vector<double>> vectors;

    friend bool operator==(const ExternalEncodings&, const ExternalEncodings&) = default;
};

ExternalEncodings import_external_encodings(const std::filesystem::path& path);
void export_external_encodings(const ExternalEncodings& enc, const std::filesystem::path& path);

/// Stable key of a context for external encodings: "<split>/<index>".
std::string context_key(std::string_view split, Index context);

}  // namespace owlink

#endif
