#ifndef OWLINK_KERNELS_HPP
#define OWLINK_KERNELS_HPP

// Data-parallel inner loops. Every kernel has a serial reference version
// and an OpenMP version; the OpenMP version computes each output element
// with the same operation order as the serial one, so results are
// bitwise identical for any thread count.

#include <cstddef>
#include <span>

#include "owlink/core.hpp"

namespace owlink::kernels {

/// Row-major dense matrix view.
struct MatrixView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::span<const double> row(std::size_t i) const { return {data + i * cols, cols}; }
};

/// out[j] = <q, matrix.row(rows[j])>
void score_rows_serial(std::span<const double> q, MatrixView m, std::span<const Index> rows, std::span<double> out);
void score_rows_omp(std::span<const double> q, MatrixView m, std::span<const Index> rows, std::span<double> out);
/// out[j] = <q, matrix.row(j)> over every row
void score_all_serial(std::span<const double> q, MatrixView m, std::span<double> out);
void score_all_omp(std::span<const double> q, MatrixView m, std::span<double> out);

/// Picks the OpenMP version once the work is large enough to pay for it.
void score_rows(std::span<const double> q, MatrixView m, std::span<const Index> rows, std::span<double> out);
void score_all(std::span<const double> q, MatrixView m, std::span<double> out);

/// Numerically stable in-place softmax; returns log-sum-exp of the input.
double softmax_inplace(std::span<double> x);

/// One query term for term-at-a-time BM25: sorted doc ids with their
/// term frequencies and the term's idf.
struct TermPostings {
    std::span<const Index> docs;
    std::span<const std::uint32_t> tfs;
    double idf = 0.0;
};

/// out[doc] = sum over terms of idf * tf * (k1 + 1) / (tf + norm[doc]),
/// where norm[doc] = k1 * (1 - b + b * len / avglen). `out` is overwritten.
void bm25_serial(std::span<const TermPostings> terms, std::span<const double> norm, double k1, std::span<double> out);
void bm25_omp(std::span<const TermPostings> terms, std::span<const double> norm, double k1, std::span<double> out);
void bm25(std::span<const TermPostings> terms, std::span<const double> norm, double k1, std::span<double> out);

}  // namespace owlink::kernels

#endif
