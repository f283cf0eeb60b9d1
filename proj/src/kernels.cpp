#include "owlink/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace owlink::kernels {

namespace {

constexpr std::size_t kParallelWork = 1 << 15;

inline double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
    return s;
}

}  // namespace

void score_rows_serial(std::span<const double> q, MatrixView m, std::span<const Index> rows, std::span<double> out) {
    assert(q.size() == m.cols && out.size() == rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j) out[j] = dot(q.data(), m.data + rows[j] * m.cols, m.cols);
}

void score_rows_omp(std::span<const double> q, MatrixView m, std::span<const Index> rows, std::span<double> out) {
    assert(q.size() == m.cols && out.size() == rows.size());
    const auto n = static_cast<std::ptrdiff_t>(rows.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = dot(q.data(), m.data + rows[j] * m.cols, m.cols);
}

void score_all_serial(std::span<const double> q, MatrixView m, std::span<double> out) {
    assert(q.size() == m.cols && out.size() == m.rows);
    for (std::size_t j = 0; j < m.rows; ++j) out[j] = dot(q.data(), m.data + j * m.cols, m.cols);
}

void score_all_omp(std::span<const double> q, MatrixView m, std::span<double> out) {
    assert(q.size() == m.cols && out.size() == m.rows);
    const auto n = static_cast<std::ptrdiff_t>(m.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < n; ++j) out[j] = dot(q.data(), m.data + j * m.cols, m.cols);
}

void score_rows(std::span<const double> q, MatrixView m, std::span<const Index> rows, std::span<double> out) {
    if (rows.size() * m.cols >= kParallelWork && omp_get_max_threads() > 1)
        score_rows_omp(q, m, rows, out);
    else
        score_rows_serial(q, m, rows, out);
}

void score_all(std::span<const double> q, MatrixView m, std::span<double> out) {
    if (m.rows * m.cols >= kParallelWork && omp_get_max_threads() > 1)
        score_all_omp(q, m, out);
    else
        score_all_serial(q, m, out);
}

double softmax_inplace(std::span<double> x) {
    if (x.empty()) return -std::numeric_limits<double>::infinity();
    double mx = *std::max_element(x.begin(), x.end());
    double sum = 0.0;
    for (auto& v : x) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (auto& v : x) v /= sum;
    return mx + std::log(sum);
}

void bm25_serial(std::span<const TermPostings> terms, std::span<const double> norm, double k1, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& t : terms)
        for (std::size_t i = 0; i < t.docs.size(); ++i) {
            const double tf = t.tfs[i];
            out[t.docs[i]] += t.idf * tf * (k1 + 1.0) / (tf + norm[t.docs[i]]);
        }
}

void bm25_omp(std::span<const TermPostings> terms, std::span<const double> norm, double k1, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t n = out.size();
#pragma omp parallel
    {
        // each thread owns a contiguous doc range and walks the terms in
        // the serial order, so per-doc sums match bm25_serial bitwise
        const std::size_t nt = static_cast<std::size_t>(omp_get_num_threads());
        const std::size_t tid = static_cast<std::size_t>(omp_get_thread_num());
        const Index lo = static_cast<Index>(n * tid / nt);
        const Index hi = static_cast<Index>(n * (tid + 1) / nt);
        for (const auto& t : terms) {
            auto first = std::lower_bound(t.docs.begin(), t.docs.end(), lo);
            auto last = std::lower_bound(first, t.docs.end(), hi);
            for (auto it = first; it != last; ++it) {
                const auto i = static_cast<std::size_t>(it - t.docs.begin());
                const double tf = t.tfs[i];
                out[*it] += t.idf * tf * (k1 + 1.0) / (tf + norm[*it]);
            }
        }
    }
}

void bm25(std::span<const TermPostings> terms, std::span<const double> norm, double k1, std::span<double> out) {
    std::size_t work = 0;
    for (const auto& t : terms) work += t.docs.size();
    if (work >= kParallelWork && omp_get_max_threads() > 1)
        bm25_omp(terms, norm, k1, out);
    else
        bm25_serial(terms, norm, k1, out);
}

}  // namespace owlink::kernels
