// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "owlink/bm25.hpp"
#include "owlink/kernels.hpp"

using namespace owlink;

namespace {

struct Scoring {
    std::vector<double> matrix, q, out;
    std::size_t rows, cols;

    Scoring(std::size_t n, std::size_t width) : matrix(n * width), q(width), out(n), rows(n), cols(width) {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> normal;
        for (auto& x : matrix) x = normal(rng);
        for (auto& x : q) x = normal(rng);
    }
    kernels::MatrixView view() const { return {matrix.data(), rows, cols}; }
};

void BM_score_all_serial(benchmark::State& st) {
    Scoring s(static_cast<std::size_t>(st.range(0)), 200);
    for (auto _ : st) {
        kernels::score_all_serial(s.q, s.view(), s.out);
        benchmark::DoNotOptimize(s.out.data());
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_score_all_omp(benchmark::State& st) {
    Scoring s(static_cast<std::size_t>(st.range(0)), 200);
    for (auto _ : st) {
        kernels::score_all_omp(s.q, s.view(), s.out);
        benchmark::DoNotOptimize(s.out.data());
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

struct Corpus {
    InvertedIndex index;
    std::vector<kernels::TermPostings> terms;
    std::vector<double> norm, out;

    explicit Corpus(std::size_t n_docs) {
        std::mt19937_64 rng(11);
        // Zipf-like vocabulary so a few terms have long postings
        std::vector<double> weights(2000);
        for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = 1.0 / static_cast<double>(i + 1);
        std::discrete_distribution<std::size_t> word(weights.begin(), weights.end());
        std::vector<std::vector<std::string>> docs(n_docs);
        for (auto& d : docs)
            for (int k = 0; k < 30; ++k) d.push_back("w" + std::to_string(word(rng)));
        index = InvertedIndex::build(docs);
        for (const auto& [term, p] : index.postings()) {
            if (terms.size() == 60) break;
            terms.push_back({p.docs, p.tfs, index.idf(term)});
        }
        const auto& prm = index.params();
        for (auto l : index.doc_lengths())
            norm.push_back(prm.k1 * (1 - prm.b + prm.b * l / index.avg_doc_length()));
        out.resize(n_docs);
    }
};

void BM_bm25_serial(benchmark::State& st) {
    Corpus c(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) {
        kernels::bm25_serial(c.terms, c.norm, 1.2, c.out);
        benchmark::DoNotOptimize(c.out.data());
    }
}

void BM_bm25_omp(benchmark::State& st) {
    Corpus c(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) {
        kernels::bm25_omp(c.terms, c.norm, 1.2, c.out);
        benchmark::DoNotOptimize(c.out.data());
    }
}

}  // namespace

BENCHMARK(BM_score_all_serial)->Arg(1000)->Arg(20000)->Arg(200000);
BENCHMARK(BM_score_all_omp)->Arg(1000)->Arg(20000)->Arg(200000);
BENCHMARK(BM_bm25_serial)->Arg(10000)->Arg(100000);
BENCHMARK(BM_bm25_omp)->Arg(10000)->Arg(100000);

BENCHMARK_MAIN();
