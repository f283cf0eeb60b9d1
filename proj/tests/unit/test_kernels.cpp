#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <random>

#include "owlink/kernels.hpp"

using namespace owlink;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

TEST_CASE("scoring kernels are bitwise identical across serial and OpenMP") {
    const std::size_t rows = 3001, cols = 24;
    const auto m = random_vec(rows * cols, 1);
    const auto q = random_vec(cols, 2);
    kernels::MatrixView view{m.data(), rows, cols};
    std::vector<double> a(rows), b(rows);
    kernels::score_all_serial(q, view, a);
    for (int threads : {1, 2, 4, 7}) {
        omp_set_num_threads(threads);
        kernels::score_all_omp(q, view, b);
        CHECK(a == b);
    }
    // reference from a plain loop
    for (std::size_t i = 0; i < rows; i += 500) {
        double s = 0;
        for (std::size_t j = 0; j < cols; ++j) s += q[j] * m[i * cols + j];
        CHECK(a[i] == s);
    }

    std::vector<Index> pick = {5, 0, 3000, 17, 17};
    std::vector<double> c(pick.size()), d(pick.size());
    kernels::score_rows_serial(q, view, pick, c);
    kernels::score_rows_omp(q, view, pick, d);
    CHECK(c == d);
    CHECK(c[0] == a[5]);
    CHECK(c[2] == a[3000]);
}

TEST_CASE("bm25 kernels agree across serial and OpenMP") {
    std::mt19937_64 rng(9);
    const std::size_t docs = 5000;
    std::vector<double> norm(docs);
    for (auto& x : norm) x = 0.3 + (rng() % 1000) / 500.0;
    std::vector<std::vector<Index>> ids(6);
    std::vector<std::vector<std::uint32_t>> tfs(6);
    std::vector<kernels::TermPostings> terms;
    for (std::size_t t = 0; t < ids.size(); ++t) {
        for (Index d = 0; d < docs; ++d)
            if (rng() % (t + 2) == 0) {
                ids[t].push_back(d);
                tfs[t].push_back(1 + rng() % 4);
            }
        terms.push_back({ids[t], tfs[t], 0.5 + static_cast<double>(t)});
    }
    std::vector<double> a(docs, 42.0), b(docs, -1.0);
    kernels::bm25_serial(terms, norm, 1.2, a);
    for (int threads : {1, 3, 8}) {
        omp_set_num_threads(threads);
        kernels::bm25_omp(terms, norm, 1.2, b);
        CHECK(a == b);
    }
    // doc with no term scores zero (output is overwritten)
    double expect0 = 0;
    for (std::size_t t = 0; t < terms.size(); ++t)
        if (!ids[t].empty() && ids[t][0] == 0) expect0 += terms[t].idf * tfs[t][0] * 2.2 / (tfs[t][0] + norm[0]);
    CHECK(a[0] == doctest::Approx(expect0));
}

TEST_CASE("softmax returns log-sum-exp and survives large inputs") {
    std::vector<double> x = {1000.0, 1000.0, 999.0};
    const double lse = kernels::softmax_inplace(x);
    CHECK(lse == doctest::Approx(1000.0 + std::log(2.0 + std::exp(-1.0))));
    CHECK(x[0] == doctest::Approx(x[1]));
    CHECK(x[0] + x[1] + x[2] == doctest::Approx(1.0));
}
