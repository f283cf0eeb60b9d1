#ifndef OWLINK_COMPLEX_HPP
#define OWLINK_COMPLEX_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "owlink/config.hpp"
#include "owlink/core.hpp"
#include "owlink/kernels.hpp"
#include "owlink/ranking.hpp"

namespace owlink {

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// ComplEx parameters. A row of width 2d holds the real parts of a vector
/// in C^d followed by its imaginary parts.
struct ComplexEmbeddings {
    std::size_t dim = 0;  // d
    std::size_t n_entities = 0;
    std::size_t n_relations = 0;
    std::vector<double> entity;    // n_entities x 2d
    std::vector<double> relation;  // n_relations x 2d

    ComplexEmbeddings() = default;
    ComplexEmbeddings(std::size_t entities, std::size_t relations, std::size_t d);

    std::size_t width() const { return 2 * dim; }
    std::span<double> entity_row(Index i) { return {entity.data() + i * width(), width()}; }
    std::span<const double> entity_row(Index i) const { return {entity.data() + i * width(), width()}; }
    std::span<double> relation_row(Index i) { return {relation.data() + i * width(), width()}; }
    std::span<const double> relation_row(Index i) const { return {relation.data() + i * width(), width()}; }
    kernels::MatrixView entity_matrix() const { return {entity.data(), n_entities, width()}; }

    bool all_finite() const;
    void fill_zero();

    friend bool operator==(const ComplexEmbeddings&, const ComplexEmbeddings&) = default;
};

/// Gaussian(0, 0.1) initialisation from a seeded generator.
ComplexEmbeddings init_embeddings(std::size_t entities, std::size_t relations, std::size_t d, std::uint64_t seed);

/// sum_i Re(a_i * r_i * conj(b_i)); throws std::invalid_argument on
/// mismatched widths.
double complex_score(std::span<const double> a, std::span<const double> r, std::span<const double> b);

/// out = a (.) r and out = a (.) conj(r), elementwise in C^d.
void complex_mul(std::span<const double> a, std::span<const double> r, std::span<double> out);
void complex_mul_conj(std::span<const double> a, std::span<const double> r, std::span<double> out);

/// Query vector q with score(candidate) = <q, candidate row>.
/// Tail direction: q = known (.) r. Head direction: q = known (.) conj(r).
void query_vector(std::span<const double> known, std::span<const double> r, Direction dir, std::span<double> q);

/// Gradients of q = query_vector(known, r, dir) given dL/dq, accumulated
/// into d_known and d_r.
void query_vector_backward(std::span<const double> known, std::span<const double> r, Direction dir,
                           std::span<const double> dq, std::span<double> d_known, std::span<double> d_r);

struct KgcTrainConfig {
    std::size_t dim = 32;
    double learning_rate = 0.5;
    double regularizer_weight = 0.0;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 100;
    std::size_t patience = 0;  // 0 disables early stopping
    double min_delta = 0.001;
    std::uint64_t seed = 0;
    std::string optimizer = "adagrad";

    void validate() const;
    static KgcTrainConfig from(const KeyValueConfig& kv);
    KeyValueConfig to_config() const;
    std::uint64_t hash() const;
};

/// Mean over `batch` of the two-direction full-softmax cross-entropy plus
/// regularizer_weight * mean squared entry of the triple's rows. Adds the
/// gradient of that mean into `grad` when non-null.
double kgc_batch_loss(const ComplexEmbeddings& emb, std::span<const Triple> batch, std::span<const Index> candidates,
                      double regularizer_weight, ComplexEmbeddings* grad);

/// Elementwise Adagrad state for a flat parameter vector.
class Adagrad {
public:
    explicit Adagrad(std::size_t n, double lr, double eps = 1e-10) : accum_(n, 0.0), lr_(lr), eps_(eps) {}
    void step(std::span<double> params, std::span<const double> grad);

private:
    std::vector<double> accum_;
    double lr_;
    double eps_;
};

struct KgcTrainOptions {
    /// Candidate vertices for the softmax; empty means every vertex.
    std::vector<Index> candidates;
    /// Held-out triples for early stopping on filtered hits@10.
    std::vector<Triple> validation;
    std::function<void(std::size_t epoch, double mean_loss)> on_epoch;
};

struct KgcTrainResult {
    ComplexEmbeddings embeddings;
    std::vector<double> epoch_loss;
    std::size_t epochs_run = 0;
    bool early_stopped = false;
};

KgcTrainResult train_closed_world(const KnowledgeGraph& g, const KgcTrainConfig& config,
                                  const KgcTrainOptions& options = {});

/// Every candidate scored against (known, r) and ranked; ties by id.
RankedList predict(const ComplexEmbeddings& emb, std::span<const Index> candidates, Index known, Index relation,
                   Direction dir);

/// Filtered hits@k over both directions of `eval` triples, filtering with
/// every triple in `known`.
double filtered_hits_at(const ComplexEmbeddings& emb, std::span<const Triple> known, std::span<const Triple> eval,
                        std::span<const Index> candidates, std::size_t k);

struct CheckpointHeader {
    std::uint32_t version = 1;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
};

void save_embeddings(std::ostream& out, const ComplexEmbeddings& emb, const CheckpointHeader& h);
ComplexEmbeddings load_embeddings(std::istream& in, CheckpointHeader* h = nullptr);
void save_embeddings(const std::filesystem::path& path, const ComplexEmbeddings& emb, const CheckpointHeader& h);
ComplexEmbeddings load_embeddings(const std::filesystem::path& path, CheckpointHeader* h = nullptr);

}  // namespace owlink

#endif
