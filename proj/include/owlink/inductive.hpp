#ifndef OWLINK_INDUCTIVE_HPP
#define OWLINK_INDUCTIVE_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "owlink/complex.hpp"
#include "owlink/config.hpp"
#include "owlink/core.hpp"
#include "owlink/text.hpp"

namespace owlink {

enum class ContextMode { Single, Multi };

/// Contexts of one store turned into model inputs: token ids, or fixed
/// vectors when the encoder is replaced by external encodings.
struct ContextFeatures {
    std::string split;
    std::vector<std::vector<Index>> tokens;
    std::vector<std::vector<double>> fixed;  // empty unless external

    std::size_t size() const { return fixed.empty() ? tokens.size() : fixed.size(); }
    bool external() const { return !fixed.empty(); }
};

struct OpenWorldModel {
    Vocabulary vocab;
    TokenEncoder encoder;
    Projection projection;
    ComplexEmbeddings graph;
    ContextMode mode = ContextMode::Single;
    bool masked = false;
    bool external = false;

    /// Encoder output for one context (d').
    std::vector<double> text_vector(const ContextFeatures& f, Index ctx) const;
    /// Mean encoder output over `contexts`.
    std::vector<double> pooled(const ContextFeatures& f, std::span<const Index> contexts) const;
    /// Projected representation in C^d (width 2d).
    std::vector<double> represent(const ContextFeatures& f, std::span<const Index> contexts) const;

    friend bool operator==(const OpenWorldModel&, const OpenWorldModel&) = default;
};

/// Tokenizes (or looks up external vectors for) every context of a store.
/// With `mask` each context's own mention surface is masked.
ContextFeatures prepare_contexts(const Vocabulary& vocab, const ContextStore& contexts, const MentionMap& mentions,
                                 std::string_view split, bool mask, const ExternalEncodings* external = nullptr);

/// s(Sigma, r, v). Tail direction: psi(c, r, v); head direction: psi(v, r, c),
/// where c is the projected mean encoding of the contexts.
double open_score(const OpenWorldModel& model, const ContextFeatures& f, std::span<const Index> contexts,
                  Index relation, Index vertex, Direction dir);

/// Scores of every candidate vertex for the text representation `c`.
std::vector<double> open_scores(const OpenWorldModel& model, std::span<const double> c, Index relation,
                                Direction dir, std::span<const Index> candidates);

/// Projected single-context representation of every context, row-major
/// (size() x 2d). Rows are computed in parallel.
std::vector<double> represent_each(const OpenWorldModel& model, const ContextFeatures& f);

struct InductiveTrainConfig {
    std::size_t dim = 32;          // graph dimension d (JOINT only; OWE inherits)
    std::size_t encoder_dim = 256;  // d'
    bool trainable_encoder = true;
    std::int64_t unfrozen_layers = -1;  // kept from presets; > 0 or -1 means trainable
    double regularizer_weight = 0.0;
    std::size_t contexts_per_sample = 1;
    std::size_t max_contexts = 10;
    bool masked = false;
    std::size_t batch_size = 8;
    std::size_t subbatch_size = 0;  // accepted, ignored
    double learning_rate = 1e-2;
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
    std::size_t max_epochs = 20;
    std::size_t patience = 0;
    double min_delta = 0.001;
    std::size_t vocab_min_count = 1;

    ContextMode mode() const { return contexts_per_sample == 1 ? ContextMode::Single : ContextMode::Multi; }
    void validate() const;
    static InductiveTrainConfig from(const KeyValueConfig& kv);
    KeyValueConfig to_config() const;
    std::uint64_t hash() const;
};

struct JointSample {
    std::vector<Index> contexts;
    Index relation = 0;
    Index target = 0;
    Direction direction = Direction::Tail;
};

struct OweSample {
    std::vector<Index> contexts;
    Index vertex = 0;
};

/// Gradient buffers shaped like the model's parameters.
struct OpenWorldGrads {
    TokenEncoder encoder;
    Projection projection;
    ComplexEmbeddings graph;
    std::vector<Index> touched_tokens;

    explicit OpenWorldGrads(const OpenWorldModel& m);
    void clear();
};

/// Mean over the batch of the full-softmax cross-entropy plus
/// regularizer_weight * mean squared entry of the relation and target rows.
double joint_batch_loss(const OpenWorldModel& model, const ContextFeatures& f, std::span<const JointSample> batch,
                        std::span<const Index> candidates, double regularizer_weight, OpenWorldGrads* grad);

/// Mean over the batch of (1/2d) * squared distance between the projected
/// text representation and the vertex embedding.
double owe_batch_loss(const OpenWorldModel& model, const ContextFeatures& f, std::span<const OweSample> batch,
                      OpenWorldGrads* grad);

/// Adam with L2 weight decay folded into the gradient. Row updates are
/// lazy: only rows with gradient advance their own step counter.
class Adam {
public:
    Adam(std::size_t n, double lr, double weight_decay = 0.0, std::size_t row_width = 0);
    void step(std::span<double> params, std::span<const double> grad);
    void step_rows(std::span<double> params, std::span<const double> grad, std::span<const Index> rows);

private:
    void update(double& p, double g, std::size_t i, std::size_t t);

    std::vector<double> m_, v_;
    std::vector<std::size_t> row_steps_;
    std::size_t steps_ = 0;
    std::size_t width_ = 0;
    double lr_, wd_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
};

struct InductiveTrainOptions {
    const ExternalEncodings* external = nullptr;
    /// Early stopping metric (higher is better), called after each epoch.
    std::function<double(const OpenWorldModel&)> validate;
    std::function<void(std::size_t epoch, double mean_loss)> on_epoch;
};

struct InductiveTrainResult {
    OpenWorldModel model;
    std::vector<double> epoch_loss;
    std::size_t epochs_run = 0;
    std::size_t skipped_vertices = 0;  // no contexts or no usable triple
    std::size_t samples_per_epoch = 0;
    bool early_stopped = false;
};

/// End-to-end training of encoder, projection and graph embeddings.
InductiveTrainResult train_joint(const DatasetBundle& bundle, const InductiveTrainConfig& config,
                                 const InductiveTrainOptions& options = {});

/// Aligns projected text representations with frozen pretrained vertex
/// embeddings.
InductiveTrainResult train_owe(const DatasetBundle& bundle, const ComplexEmbeddings& pretrained,
                               const InductiveTrainConfig& config, const InductiveTrainOptions& options = {});

/// Untrained model for `bundle` (vocabulary from closed contexts).
OpenWorldModel init_model(const DatasetBundle& bundle, const InductiveTrainConfig& config,
                          const ExternalEncodings* external = nullptr);

void save_model(const std::filesystem::path& path, const OpenWorldModel& model, std::uint64_t config_hash,
                std::uint64_t seed);
OpenWorldModel load_model(const std::filesystem::path& path);

}  // namespace owlink

#endif
