#include "owlink/inductive.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "owlink/binary_io.hpp"
#include "owlink/kernels.hpp"

namespace owlink {

namespace {

constexpr char kModelMagic[9] = "OWLOWM01";

void check_contexts(const ContextFeatures& f, std::span<const Index> contexts) {
    if (contexts.empty()) throw std::invalid_argument("empty context set");
    for (auto c : contexts)
        if (c >= f.size()) throw std::out_of_range("context index out of range");
}

}  // namespace

std::vector<double> OpenWorldModel::text_vector(const ContextFeatures& f, Index ctx) const {
    if (f.external()) return f.fixed.at(ctx);
    return encode(encoder, f.tokens.at(ctx));
}

std::vector<double> OpenWorldModel::pooled(const ContextFeatures& f, std::span<const Index> contexts) const {
    check_contexts(f, contexts);
    std::vector<double> mean(projection.in_dim, 0.0);
    for (auto c : contexts) {
        auto x = text_vector(f, c);
        if (x.size() != mean.size()) throw std::invalid_argument("context encoding has the wrong dimension");
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += x[k];
    }
    const double inv = 1.0 / static_cast<double>(contexts.size());
    for (auto& x : mean) x *= inv;
    return mean;
}

std::vector<double> OpenWorldModel::represent(const ContextFeatures& f, std::span<const Index> contexts) const {
    return project(projection, pooled(f, contexts));
}

ContextFeatures prepare_contexts(const Vocabulary& vocab, const ContextStore& contexts, const MentionMap& mentions,
                                 std::string_view split, bool mask, const ExternalEncodings* external) {
    ContextFeatures f;
    f.split = std::string(split);
    if (external) {
        f.fixed.reserve(contexts.size());
        for (Index i = 0; i < contexts.size(); ++i) {
            auto it = external->vectors.find(context_key(split, i));
            if (it == external->vectors.end())
                throw DataError("no external encoding for context " + context_key(split, i));
            f.fixed.push_back(it->second);
        }
        return f;
    }
    f.tokens.resize(contexts.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        const auto& c = contexts[static_cast<Index>(i)];
        std::optional<std::string_view> surface;
        if (mask) surface = mentions[c.mention].surface;
        f.tokens[i] = tokenize(c.sentence, vocab, surface);
    }
    return f;
}

double open_score(const OpenWorldModel& model, const ContextFeatures& f, std::span<const Index> contexts,
                  Index relation, Index vertex, Direction dir) {
    auto c = model.represent(f, contexts);
    const auto& g = model.graph;
    if (vertex >= g.n_entities || relation >= g.n_relations) throw std::out_of_range("open_score: index out of range");
    if (dir == Direction::Tail) return complex_score(c, g.relation_row(relation), g.entity_row(vertex));
    return complex_score(g.entity_row(vertex), g.relation_row(relation), c);
}

std::vector<double> open_scores(const OpenWorldModel& model, std::span<const double> c, Index relation,
                                Direction dir, std::span<const Index> candidates) {
    const auto& g = model.graph;
    std::vector<double> q(g.width()), out(candidates.size());
    query_vector(c, g.relation_row(relation), dir, q);
    kernels::score_rows(q, g.entity_matrix(), candidates, out);
    return out;
}

std::vector<double> represent_each(const OpenWorldModel& model, const ContextFeatures& f) {
    const std::size_t w = model.projection.out_dim;
    std::vector<double> out(f.size() * w);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto y = project(model.projection, model.text_vector(f, static_cast<Index>(i)));
        std::copy(y.begin(), y.end(), out.begin() + static_cast<std::ptrdiff_t>(i * w));
    }
    return out;
}

// ---- configuration ----

void InductiveTrainConfig::validate() const {
    std::vector<std::string> errs;
    if (dim == 0) errs.push_back("dim must be positive");
    if (encoder_dim == 0) errs.push_back("encoder_dim must be positive");
    if (contexts_per_sample == 0) errs.push_back("contexts_per_sample must be positive");
    if (max_contexts == 0) errs.push_back("max_contexts must be positive");
    if (contexts_per_sample > max_contexts) errs.push_back("contexts_per_sample must not exceed max_contexts");
    if (batch_size == 0) errs.push_back("batch_size must be positive");
    if (!(learning_rate > 0)) errs.push_back("learning_rate must be positive");
    if (weight_decay < 0) errs.push_back("weight_decay must be >= 0");
    if (regularizer_weight < 0) errs.push_back("regularizer_weight must be >= 0");
    if (vocab_min_count == 0) errs.push_back("vocab_min_count must be positive");
    if (errs.empty()) return;
    std::string msg = "invalid inductive config:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
}

InductiveTrainConfig InductiveTrainConfig::from(const KeyValueConfig& kv) {
    static const std::set<std::string> known = {
        "dim",          "encoder_dim",   "unfrozen_layers", "trainable_encoder", "regularizer_weight",
        "contexts_per_sample", "max_contexts", "masked",     "batch_size",        "subbatch_size",
        "learning_rate", "weight_decay",  "seed",            "max_epochs",        "patience",
        "min_delta",    "vocab_min_count", "mode"};
    if (auto unknown = kv.unknown_keys(known); !unknown.empty()) {
        std::string msg = "unknown inductive config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
    InductiveTrainConfig c;
    c.dim = kv.get_uint("dim", c.dim);
    c.encoder_dim = kv.get_uint("encoder_dim", c.encoder_dim);
    c.unfrozen_layers = kv.get_int("unfrozen_layers", c.unfrozen_layers);
    c.trainable_encoder = kv.get_bool("trainable_encoder", c.unfrozen_layers != 0);
    c.regularizer_weight = kv.get_double("regularizer_weight", c.regularizer_weight);
    c.contexts_per_sample = kv.get_uint("contexts_per_sample", c.contexts_per_sample);
    c.max_contexts = kv.get_uint("max_contexts", c.max_contexts);
    c.masked = kv.get_bool("masked", c.masked);
    c.batch_size = kv.get_uint("batch_size", c.batch_size);
    c.subbatch_size = kv.get_uint("subbatch_size", c.subbatch_size);
    c.learning_rate = kv.get_double("learning_rate", c.learning_rate);
    c.weight_decay = kv.get_double("weight_decay", c.weight_decay);
    c.seed = kv.get_uint("seed", c.seed);
    c.max_epochs = kv.get_uint("max_epochs", c.max_epochs);
    c.patience = kv.get_uint("patience", c.patience);
    c.min_delta = kv.get_double("min_delta", c.min_delta);
    c.vocab_min_count = kv.get_uint("vocab_min_count", c.vocab_min_count);
    if (auto m = kv.raw("mode")) {
        const bool multi = c.contexts_per_sample > 1;
        if ((*m == "single" && multi) || (*m == "multi" && !multi) || (*m != "single" && *m != "multi"))
            throw ConfigError("mode '" + *m + "' does not match contexts_per_sample = " +
                              std::to_string(c.contexts_per_sample));
    }
    c.validate();
    return c;
}

KeyValueConfig InductiveTrainConfig::to_config() const {
    KeyValueConfig kv;
    char buf[64];
    auto num = [&](const char* k, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        kv.set(k, buf);
    };
    kv.set("dim", std::to_string(dim));
    kv.set("encoder_dim", std::to_string(encoder_dim));
    kv.set("unfrozen_layers", std::to_string(unfrozen_layers));
    kv.set("trainable_encoder", trainable_encoder ? "true" : "false");
    num("regularizer_weight", regularizer_weight);
    kv.set("contexts_per_sample", std::to_string(contexts_per_sample));
    kv.set("max_contexts", std::to_string(max_contexts));
    kv.set("masked", masked ? "true" : "false");
    kv.set("batch_size", std::to_string(batch_size));
    kv.set("subbatch_size", std::to_string(subbatch_size));
    num("learning_rate", learning_rate);
    num("weight_decay", weight_decay);
    kv.set("seed", std::to_string(seed));
    kv.set("max_epochs", std::to_string(max_epochs));
    kv.set("patience", std::to_string(patience));
    num("min_delta", min_delta);
    kv.set("vocab_min_count", std::to_string(vocab_min_count));
    kv.set("mode", mode() == ContextMode::Single ? "single" : "multi");
    return kv;
}

std::uint64_t InductiveTrainConfig::hash() const { return fnv1a64(to_config().to_string()); }

// ---- losses ----

OpenWorldGrads::OpenWorldGrads(const OpenWorldModel& m)
    : encoder(m.encoder.rows, m.encoder.dim),
      projection(m.projection.in_dim, m.projection.complex_dim()),
      graph(m.graph.n_entities, m.graph.n_relations, m.graph.dim) {}

void OpenWorldGrads::clear() {
    for (auto t : touched_tokens) std::fill_n(encoder.row(t).begin(), encoder.dim, 0.0);
    touched_tokens.clear();
    std::fill(projection.weight.begin(), projection.weight.end(), 0.0);
    std::fill(projection.bias.begin(), projection.bias.end(), 0.0);
    graph.fill_zero();
}

namespace {

// Backpropagates dL/dc (scaled) through the projection and the pooled
// encoder. `x` is the pooled encoder output.
void backward_text(const OpenWorldModel& model, const ContextFeatures& f, std::span<const Index> contexts,
                   std::span<const double> x, std::span<const double> dc, OpenWorldGrads& g,
                   std::vector<char>& touched) {
    const auto& P = model.projection;
    std::vector<double> dx(P.in_dim, 0.0);
    for (std::size_t i = 0; i < P.in_dim; ++i) {
        const double* w = P.weight.data() + i * P.out_dim;
        double* gw = g.projection.weight.data() + i * P.out_dim;
        double acc = 0.0;
        for (std::size_t j = 0; j < P.out_dim; ++j) {
            gw[j] += x[i] * dc[j];
            acc += w[j] * dc[j];
        }
        dx[i] = acc;
    }
    for (std::size_t j = 0; j < P.out_dim; ++j) g.projection.bias[j] += dc[j];

    if (f.external() || !model.encoder.trainable) return;
    const double per_ctx = 1.0 / static_cast<double>(contexts.size());
    for (auto c : contexts) {
        const auto& toks = f.tokens[c];
        if (toks.empty()) continue;
        const double s = per_ctx / static_cast<double>(toks.size());
        for (auto t : toks) {
            auto row = g.encoder.row(t);
            for (std::size_t k = 0; k < row.size(); ++k) row[k] += s * dx[k];
            if (!touched[t]) {
                touched[t] = 1;
                g.touched_tokens.push_back(t);
            }
        }
    }
}

std::vector<char> touched_mask(const OpenWorldModel& model, const OpenWorldGrads& g) {
    std::vector<char> m(model.encoder.rows, 0);
    for (auto t : g.touched_tokens) m[t] = 1;
    return m;
}

}  // namespace

double joint_batch_loss(const OpenWorldModel& model, const ContextFeatures& f, std::span<const JointSample> batch,
                        std::span<const Index> candidates, double regularizer_weight, OpenWorldGrads* grad) {
    if (batch.empty()) return 0.0;
    const auto& G = model.graph;
    const std::size_t w = G.width();
    if (model.projection.out_dim != w) throw std::invalid_argument("projection width differs from graph width");
    const double scale = 1.0 / static_cast<double>(batch.size());
    const double reg_norm = 1.0 / (2.0 * static_cast<double>(w));
    std::vector<char> touched;
    if (grad) touched = touched_mask(model, *grad);

    std::vector<double> q(w), scores(candidates.size()), dq(w), dc(w);
    double total = 0.0;
    for (const auto& s : batch) {
        auto x = model.pooled(f, s.contexts);
        auto c = project(model.projection, x);
        auto r = G.relation_row(s.relation);
        query_vector(c, r, s.direction, q);
        kernels::score_rows(q, G.entity_matrix(), candidates, scores);
        std::size_t pos = candidates.size();
        for (std::size_t j = 0; j < candidates.size(); ++j)
            if (candidates[j] == s.target) pos = j;
        if (pos == candidates.size()) throw TrainingError("training target is not a candidate");
        const double target_score = scores[pos];
        const double lse = kernels::softmax_inplace(scores);
        double loss = lse - target_score;
        auto e = G.entity_row(s.target);
        if (regularizer_weight > 0) {
            double sq = 0.0;
            for (std::size_t k = 0; k < w; ++k) sq += r[k] * r[k] + e[k] * e[k];
            loss += regularizer_weight * reg_norm * sq;
        }
        total += loss;
        if (!grad) continue;

        std::fill(dq.begin(), dq.end(), 0.0);
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            const double gj = scale * (scores[j] - (j == pos ? 1.0 : 0.0));
            auto row = G.entity_row(candidates[j]);
            auto grow = grad->graph.entity_row(candidates[j]);
            for (std::size_t k = 0; k < w; ++k) {
                dq[k] += gj * row[k];
                grow[k] += gj * q[k];
            }
        }
        std::fill(dc.begin(), dc.end(), 0.0);
        query_vector_backward(c, r, s.direction, dq, dc, grad->graph.relation_row(s.relation));
        if (regularizer_weight > 0) {
            const double coeff = 2.0 * scale * regularizer_weight * reg_norm;
            auto gr = grad->graph.relation_row(s.relation);
            auto ge = grad->graph.entity_row(s.target);
            for (std::size_t k = 0; k < w; ++k) {
                gr[k] += coeff * r[k];
                ge[k] += coeff * e[k];
            }
        }
        backward_text(model, f, s.contexts, x, dc, *grad, touched);
    }
    return total * scale;
}

double owe_batch_loss(const OpenWorldModel& model, const ContextFeatures& f, std::span<const OweSample> batch,
                      OpenWorldGrads* grad) {
    if (batch.empty()) return 0.0;
    const auto& G = model.graph;
    const std::size_t w = G.width();
    if (model.projection.out_dim != w) throw std::invalid_argument("projection width differs from graph width");
    const double scale = 1.0 / static_cast<double>(batch.size());
    const double inv_d = 1.0 / static_cast<double>(G.dim);
    std::vector<char> touched;
    if (grad) touched = touched_mask(model, *grad);

    std::vector<double> dc(w);
    double total = 0.0;
    for (const auto& s : batch) {
        auto x = model.pooled(f, s.contexts);
        auto c = project(model.projection, x);
        auto v = G.entity_row(s.vertex);
        double sq = 0.0;
        for (std::size_t k = 0; k < w; ++k) {
            const double diff = c[k] - v[k];
            sq += diff * diff;
            dc[k] = scale * diff * inv_d;
        }
        total += 0.5 * inv_d * sq;
        if (grad) backward_text(model, f, s.contexts, x, dc, *grad, touched);
    }
    return total * scale;
}

// ---- optimizer ----

Adam::Adam(std::size_t n, double lr, double weight_decay, std::size_t row_width)
    : m_(n, 0.0), v_(n, 0.0), width_(row_width), lr_(lr), wd_(weight_decay) {
    if (row_width > 0) row_steps_.assign(n / row_width, 0);
}

void Adam::update(double& p, double g, std::size_t i, std::size_t t) {
    g += wd_ * p;
    m_[i] = beta1_ * m_[i] + (1 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1 - beta2_) * g * g;
    const double mh = m_[i] / (1 - std::pow(beta1_, static_cast<double>(t)));
    const double vh = v_[i] / (1 - std::pow(beta2_, static_cast<double>(t)));
    p -= lr_ * mh / (std::sqrt(vh) + eps_);
}

void Adam::step(std::span<double> params, std::span<const double> grad) {
    ++steps_;
    for (std::size_t i = 0; i < params.size(); ++i) update(params[i], grad[i], i, steps_);
}

void Adam::step_rows(std::span<double> params, std::span<const double> grad, std::span<const Index> rows) {
    for (auto r : rows) {
        const std::size_t t = ++row_steps_[r];
        for (std::size_t k = 0; k < width_; ++k) {
            const std::size_t i = r * width_ + k;
            update(params[i], grad[i], i, t);
        }
    }
}

// ---- training ----

OpenWorldModel init_model(const DatasetBundle& bundle, const InductiveTrainConfig& config,
                          const ExternalEncodings* external) {
    config.validate();
    OpenWorldModel m;
    m.mode = config.mode();
    m.masked = config.masked;
    m.external = external != nullptr;
    m.graph = init_embeddings(bundle.graph.vertices.size(), bundle.graph.relations.size(), config.dim, config.seed);
    std::size_t d_in = config.encoder_dim;
    if (external) {
        d_in = external->dim;
    } else {
        std::vector<std::string> sentences;
        sentences.reserve(bundle.closed_contexts.size());
        for (const auto& c : bundle.closed_contexts.all()) sentences.push_back(c.sentence);
        m.vocab = Vocabulary::build(sentences, config.vocab_min_count);
        m.encoder = init_encoder(m.vocab.size(), d_in, config.seed + 1);
        m.encoder.trainable = config.trainable_encoder;
    }
    m.projection = init_projection(d_in, config.dim, config.seed + 2);
    return m;
}

namespace {

// Closed contexts grouped by vertex.
std::vector<std::vector<Index>> contexts_by_vertex(const DatasetBundle& b) {
    std::vector<std::vector<Index>> out(b.graph.vertices.size());
    for (Index i = 0; i < b.closed_contexts.size(); ++i) {
        const auto& c = b.closed_contexts[i];
        out[b.closed_mentions[c.mention].vertex].push_back(i);
    }
    return out;
}

// One epoch's context groups: vertices in random order, each vertex's
// contexts shuffled, truncated to max_contexts and cut into chunks.
template <typename Fn>
void for_each_group(const std::vector<std::vector<Index>>& by_vertex, const InductiveTrainConfig& config,
                    std::mt19937_64& rng, Fn fn) {
    std::vector<Index> order;
    for (Index v = 0; v < by_vertex.size(); ++v)
        if (!by_vertex[v].empty()) order.push_back(v);
    std::shuffle(order.begin(), order.end(), rng);
    for (auto v : order) {
        auto ctx = by_vertex[v];
        std::shuffle(ctx.begin(), ctx.end(), rng);
        if (ctx.size() > config.max_contexts) ctx.resize(config.max_contexts);
        for (std::size_t start = 0; start < ctx.size(); start += config.contexts_per_sample) {
            const auto n = std::min(config.contexts_per_sample, ctx.size() - start);
            fn(v, std::vector<Index>(ctx.begin() + static_cast<std::ptrdiff_t>(start),
                                     ctx.begin() + static_cast<std::ptrdiff_t>(start + n)));
        }
    }
}

struct Optimizers {
    Adam encoder, weight, bias, entity, relation;

    Optimizers(const OpenWorldModel& m, const InductiveTrainConfig& c)
        : encoder(m.encoder.table.size(), c.learning_rate, c.weight_decay, std::max<std::size_t>(m.encoder.dim, 1)),
          weight(m.projection.weight.size(), c.learning_rate, c.weight_decay),
          bias(m.projection.bias.size(), c.learning_rate, c.weight_decay),
          entity(m.graph.entity.size(), c.learning_rate, 0.0),
          relation(m.graph.relation.size(), c.learning_rate, 0.0) {}

    void step(OpenWorldModel& m, OpenWorldGrads& g, bool train_graph) {
        if (m.encoder.trainable && !g.touched_tokens.empty())
            encoder.step_rows(m.encoder.table, g.encoder.table, g.touched_tokens);
        weight.step(m.projection.weight, g.projection.weight);
        bias.step(m.projection.bias, g.projection.bias);
        if (train_graph) {
            entity.step(m.graph.entity, g.graph.entity);
            relation.step(m.graph.relation, g.graph.relation);
        }
    }
};

template <typename Sample, typename LossFn>
void run_epochs(InductiveTrainResult& res, const InductiveTrainConfig& config, const InductiveTrainOptions& options,
                std::vector<Sample> (*make)(void*), void* make_ctx, LossFn loss_fn, bool train_graph) {
    auto& model = res.model;
    OpenWorldGrads grad(model);
    Optimizers opt(model, config);
    double best = -1.0;
    std::size_t since_best = 0;
    OpenWorldModel best_model;
    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        auto samples = make(make_ctx);
        res.samples_per_epoch = samples.size();
        if (samples.empty()) throw TrainingError("no training samples: every vertex lacks contexts or triples");
        double total = 0.0;
        for (std::size_t start = 0; start < samples.size(); start += config.batch_size) {
            const auto n = std::min(config.batch_size, samples.size() - start);
            std::span<const Sample> batch(samples.data() + start, n);
            grad.clear();
            const double loss = loss_fn(model, batch, &grad);
            if (!std::isfinite(loss))
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch starting at " +
                                    std::to_string(start) + "; lower the learning rate");
            total += loss * static_cast<double>(n);
            opt.step(model, grad, train_graph);
        }
        const double mean = total / static_cast<double>(samples.size());
        res.epoch_loss.push_back(mean);
        res.epochs_run = epoch + 1;
        if (options.on_epoch) options.on_epoch(epoch + 1, mean);
        if (config.patience > 0 && options.validate) {
            const double metric = options.validate(model);
            if (best < 0 || metric > best + config.min_delta) {
                best = metric;
                best_model = model;
                since_best = 0;
            } else if (++since_best >= config.patience) {
                model = best_model;
                res.early_stopped = true;
                break;
            }
        }
    }
}

struct JointMaker {
    const std::vector<std::vector<Index>>* by_vertex;
    const std::vector<std::vector<JointSample>>* incident;  // per vertex, contexts left empty
    const InductiveTrainConfig* config;
    std::mt19937_64* rng;

    static std::vector<JointSample> make(void* self) {
        auto& m = *static_cast<JointMaker*>(self);
        std::vector<JointSample> out;
        for_each_group(*m.by_vertex, *m.config, *m.rng, [&](Index v, std::vector<Index> ctx) {
            const auto& inc = (*m.incident)[v];
            if (inc.empty()) return;
            std::uniform_int_distribution<std::size_t> pick(0, inc.size() - 1);
            JointSample s = inc[pick(*m.rng)];
            s.contexts = std::move(ctx);
            out.push_back(std::move(s));
        });
        std::shuffle(out.begin(), out.end(), *m.rng);
        return out;
    }
};

struct OweMaker {
    const std::vector<std::vector<Index>>* by_vertex;
    const InductiveTrainConfig* config;
    std::mt19937_64* rng;

    static std::vector<OweSample> make(void* self) {
        auto& m = *static_cast<OweMaker*>(self);
        std::vector<OweSample> out;
        for_each_group(*m.by_vertex, *m.config, *m.rng,
                       [&](Index v, std::vector<Index> ctx) { out.push_back({std::move(ctx), v}); });
        std::shuffle(out.begin(), out.end(), *m.rng);
        return out;
    }
};

}  // namespace

InductiveTrainResult train_joint(const DatasetBundle& bundle, const InductiveTrainConfig& config,
                                 const InductiveTrainOptions& options) {
    InductiveTrainResult res;
    res.model = init_model(bundle, config, options.external);
    const auto features = prepare_contexts(res.model.vocab, bundle.closed_contexts, bundle.closed_mentions, "closed",
                                           config.masked, options.external);
    const auto by_vertex = contexts_by_vertex(bundle);

    // A vertex as head predicts the tail (tail direction), as tail the head.
    std::vector<std::vector<JointSample>> incident(by_vertex.size());
    for (const auto& t : bundle.graph.triples()) {
        incident[t.head].push_back({{}, t.relation, t.tail, Direction::Tail});
        incident[t.tail].push_back({{}, t.relation, t.head, Direction::Head});
    }
    for (Index v = 0; v < by_vertex.size(); ++v)
        if (by_vertex[v].empty() || incident[v].empty()) ++res.skipped_vertices;

    const auto candidates = bundle.closed_vertices();
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    JointMaker maker{&by_vertex, &incident, &config, &rng};
    run_epochs<JointSample>(
        res, config, options, &JointMaker::make, &maker,
        [&](const OpenWorldModel& m, std::span<const JointSample> b, OpenWorldGrads* g) {
            return joint_batch_loss(m, features, b, candidates, config.regularizer_weight, g);
        },
        true);
    return res;
}

InductiveTrainResult train_owe(const DatasetBundle& bundle, const ComplexEmbeddings& pretrained,
                               const InductiveTrainConfig& config, const InductiveTrainOptions& options) {
    if (pretrained.n_entities != bundle.graph.vertices.size() || pretrained.n_relations != bundle.graph.relations.size())
        throw TrainingError("pretrained embeddings do not match the dataset (" + std::to_string(pretrained.n_entities) +
                            " vertices, " + std::to_string(pretrained.n_relations) + " relations)");
    InductiveTrainConfig c = config;
    c.dim = pretrained.dim;
    InductiveTrainResult res;
    res.model = init_model(bundle, c, options.external);
    res.model.graph = pretrained;
    const auto features = prepare_contexts(res.model.vocab, bundle.closed_contexts, bundle.closed_mentions, "closed",
                                           c.masked, options.external);
    const auto by_vertex = contexts_by_vertex(bundle);
    for (const auto& v : by_vertex)
        if (v.empty()) ++res.skipped_vertices;

    std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
    OweMaker maker{&by_vertex, &c, &rng};
    run_epochs<OweSample>(
        res, c, options, &OweMaker::make, &maker,
        [&](const OpenWorldModel& m, std::span<const OweSample> b, OpenWorldGrads* g) {
            return owe_batch_loss(m, features, b, g);
        },
        false);
    return res;
}

// ---- checkpoints ----

void save_model(const std::filesystem::path& path, const OpenWorldModel& model, std::uint64_t config_hash,
                std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("unwritable path: " + path.string());
    binio::put_magic(out, kModelMagic);
    binio::put_u32(out, 1);
    binio::put_u32(out, model.mode == ContextMode::Multi ? 1 : 0);
    binio::put_u32(out, model.masked ? 1 : 0);
    binio::put_u32(out, model.external ? 1 : 0);
    binio::put_u64(out, config_hash);
    save_embeddings(out, model.graph, {1, seed, config_hash});
    const auto& P = model.projection;
    binio::put_u32(out, static_cast<std::uint32_t>(P.in_dim));
    binio::put_u32(out, static_cast<std::uint32_t>(P.out_dim));
    binio::put_f32s(out, P.weight);
    binio::put_f32s(out, P.bias);
    const auto& E = model.encoder;
    binio::put_u32(out, static_cast<std::uint32_t>(E.rows));
    binio::put_u32(out, static_cast<std::uint32_t>(E.dim));
    binio::put_u32(out, E.trainable ? 1 : 0);
    binio::put_f32s(out, E.table);
    binio::put_u32(out, static_cast<std::uint32_t>(model.vocab.size()));
    for (Index i = 0; i < model.vocab.size(); ++i) binio::put_string(out, model.vocab.token(i));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

OpenWorldModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    binio::expect_magic(in, kModelMagic);
    if (auto v = binio::get_u32(in); v != 1) throw std::runtime_error("unsupported model version " + std::to_string(v));
    OpenWorldModel m;
    m.mode = binio::get_u32(in) ? ContextMode::Multi : ContextMode::Single;
    m.masked = binio::get_u32(in) != 0;
    m.external = binio::get_u32(in) != 0;
    binio::get_u64(in);
    m.graph = load_embeddings(in);
    const auto in_dim = binio::get_u32(in);
    const auto out_dim = binio::get_u32(in);
    if (out_dim != m.graph.width()) throw std::runtime_error("projection width differs from graph width");
    m.projection = Projection(in_dim, out_dim / 2);
    binio::get_f32s(in, m.projection.weight);
    binio::get_f32s(in, m.projection.bias);
    const auto rows = binio::get_u32(in);
    const auto dim = binio::get_u32(in);
    m.encoder = TokenEncoder(rows, dim);
    m.encoder.trainable = binio::get_u32(in) != 0;
    binio::get_f32s(in, m.encoder.table);
    const auto n = binio::get_u32(in);
    std::vector<std::string> tokens;
    for (std::uint32_t i = 0; i < n; ++i) tokens.push_back(binio::get_string(in));
    if (n < 2 || tokens[0] != Vocabulary::kUnknownToken || tokens[1] != Vocabulary::kMaskToken)
        throw std::runtime_error(path.string() + ": corrupt vocabulary");
    for (std::uint32_t i = 2; i < n; ++i) m.vocab.add(tokens[i]);
    if (!m.external && m.vocab.size() != m.encoder.rows)
        throw std::runtime_error(path.string() + ": vocabulary size differs from encoder table");
    return m;
}

}  // namespace owlink
