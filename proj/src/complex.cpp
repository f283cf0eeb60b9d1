#include "owlink/complex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "owlink/binary_io.hpp"

namespace owlink {

namespace {

constexpr char kMagic[9] = "OWLKGC01";

}  // namespace

ComplexEmbeddings::ComplexEmbeddings(std::size_t entities, std::size_t relations, std::size_t d)
    : dim(d), n_entities(entities), n_relations(relations), entity(entities * 2 * d, 0.0),
      relation(relations * 2 * d, 0.0) {}

bool ComplexEmbeddings::all_finite() const {
    auto ok = [](double x) { return std::isfinite(x); };
    return std::all_of(entity.begin(), entity.end(), ok) && std::all_of(relation.begin(), relation.end(), ok);
}

void ComplexEmbeddings::fill_zero() {
    std::fill(entity.begin(), entity.end(), 0.0);
    std::fill(relation.begin(), relation.end(), 0.0);
}

ComplexEmbeddings init_embeddings(std::size_t entities, std::size_t relations, std::size_t d, std::uint64_t seed) {
    ComplexEmbeddings e(entities, relations, d);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 0.1);
    for (auto& x : e.entity) x = normal(rng);
    for (auto& x : e.relation) x = normal(rng);
    return e;
}

double complex_score(std::span<const double> a, std::span<const double> r, std::span<const double> b) {
    if (a.size() != r.size() || a.size() != b.size() || a.size() % 2 != 0)
        throw std::invalid_argument("complex_score: dimension mismatch");
    const std::size_t d = a.size() / 2;
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double ar = a[i], ai = a[d + i], rr = r[i], ri = r[d + i], br = b[i], bi = b[d + i];
        s += (ar * rr - ai * ri) * br + (ar * ri + ai * rr) * bi;
    }
    return s;
}

void complex_mul(std::span<const double> a, std::span<const double> r, std::span<double> out) {
    const std::size_t d = a.size() / 2;
    for (std::size_t i = 0; i < d; ++i) {
        const double ar = a[i], ai = a[d + i], rr = r[i], ri = r[d + i];
        out[i] = ar * rr - ai * ri;
        out[d + i] = ar * ri + ai * rr;
    }
}

void complex_mul_conj(std::span<const double> a, std::span<const double> r, std::span<double> out) {
    const std::size_t d = a.size() / 2;
    for (std::size_t i = 0; i < d; ++i) {
        const double ar = a[i], ai = a[d + i], rr = r[i], ri = r[d + i];
        out[i] = ar * rr + ai * ri;
        out[d + i] = ai * rr - ar * ri;
    }
}

// score(h, r, t) = Re(h r conj t) = <h (.) r, t>     (tail candidates t)
//                = <t (.) conj r, h>                 (head candidates h)
void query_vector(std::span<const double> known, std::span<const double> r, Direction dir, std::span<double> q) {
    if (dir == Direction::Tail)
        complex_mul(known, r, q);
    else
        complex_mul_conj(known, r, q);
}

void query_vector_backward(std::span<const double> known, std::span<const double> r, Direction dir,
                           std::span<const double> dq, std::span<double> d_known, std::span<double> d_r) {
    const std::size_t d = known.size() / 2;
    for (std::size_t i = 0; i < d; ++i) {
        const double kr = known[i], ki = known[d + i], rr = r[i], ri = r[d + i];
        const double gr = dq[i], gi = dq[d + i];
        if (dir == Direction::Tail) {
            // q_re = kr rr - ki ri ; q_im = kr ri + ki rr
            d_known[i] += gr * rr + gi * ri;
            d_known[d + i] += -gr * ri + gi * rr;
            d_r[i] += gr * kr + gi * ki;
            d_r[d + i] += -gr * ki + gi * kr;
        } else {
            // q_re = kr rr + ki ri ; q_im = ki rr - kr ri
            d_known[i] += gr * rr - gi * ri;
            d_known[d + i] += gr * ri + gi * rr;
            d_r[i] += gr * kr + gi * ki;
            d_r[d + i] += gr * ki - gi * kr;
        }
    }
}

void KgcTrainConfig::validate() const {
    std::vector<std::string> errs;
    if (dim == 0) errs.push_back("dim must be positive");
    if (!(learning_rate > 0)) errs.push_back("learning_rate must be positive");
    if (regularizer_weight < 0) errs.push_back("regularizer_weight must be >= 0");
    if (batch_size == 0) errs.push_back("batch_size must be positive");
    if (optimizer != "adagrad") errs.push_back("optimizer must be adagrad");
    if (errs.empty()) return;
    std::string msg = "invalid kgc config:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
}

KgcTrainConfig KgcTrainConfig::from(const KeyValueConfig& kv) {
    static const std::set<std::string> known = {"dim",      "learning_rate", "regularizer_weight", "batch_size",
                                                "max_epochs", "patience",    "min_delta",          "seed",
                                                "optimizer"};
    if (auto unknown = kv.unknown_keys(known); !unknown.empty()) {
        std::string msg = "unknown kgc config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
    KgcTrainConfig c;
    c.dim = kv.get_uint("dim", c.dim);
    c.learning_rate = kv.get_double("learning_rate", c.learning_rate);
    c.regularizer_weight = kv.get_double("regularizer_weight", c.regularizer_weight);
    c.batch_size = kv.get_uint("batch_size", c.batch_size);
    c.max_epochs = kv.get_uint("max_epochs", c.max_epochs);
    c.patience = kv.get_uint("patience", c.patience);
    c.min_delta = kv.get_double("min_delta", c.min_delta);
    c.seed = kv.get_uint("seed", c.seed);
    c.optimizer = kv.get_string("optimizer", c.optimizer);
    c.validate();
    return c;
}

KeyValueConfig KgcTrainConfig::to_config() const {
    KeyValueConfig kv;
    char buf[64];
    auto num = [&](const char* k, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        kv.set(k, buf);
    };
    kv.set("dim", std::to_string(dim));
    num("learning_rate", learning_rate);
    num("regularizer_weight", regularizer_weight);
    kv.set("batch_size", std::to_string(batch_size));
    kv.set("max_epochs", std::to_string(max_epochs));
    kv.set("patience", std::to_string(patience));
    num("min_delta", min_delta);
    kv.set("seed", std::to_string(seed));
    kv.set("optimizer", optimizer);
    return kv;
}

std::uint64_t KgcTrainConfig::hash() const { return fnv1a64(to_config().to_string()); }

namespace {

struct Workspace {
    std::vector<double> q, dq, scores;
};

// Cross-entropy of the softmax over `candidates` for one direction.
// Returns the loss and, if grad is set, accumulates scale * gradient.
double direction_loss(const ComplexEmbeddings& emb, std::span<const Index> candidates, Index known, Index rel,
                      Index target, Direction dir, double scale, ComplexEmbeddings* grad, Workspace& ws) {
    const std::size_t w = emb.width();
    ws.q.assign(w, 0.0);
    query_vector(emb.entity_row(known), emb.relation_row(rel), dir, ws.q);
    ws.scores.resize(candidates.size());
    kernels::score_rows(ws.q, emb.entity_matrix(), candidates, ws.scores);

    std::size_t target_pos = candidates.size();
    for (std::size_t j = 0; j < candidates.size(); ++j)
        if (candidates[j] == target) target_pos = j;
    if (target_pos == candidates.size()) throw TrainingError("training target is not a candidate");

    const double target_score = ws.scores[target_pos];
    const double lse = kernels::softmax_inplace(ws.scores);
    const double loss = lse - target_score;
    if (!grad) return loss;

    // dL/ds_j = p_j - [j == target]
    ws.dq.assign(w, 0.0);
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        const double g = scale * (ws.scores[j] - (j == target_pos ? 1.0 : 0.0));
        auto row = emb.entity_row(candidates[j]);
        auto grow = grad->entity_row(candidates[j]);
        for (std::size_t k = 0; k < w; ++k) {
            ws.dq[k] += g * row[k];
            grow[k] += g * ws.q[k];
        }
    }
    query_vector_backward(emb.entity_row(known), emb.relation_row(rel), dir, ws.dq, grad->entity_row(known),
                          grad->relation_row(rel));
    return loss;
}

double row_sq(std::span<const double> row) {
    double s = 0.0;
    for (double x : row) s += x * x;
    return s;
}

void add_reg_grad(std::span<const double> row, std::span<double> grow, double coeff) {
    for (std::size_t k = 0; k < row.size(); ++k) grow[k] += 2.0 * coeff * row[k];
}

}  // namespace

double kgc_batch_loss(const ComplexEmbeddings& emb, std::span<const Triple> batch, std::span<const Index> candidates,
                      double regularizer_weight, ComplexEmbeddings* grad) {
    if (batch.empty()) return 0.0;
    Workspace ws;
    const double scale = 1.0 / static_cast<double>(batch.size());
    const double reg_norm = 1.0 / (3.0 * static_cast<double>(emb.width()));
    double total = 0.0;
    for (const auto& t : batch) {
        total += direction_loss(emb, candidates, t.head, t.relation, t.tail, Direction::Tail, scale, grad, ws);
        total += direction_loss(emb, candidates, t.tail, t.relation, t.head, Direction::Head, scale, grad, ws);
        if (regularizer_weight > 0) {
            auto h = emb.entity_row(t.head), r = emb.relation_row(t.relation), tl = emb.entity_row(t.tail);
            total += regularizer_weight * reg_norm * (row_sq(h) + row_sq(r) + row_sq(tl));
            if (grad) {
                const double c = scale * regularizer_weight * reg_norm;
                add_reg_grad(h, grad->entity_row(t.head), c);
                add_reg_grad(r, grad->relation_row(t.relation), c);
                add_reg_grad(tl, grad->entity_row(t.tail), c);
            }
        }
    }
    return total * scale;
}

void Adagrad::step(std::span<double> params, std::span<const double> grad) {
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grad[i] == 0.0) continue;
        accum_[i] += grad[i] * grad[i];
        params[i] -= lr_ * grad[i] / (std::sqrt(accum_[i]) + eps_);
    }
}

KgcTrainResult train_closed_world(const KnowledgeGraph& g, const KgcTrainConfig& config,
                                  const KgcTrainOptions& options) {
    config.validate();
    if (g.triples().empty()) throw TrainingError("cannot train on an empty graph");

    std::vector<Index> candidates = options.candidates;
    if (candidates.empty()) {
        candidates.resize(g.vertices.size());
        std::iota(candidates.begin(), candidates.end(), Index{0});
    }

    KgcTrainResult res;
    res.embeddings = init_embeddings(g.vertices.size(), g.relations.size(), config.dim, config.seed);
    auto& emb = res.embeddings;
    ComplexEmbeddings grad(emb.n_entities, emb.n_relations, emb.dim);
    Adagrad opt_e(emb.entity.size(), config.learning_rate);
    Adagrad opt_r(emb.relation.size(), config.learning_rate);

    std::vector<Triple> order = g.triples();
    // shuffling uses its own stream so initialisation stays reproducible
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<Triple> known = g.triples();
    known.insert(known.end(), options.validation.begin(), options.validation.end());
    double best = -1.0;
    std::size_t since_best = 0;
    ComplexEmbeddings best_emb;

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const auto n = std::min(config.batch_size, order.size() - start);
            std::span<const Triple> batch(order.data() + start, n);
            grad.fill_zero();
            const double loss = kgc_batch_loss(emb, batch, candidates, config.regularizer_weight, &grad);
            if (!std::isfinite(loss))
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch starting at " +
                                    std::to_string(start) + "; lower the learning rate");
            epoch_total += loss * static_cast<double>(n);
            opt_e.step(emb.entity, grad.entity);
            opt_r.step(emb.relation, grad.relation);
        }
        const double mean = epoch_total / static_cast<double>(order.size());
        res.epoch_loss.push_back(mean);
        res.epochs_run = epoch + 1;
        if (options.on_epoch) options.on_epoch(epoch + 1, mean);

        if (config.patience > 0 && !options.validation.empty()) {
            const double h10 = filtered_hits_at(emb, known, options.validation, candidates, 10);
            if (h10 > best + config.min_delta || best < 0) {
                best = h10;
                best_emb = emb;
                since_best = 0;
            } else if (++since_best >= config.patience) {
                emb = best_emb;
                res.early_stopped = true;
                break;
            }
        }
    }
    return res;
}

RankedList predict(const ComplexEmbeddings& emb, std::span<const Index> candidates, Index known, Index relation,
                   Direction dir) {
    if (known >= emb.n_entities) throw std::out_of_range("predict: unknown vertex index");
    if (relation >= emb.n_relations) throw std::out_of_range("predict: unknown relation index");
    for (auto c : candidates)
        if (c >= emb.n_entities) throw std::out_of_range("predict: candidate out of range");
    std::vector<double> q(emb.width()), scores(candidates.size());
    query_vector(emb.entity_row(known), emb.relation_row(relation), dir, q);
    kernels::score_rows(q, emb.entity_matrix(), candidates, scores);
    return RankedList::from_scores(candidates, scores);
}

double filtered_hits_at(const ComplexEmbeddings& emb, std::span<const Triple> known, std::span<const Triple> eval,
                        std::span<const Index> candidates, std::size_t k) {
    if (eval.empty()) return 0.0;
    // truths per (known vertex, relation, direction)
    std::map<std::tuple<Index, Index, int>, std::vector<Index>> truths;
    for (const auto& t : known) {
        truths[{t.head, t.relation, 1}].push_back(t.tail);
        truths[{t.tail, t.relation, 0}].push_back(t.head);
    }
    for (auto& [key, v] : truths) std::sort(v.begin(), v.end());

    std::size_t hits = 0;
    std::vector<double> q(emb.width()), scores(candidates.size());
    for (const auto& t : eval) {
        for (Direction dir : {Direction::Tail, Direction::Head}) {
            const Index anchor = dir == Direction::Tail ? t.head : t.tail;
            const Index target = dir == Direction::Tail ? t.tail : t.head;
            query_vector(emb.entity_row(anchor), emb.relation_row(t.relation), dir, q);
            kernels::score_rows(q, emb.entity_matrix(), candidates, scores);
            auto& tr = truths[{anchor, t.relation, dir == Direction::Tail ? 1 : 0}];
            std::size_t pos = candidates.size();
            for (std::size_t j = 0; j < candidates.size(); ++j)
                if (candidates[j] == target) pos = j;
            if (pos == candidates.size()) continue;  // target outside the candidate set is a miss
            const double target_score = scores[pos];
            std::size_t better = 0;
            for (std::size_t j = 0; j < candidates.size(); ++j) {
                const Index c = candidates[j];
                if (c == target || std::binary_search(tr.begin(), tr.end(), c)) continue;
                if (ranks_before({c, scores[j]}, {target, target_score})) ++better;
            }
            if (better + 1 <= k) ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(2 * eval.size());
}

void save_embeddings(std::ostream& out, const ComplexEmbeddings& emb, const CheckpointHeader& h) {
    binio::put_magic(out, kMagic);
    binio::put_u32(out, h.version);
    binio::put_u32(out, static_cast<std::uint32_t>(emb.dim));
    binio::put_u32(out, static_cast<std::uint32_t>(emb.n_entities));
    binio::put_u32(out, static_cast<std::uint32_t>(emb.n_relations));
    binio::put_u64(out, h.seed);
    binio::put_u64(out, h.config_hash);
    binio::put_f32s(out, emb.entity);
    binio::put_f32s(out, emb.relation);
}

ComplexEmbeddings load_embeddings(std::istream& in, CheckpointHeader* h) {
    binio::expect_magic(in, kMagic);
    CheckpointHeader hdr;
    hdr.version = binio::get_u32(in);
    if (hdr.version != 1) throw std::runtime_error("unsupported checkpoint version " + std::to_string(hdr.version));
    const auto d = binio::get_u32(in);
    const auto nv = binio::get_u32(in);
    const auto nr = binio::get_u32(in);
    hdr.seed = binio::get_u64(in);
    hdr.config_hash = binio::get_u64(in);
    ComplexEmbeddings emb(nv, nr, d);
    binio::get_f32s(in, emb.entity);
    binio::get_f32s(in, emb.relation);
    if (!emb.all_finite()) throw std::runtime_error("checkpoint contains non-finite values");
    if (h) *h = hdr;
    return emb;
}

void save_embeddings(const std::filesystem::path& path, const ComplexEmbeddings& emb, const CheckpointHeader& h) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("unwritable path: " + path.string());
    save_embeddings(out, emb, h);
}

ComplexEmbeddings load_embeddings(const std::filesystem::path& path, CheckpointHeader* h) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return load_embeddings(in, h);
}

}  // namespace owlink
