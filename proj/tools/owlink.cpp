// owlink: command-line entry point.

#include <CLI11.hpp>

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "owlink/bm25.hpp"
#include "owlink/builder.hpp"
#include "owlink/bundle_io.hpp"
#include "owlink/complex.hpp"
#include "owlink/config.hpp"
#include "owlink/eval.hpp"
#include "owlink/inductive.hpp"
#include "owlink/text.hpp"
#include "owlink/workbench.hpp"

namespace fs = std::filesystem;
using namespace owlink;

namespace {

// Layered configuration: preset, then config file, then --set, then the
// per-key flags.
struct ConfigArgs {
    std::string preset;
    std::string file;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;
    std::vector<std::pair<std::string, CLI::Option*>> options;
};

void add_config_options(CLI::App* cmd, ConfigArgs& a, const std::vector<std::string>& keys) {
    cmd->add_option("--preset", a.preset, "Shipped preset name (see `owlink presets`)");
    cmd->add_option("--config", a.file, "key = value config file");
    cmd->add_option("--set", a.sets, "Override as key=value (repeatable)");
    for (const auto& k : keys) {
        std::string dashed = k;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        std::string names = "--" + k;
        if (dashed != k) names += ",--" + dashed;
        a.options.emplace_back(k, cmd->add_option(names, a.flags[k], "config key " + k));
    }
}

// A bare preset name ("tiny") also resolves to "<family>-tiny".
KeyValueConfig find_preset(const std::string& name, const std::string& family) {
    const auto shipped = list_presets();
    if (std::find(shipped.begin(), shipped.end(), name) == shipped.end() &&
        std::find(shipped.begin(), shipped.end(), family + "-" + name) != shipped.end())
        return load_preset(family + "-" + name);
    return load_preset(name);
}

KeyValueConfig resolve(const ConfigArgs& a, const std::string& family) {
    KeyValueConfig kv;
    if (!a.preset.empty()) kv.merge(find_preset(a.preset, family));
    if (!a.file.empty()) kv.merge(KeyValueConfig::load(a.file));
    for (const auto& s : a.sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        auto trim = [](std::string x) {
            x.erase(0, x.find_first_not_of(" \t"));
            x.erase(x.find_last_not_of(" \t") + 1);
            return x;
        };
        kv.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    for (const auto& [k, opt] : a.options)
        if (opt->count() > 0) kv.set(k, a.flags.at(k));
    return kv;
}

void echo_config(const std::string& title, const KeyValueConfig& kv) {
    std::cout << title << " config:\n";
    std::istringstream lines(kv.to_string());
    for (std::string line; std::getline(lines, line);) std::cout << "  " << line << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw std::runtime_error("unwritable path: " + path.string());
}

std::string command_line(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
    return s;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string loss_tsv(const std::vector<double>& losses) {
    std::string out = "# epoch\tmean_loss\n";
    char buf[64];
    for (std::size_t i = 0; i < losses.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu\t%.9g\n", i + 1, losses[i]);
        out += buf;
    }
    return out;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

const std::vector<std::string> kBuildKeys = {"concept_relations", "total_relations", "closed_world_threshold",
                                             "target_mention_split", "target_validation_split",
                                             "mention_threshold", "seed"};
const std::vector<std::string> kKgcKeys = {"dim",      "learning_rate", "regularizer_weight", "batch_size",
                                           "max_epochs", "patience",    "min_delta",          "seed",
                                           "optimizer"};
const std::vector<std::string> kInductiveKeys = {
    "dim",           "encoder_dim",   "unfrozen_layers", "trainable_encoder", "regularizer_weight",
    "contexts_per_sample", "max_contexts", "masked",      "batch_size",        "subbatch_size",
    "learning_rate", "weight_decay",  "seed",            "max_epochs",        "patience",
    "min_delta",     "vocab_min_count", "mode"};

struct Common {
    std::string out;
    std::string dataset;
};

// ---- build-dataset ----

struct BuildArgs {
    Common c;
    std::string graph, contexts, concept_relations, kept_relations;
    bool gzip = false;
    ConfigArgs cfg;
};

int run_build(const BuildArgs& a, const std::string& cmdline) {
    const auto t0 = Clock::now();
    const auto kv = resolve(a.cfg, "build");
    const auto config = BuildConfig::from(kv);
    echo_config("build", config.to_config());
    RelationOverrides ov;
    if (!a.concept_relations.empty()) ov.concept_relations = split_csv(a.concept_relations);
    if (!a.kept_relations.empty()) ov.kept_relations = split_csv(a.kept_relations);

    auto g = load_graph(a.graph);
    auto records = read_ingestion(a.contexts);
    auto h = harvest(records, g.vertices, config.mention_threshold);
    std::cout << "harvest: " << h.mentions.size() << " mentions, " << h.contexts.size() << " contexts; "
              << h.report.surface_not_found << " surface not found, " << h.report.unknown_vertex
              << " unknown vertex, " << h.report.dropped_mentions << " mentions below threshold\n";
    auto bundle = split(g, h.mentions, h.contexts, config, ov);

    const fs::path out = a.c.out;
    fs::create_directories(out);
    save_bundle(bundle, out, {a.gzip});
    const auto stats = stats_report(bundle).to_text();
    write_text(out / "stats.txt", stats);
    write_text(out / "config.txt", config.to_config().to_string());
    std::cout << stats;

    RunManifest m;
    m.command = cmdline;
    m.config_hash = hex64(fnv1a64(config.to_config().to_string()));
    m.seed = config.seed;
    m.inputs = {a.graph, a.contexts};
    for (const auto& e : fs::directory_iterator(out))
        if (e.is_regular_file() && e.path().filename() != "manifest.txt") m.outputs.push_back(e.path());
    std::sort(m.outputs.begin(), m.outputs.end());
    m.wall_seconds = seconds_since(t0);
    m.write(out);
    return 0;
}

// ---- train-kgc ----

struct KgcArgs {
    Common c;
    ConfigArgs cfg;
};

int run_train_kgc(const KgcArgs& a, const std::string& cmdline) {
    const auto t0 = Clock::now();
    const auto config = KgcTrainConfig::from(resolve(a.cfg, "kgc"));
    echo_config("train-kgc", config.to_config());
    const auto bundle = load_bundle(a.c.dataset);

    KgcTrainOptions opts;
    opts.candidates = bundle.closed_vertices();
    opts.on_epoch = [](std::size_t e, double loss) { std::cout << "epoch " << e << " loss " << loss << "\n"; };
    auto res = train_closed_world(bundle.graph, config, opts);

    const fs::path out = a.c.out;
    fs::create_directories(out);
    save_embeddings(out / "kgc.ckpt", res.embeddings, {1, config.seed, config.hash()});
    write_text(out / "loss.tsv", loss_tsv(res.epoch_loss));
    write_text(out / "config.txt", config.to_config().to_string());

    RunManifest m{cmdline, hex64(config.hash()), config.seed, {a.c.dataset},
                  {out / "config.txt", out / "kgc.ckpt", out / "loss.tsv"}, seconds_since(t0)};
    m.write(out);
    return 0;
}

// ---- train-joint / train-owe ----

struct InductiveArgs {
    Common c;
    std::string kgc;
    std::string encodings;
    bool early_stop_on_validation = false;
    ConfigArgs cfg;
};

int run_train_inductive(const InductiveArgs& a, bool joint, const std::string& cmdline) {
    const auto t0 = Clock::now();
    const auto config = InductiveTrainConfig::from(resolve(a.cfg, joint ? "joint" : "owe"));
    echo_config(joint ? "train-joint" : "train-owe", config.to_config());
    const auto bundle = load_bundle(a.c.dataset);
    std::optional<ExternalEncodings> ext;
    if (!a.encodings.empty()) ext = import_external_encodings(a.encodings);

    InductiveTrainOptions opts;
    opts.external = ext ? &*ext : nullptr;
    opts.on_epoch = [](std::size_t e, double loss) { std::cout << "epoch " << e << " loss " << loss << "\n"; };
    if (a.early_stop_on_validation) {
        opts.validate = [&](const OpenWorldModel& model) {
            EvalOptions eo;
            eo.seed = config.seed;
            NeuralRanker ranker(model, bundle, bundle.validation, "validation", eo, opts.external);
            return evaluate(Task::Linking, ranker, bundle, bundle.validation, "validation", eo).hits_at(10);
        };
    }
    InductiveTrainResult res;
    if (joint) {
        res = train_joint(bundle, config, opts);
    } else {
        CheckpointHeader h;
        auto pre = load_embeddings(fs::path(a.kgc), &h);
        res = train_owe(bundle, pre, config, opts);
    }
    std::cout << "samples per epoch " << res.samples_per_epoch << ", skipped vertices " << res.skipped_vertices
              << (res.early_stopped ? ", early stopped" : "") << "\n";

    const fs::path out = a.c.out;
    fs::create_directories(out);
    save_model(out / "model.owm", res.model, config.hash(), config.seed);
    res.model.vocab.save(out / "vocab.txt");
    write_text(out / "loss.tsv", loss_tsv(res.epoch_loss));
    write_text(out / "config.txt", config.to_config().to_string());
    RunManifest m{cmdline, hex64(config.hash()), config.seed, {a.c.dataset},
                  {out / "config.txt", out / "loss.tsv", out / "model.owm", out / "vocab.txt"}, seconds_since(t0)};
    if (!joint) m.inputs.push_back(a.kgc);
    if (!a.encodings.empty()) m.inputs.push_back(a.encodings);
    m.write(out);
    return 0;
}

// ---- index-bm25 ----

struct IndexArgs {
    Common c;
    double k1 = 1.2, b = 0.75;
};

int run_index(const IndexArgs& a, const std::string& cmdline) {
    const auto t0 = Clock::now();
    const Bm25Params params{a.k1, a.b};
    const auto bundle = load_bundle(a.c.dataset);
    const fs::path out = a.c.out;
    fs::create_directories(out);
    build_vertex_index(bundle, params).save(out / "vertices.bm25");
    std::vector<fs::path> outputs{out / "vertices.bm25"};
    for (const char* name : {"validation", "test"}) {
        const auto& s = bundle.open(name);
        std::vector<std::vector<std::string>> docs;
        for (const auto& c : s.contexts.all()) docs.push_back(bow_tokens(c.sentence));
        const auto path = out / ("contexts." + std::string(name) + ".bm25");
        InvertedIndex::build(docs, params).save(path);
        outputs.push_back(path);
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "k1 = %.17g\nb = %.17g\n", a.k1, a.b);
    write_text(out / "config.txt", buf);
    outputs.insert(outputs.begin(), out / "config.txt");
    RunManifest m{cmdline, hex64(fnv1a64(buf)), 0, {a.c.dataset}, outputs, seconds_since(t0)};
    m.write(out);
    std::cout << "indexed " << bundle.graph.vertices.size() << " vertex documents\n";
    return 0;
}

// ---- eval ----

struct EvalArgs {
    Common c;
    std::string task = "linking", engine = "bow", model, split = "test", encodings, index;
    std::size_t subsample = EvalOptions::kDefaultSubsample;
    std::size_t ctx_per_mention = EvalOptions::kDefaultContextsPerMention;
    std::uint64_t seed = 0;
    BowOptions bow;
};

int run_eval(const EvalArgs& a, const std::string& cmdline) {
    const auto t0 = Clock::now();
    const Task task = parse_task(a.task);
    static const std::set<std::string> engines = {"bow",        "neural",     "joint-single",
                                                  "joint-multi", "owe-single", "owe-multi"};
    if (!engines.count(a.engine)) throw ConfigError("unknown engine '" + a.engine + "'");
    const bool neural = a.engine != "bow";
    if (neural && a.model.empty()) throw ConfigError("engine " + a.engine + " needs --model");

    EvalOptions eo;
    eo.subsample = a.subsample;
    eo.ctx_per_mention = a.ctx_per_mention;
    eo.seed = a.seed;
    BowOptions bo = a.bow;
    bo.seed = a.seed;

    const auto bundle = load_bundle(a.c.dataset);
    const auto& split = bundle.open(a.split);
    std::optional<ExternalEncodings> ext;
    if (!a.encodings.empty()) ext = import_external_encodings(a.encodings);
    std::optional<OpenWorldModel> model;
    std::unique_ptr<Ranker> ranker;
    std::optional<InvertedIndex> vindex;
    if (neural) {
        model = load_model(a.model);
        ranker = std::make_unique<NeuralRanker>(*model, bundle, split, a.split, eo, ext ? &*ext : nullptr);
    } else {
        if (!a.index.empty()) vindex = InvertedIndex::load(fs::path(a.index) / "vertices.bm25");
        ranker = std::make_unique<BowRanker>(bundle, split, eo, bo, vindex ? &*vindex : nullptr);
    }
    auto report = evaluate(task, *ranker, bundle, split, a.split, eo);
    report.model = a.engine;

    const fs::path out = a.c.out;
    fs::create_directories(out);
    write_text(out / "report.txt", report.to_text());
    report.write_queries_tsv(out / "queries.tsv", bundle, split);
    std::cout << report.to_text();

    RunManifest m{cmdline, hex64(fnv1a64(a.task + a.engine + a.split + std::to_string(a.subsample) +
                                         std::to_string(a.ctx_per_mention))),
                  a.seed, {a.c.dataset}, {out / "queries.tsv", out / "report.txt"}, seconds_since(t0)};
    if (neural) m.inputs.push_back(a.model);
    m.write(out);
    return 0;
}

// ---- serve ----

struct ServeArgs {
    Common c;
    std::string model, split = "test", host = "127.0.0.1", overlay, encodings;
    int port = 8080;
};

HttpService* g_service = nullptr;

int run_serve(const ServeArgs& a) {
    auto bundle = load_bundle(a.c.dataset);
    std::optional<OpenWorldModel> model;
    if (!a.model.empty()) model = load_model(a.model);
    std::optional<ExternalEncodings> ext;
    if (!a.encodings.empty()) ext = import_external_encodings(a.encodings);
    WorkspaceOptions wo;
    wo.split = a.split;
    wo.overlay_log = a.overlay.empty() ? fs::path(a.c.dataset) / "overlay.log" : fs::path(a.overlay);
    Workspace ws(std::move(bundle), std::move(model), wo, ext ? &*ext : nullptr);
    HttpService service(ws);
    const int port = service.bind(a.host, a.port);
    if (port < 0) throw std::runtime_error("cannot bind " + a.host + ":" + std::to_string(a.port));
    g_service = &service;
    std::signal(SIGINT, [](int) {
        if (g_service) g_service->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_service) g_service->stop();
    });
    std::cout << "listening on http://" << a.host << ":" << port << std::endl;
    service.listen();
    g_service = nullptr;
    return 0;
}

// ---- report ----

struct ReportArgs {
    Common c;
    std::vector<std::string> evals;
};

int run_report(const ReportArgs& a, const std::string& cmdline) {
    const auto t0 = Clock::now();
    std::string text;
    std::vector<std::string> inputs;
    if (!a.c.dataset.empty()) {
        const auto bundle = load_bundle(a.c.dataset);
        text += "[dataset]\n" + stats_report(bundle).to_text();
        inputs.push_back(a.c.dataset);
    }
    for (const auto& dir : a.evals) {
        const auto kv = KeyValueConfig::load(fs::path(dir) / "report.txt");
        text += "\n[eval " + dir + "]\n" + kv.to_string();
        inputs.push_back(dir);
    }
    if (text.empty()) throw ConfigError("report needs --dataset and/or --eval");
    const fs::path out = a.c.out;
    fs::create_directories(out);
    write_text(out / "report.txt", text);
    std::cout << text;
    RunManifest m{cmdline, hex64(fnv1a64(text)), 0, inputs, {out / "report.txt"}, seconds_since(t0)};
    m.write(out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"owlink: open-world linking of mentions to a knowledge graph"};
    app.require_subcommand(1);
    const std::string cmdline = command_line(argc, argv);

    BuildArgs build;
    auto* b = app.add_subcommand("build-dataset", "Build a dataset bundle from a graph and harvested contexts");
    b->add_option("--graph", build.graph, "Directory with vertices.tsv, relations.tsv, triples.tsv")->required();
    b->add_option("--contexts", build.contexts, "vertex, surface, origin, sentence records (.gz allowed)")->required();
    b->add_option("--out", build.c.out, "Output dataset directory")->required();
    b->add_option("--concept-relation-ids", build.concept_relations, "Comma-separated manual concept relations");
    b->add_option("--kept-relation-ids", build.kept_relations, "Comma-separated manual kept relations");
    b->add_flag("--gzip", build.gzip, "Write gzip-compressed context files");
    add_config_options(b, build.cfg, kBuildKeys);

    KgcArgs kgc;
    auto* k = app.add_subcommand("train-kgc", "Train ComplEx on the closed-world graph");
    k->add_option("--dataset", kgc.c.dataset)->required();
    k->add_option("--out", kgc.c.out)->required();
    add_config_options(k, kgc.cfg, kKgcKeys);

    InductiveArgs joint;
    auto* j = app.add_subcommand("train-joint", "Train encoder, projection and graph embeddings end to end");
    j->add_option("--dataset", joint.c.dataset)->required();
    j->add_option("--out", joint.c.out)->required();
    j->add_option("--encodings", joint.encodings, "External context encodings replacing the token encoder");
    j->add_flag("--early-stop-on-validation", joint.early_stop_on_validation,
                "Early stopping on validation linking hits@10 (needs patience > 0)");
    add_config_options(j, joint.cfg, kInductiveKeys);

    InductiveArgs owe;
    auto* o = app.add_subcommand("train-owe", "Align text representations with pretrained graph embeddings");
    o->add_option("--dataset", owe.c.dataset)->required();
    o->add_option("--kgc", owe.kgc, "Checkpoint written by train-kgc")->required();
    o->add_option("--out", owe.c.out)->required();
    o->add_option("--encodings", owe.encodings, "External context encodings replacing the token encoder");
    o->add_flag("--early-stop-on-validation", owe.early_stop_on_validation,
                "Early stopping on validation linking hits@10 (needs patience > 0)");
    add_config_options(o, owe.cfg, kInductiveKeys);

    IndexArgs idx;
    auto* ix = app.add_subcommand("index-bm25", "Build BM25 indices over vertex documents and open-world contexts");
    ix->add_option("--dataset", idx.c.dataset)->required();
    ix->add_option("--out", idx.c.out)->required();
    ix->add_option("--k1", idx.k1);
    ix->add_option("--b", idx.b);

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Evaluate ranking or linking on an open-world split");
    e->add_option("--dataset", ev.c.dataset)->required();
    e->add_option("--out", ev.c.out)->required();
    e->add_option("--task", ev.task, "ranking or linking")->check(CLI::IsMember({"ranking", "linking"}));
    e->add_option("--engine", ev.engine, "bow, neural, joint-single, joint-multi, owe-single or owe-multi");
    e->add_option("--model", ev.model, "Model written by train-joint or train-owe");
    e->add_option("--split", ev.split, "validation or test")->check(CLI::IsMember({"validation", "test"}));
    e->add_option("--subsample", ev.subsample, "Contexts drawn from the split for ranking");
    e->add_option("--ctx-per-mention,--ctx_per_mention", ev.ctx_per_mention, "Contexts per mention for linking");
    e->add_option("--seed", ev.seed);
    e->add_option("--encodings", ev.encodings);
    e->add_option("--index", ev.index, "Directory written by index-bm25");
    e->add_option("--k1", ev.bow.params.k1);
    e->add_option("--b", ev.bow.params.b);
    e->add_option("--n-repr,--n_repr", ev.bow.n_repr);
    e->add_option("--n-ctx,--n_ctx", ev.bow.n_ctx);
    e->add_option("--top-n,--top_n", ev.bow.top_n);

    ServeArgs sv;
    auto* s = app.add_subcommand("serve", "Run the workbench HTTP API");
    s->add_option("--dataset", sv.c.dataset)->required();
    s->add_option("--model", sv.model);
    s->add_option("--split", sv.split)->check(CLI::IsMember({"validation", "test"}));
    s->add_option("--host", sv.host);
    s->add_option("--port", sv.port);
    s->add_option("--overlay", sv.overlay, "Append-only overlay log (default: <dataset>/overlay.log)");
    s->add_option("--encodings", sv.encodings);

    ReportArgs rp;
    auto* r = app.add_subcommand("report", "Summarize a dataset and evaluation runs");
    r->add_option("--dataset", rp.c.dataset);
    r->add_option("--eval", rp.evals, "Directories written by eval");
    r->add_option("--out", rp.c.out)->required();

    auto* pr = app.add_subcommand("presets", "List shipped presets");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*b) return run_build(build, cmdline);
        if (*k) return run_train_kgc(kgc, cmdline);
        if (*j) return run_train_inductive(joint, true, cmdline);
        if (*o) return run_train_inductive(owe, false, cmdline);
        if (*ix) return run_index(idx, cmdline);
        if (*e) return run_eval(ev, cmdline);
        if (*s) return run_serve(sv);
        if (*r) return run_report(rp, cmdline);
        if (*pr) {
            for (const auto& p : list_presets()) std::cout << p << "\n";
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
