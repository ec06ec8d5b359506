#include "radmark/cli/app.hpp"

#include "radmark/core/rng.hpp"
#include "radmark/eval/report.hpp"
#include "radmark/infer/model_backend.hpp"
#include "radmark/infer/stub.hpp"
#include "radmark/ingest/dicom.hpp"
#include "radmark/ingest/store.hpp"
#include "radmark/io/files.hpp"
#include "radmark/labels/dataset.hpp"
#include "radmark/labels/split.hpp"
#include "radmark/pipeline/pipeline.hpp"
#include "radmark/review/service.hpp"
#include "radmark/synth/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <optional>
#include <pthread.h>
#include <set>
#include <sstream>
#include <thread>

namespace radmark::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path default_registry() {
    if (const char* env = std::getenv("RADMARK_REGISTRY")) return env;
    return RADMARK_DEFAULT_REGISTRY;
}

ClassRegistry registry_from(const std::string& path) {
    return load_class_registry(path.empty() ? default_registry() : fs::path(path));
}

void require_dir(const fs::path& p, const std::string& what) {
    std::error_code ec;
    if (!fs::is_directory(p, ec)) throw ConfigError(what + " '" + p.string() + "' is not a directory");
}

void make_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw ServiceError(p.string() + ": " + ec.message());
}

std::vector<fs::path> files_with_extension(const fs::path& dir, const std::string& ext) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void erase_class(AnnotationSet& set, ClassId id) {
    set.landmarks.erase(id);
    set.outlines.erase(id);
    set.patches.erase(id);
    set.masks.erase(id);
}

json issues_json(const std::vector<FeatureIssue>& issues) {
    auto arr = json::array();
    for (const auto& i : issues) arr.push_back({{"code", i.code}, {"reason", i.reason}});
    return arr;
}

// Image ids of the store restricted to one split; "all" keeps every id.
std::vector<std::string> select_ids(const DataStore& store, const std::string& split) {
    if (split == "all") return store.ids();
    const auto s = parse_split(split);
    if (!s || *s == Split::unassigned) throw ConfigError("--split must be all, train, val or test");
    std::error_code ec;
    if (!fs::exists(store.split_path(), ec)) throw ConfigError("--split " + split + " needs a split manifest; run split first");
    return load_split_manifest(store.split_path()).ids_in(*s);
}

// ---------------------------------------------------------------- synth

struct SynthOpts {
    int n = 20;
    std::uint64_t seed = 7;
    std::string out;
    int width = 512;
    int height = 512;
    double spacing = 0.5;
    bool uncalibrated = false;
    int bit_depth = 12;
    std::string registry;
};

int cmd_synth(const SynthOpts& o, std::ostream& out) {
    if (o.n < 0) throw ConfigError("--n must be >= 0");
    const auto reg = registry_from(o.registry);
    SynthConfig cfg;
    cfg.count = o.n;
    cfg.seed = o.seed;
    cfg.width = o.width;
    cfg.height = o.height;
    cfg.spacing_mm = o.spacing;
    cfg.calibrated = !o.uncalibrated;
    cfg.bit_depth = o.bit_depth;
    const fs::path root(o.out);
    make_dir(root / "dicom");
    make_dir(root / "annotations");
    for (int i = 0; i < o.n; ++i) {
        const auto c = synth_case(cfg, reg, i);
        write_dicom(root / "dicom" / (c.record.id() + ".dcm"), c.record);
        save_annotations(root / "annotations" / (c.record.id() + ".json"), c.truth, reg);
    }
    out << "synth: " << o.n << " images in " << root.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- ingest

struct IngestOpts {
    std::string dicom_dir;
    std::string annotations_dir;
    std::string store;
    std::string registry;
    bool strict = false;
};

int cmd_ingest(const IngestOpts& o, std::ostream& out) {
    require_dir(o.dicom_dir, "DICOM directory");
    require_dir(o.annotations_dir, "annotation directory");
    std::error_code ec;
    const fs::path root(o.store);
    auto store = fs::exists(root / "index.json", ec) ? DataStore::open(root) : DataStore::create(root, registry_from(o.registry));
    const auto& reg = store.registry();

    auto files = json::array();
    std::size_t ingested = 0, rejected = 0, flagged = 0;
    std::set<std::string> seen;
    for (const auto& path : files_with_extension(o.dicom_dir, ".dcm")) {
        json entry{{"file", path.filename().string()}};
        const auto id = path.stem().string();
        entry["image_id"] = id;
        seen.insert(id);
        try {
            if (!valid_image_id(id)) throw ValidationError("file stem is not a usable image id");
            auto dicom = load_dicom(path, id);
            std::optional<AnnotationSet> truth;
            const auto ann = fs::path(o.annotations_dir) / (id + ".json");
            json ann_issues = json::array();
            if (fs::exists(ann, ec)) {
                auto loaded = load_annotations(ann, reg);
                for (const auto& i : loaded.rejected) ann_issues.push_back({{"code", i.code}, {"reason", "rejected: " + i.reason}});
                for (const auto& i : loaded.invalid) ann_issues.push_back({{"code", i.code}, {"reason", "invalid: " + i.reason}});
                for (const auto& i : validate_bounds(loaded.set, reg, dicom.record.width(), dicom.record.height())) {
                    ann_issues.push_back({{"code", i.code}, {"reason", "dropped: " + i.reason}});
                    if (auto cid = reg.find(i.code)) erase_class(loaded.set, *cid);
                }
                loaded.set.image_id = id;
                truth = std::move(loaded.set);
            } else {
                ann_issues.push_back({{"code", ""}, {"reason", "no annotation file"}});
            }
            store.add(dicom.record, truth ? &*truth : nullptr);
            ++ingested;
            const bool warn = !dicom.warnings.empty() || !ann_issues.empty();
            flagged += warn;
            entry["status"] = warn ? "warning" : "ok";
            entry["warnings"] = dicom.warnings;
            entry["annotation_issues"] = ann_issues;
        } catch (const Error& e) {
            ++rejected;
            entry["status"] = "rejected";
            entry["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
        }
        files.push_back(std::move(entry));
    }
    auto orphans = json::array();
    for (const auto& path : files_with_extension(o.annotations_dir, ".json"))
        if (!seen.count(path.stem().string())) orphans.push_back(path.filename().string());
    store.save_index();
    const json report{{"schema_version", 1},
                      {"ingested", ingested},
                      {"rejected", rejected},
                      {"flagged", flagged},
                      {"partial", rejected > 0},
                      {"files", files},
                      {"orphan_annotations", orphans}};
    write_text_file_atomic(root / "ingest_report.json", report.dump(2) + "\n");
    out << "ingest: " << ingested << " stored, " << rejected << " rejected, " << flagged << " with warnings; report "
        << (root / "ingest_report.json").string() << "\n";
    if (ingested == 0 && rejected > 0) throw IngestionError("no file could be ingested");
    if (o.strict && (rejected > 0 || flagged > 0 || !orphans.empty())) {
        throw ValidationError("ingest --strict: see ingest_report.json");
    }
    return 0;
}

// ---------------------------------------------------------------- split

struct SplitOpts {
    std::string store;
    std::string counts = "80,5,15";
    std::optional<std::uint64_t> seed;
};

int cmd_split(const SplitOpts& o, std::ostream& out) {
    if (!o.seed) throw ConfigError("split needs --seed");
    const auto store = DataStore::open(o.store);
    const auto assignment = split_dataset(store.ids(), parse_split_counts(o.counts), *o.seed);
    const auto text = format_split_manifest(assignment);
    write_text_file_atomic(store.split_path(), text);
    out << text;
    return 0;
}

// ---------------------------------------------------------------- labels

struct LabelsOpts {
    std::string store;
    std::string out;
    int side = default_model_side;
    std::string split = "all";
    int jobs = 0;
};

int cmd_labels(const LabelsOpts& o, std::ostream& out) {
    if (o.side < 32) throw ConfigError("--side must be >= 32");
    const auto store = DataStore::open(o.store);
    const auto& reg = store.registry();
    const auto ids = select_ids(store, o.split);
    const fs::path root(o.out);
    make_dir(root);
    std::optional<SplitAssignment> manifest;
    std::error_code ec;
    if (fs::exists(store.split_path(), ec)) manifest = load_split_manifest(store.split_path());

    std::vector<json> entries(ids.size());
    std::vector<std::string> failures(ids.size());
    const int n = static_cast<int>(ids.size());
#pragma omp parallel for schedule(dynamic) num_threads(o.jobs > 0 ? o.jobs : omp_get_max_threads())
    for (int i = 0; i < n; ++i) {
        const auto& id = ids[static_cast<std::size_t>(i)];
        try {
            const auto* entry = store.find(id);
            if (!entry->has_annotations) throw IngestionError("no annotations");
            const auto record = store.load_record(id);
            const auto truth = store.load_truth(id);
            const Split s = manifest ? manifest->split_of(id) : Split::unassigned;
            const auto bundle = build_label_bundle(
                truth, reg, model_target(record.width(), record.height(), record.spacing(), o.side), s);
            const auto normalized = normalize_image(record, o.side);
            std::vector<std::string> warnings;
#pragma omp critical(radmark_labels_write)
            warnings = write_dataset_entry(root, normalized, bundle);
            if (!record.spacing()) warnings.push_back("uncalibrated: radii and strokes read as pixels (1 mm/px)");
            entries[static_cast<std::size_t>(i)] = {{"image_id", id},
                                                    {"split", to_string(s)},
                                                    {"classes", bundle.masks.size()},
                                                    {"issues", issues_json(bundle.issues)},
                                                    {"warnings", warnings}};
        } catch (const Error& e) {
            failures[static_cast<std::size_t>(i)] = e.what();
            entries[static_cast<std::size_t>(i)] = {{"image_id", id}, {"error", e.what()}};
        }
    }
    write_dataset_yaml(root, reg, o.side);
    const auto failed = static_cast<std::size_t>(std::count_if(failures.begin(), failures.end(), [](auto& f) { return !f.empty(); }));
    const json report{{"schema_version", 1}, {"side", o.side}, {"partial", failed > 0}, {"images", entries}};
    write_text_file_atomic(root / "labels_report.json", report.dump(2) + "\n");
    out << "labels: " << ids.size() - failed << " images written to " << root.string();
    if (!manifest) out << " (no split manifest; images are under 'unassigned')";
    out << "\n";
    if (failed > 0) throw ValidationError(std::to_string(failed) + " image(s) had no usable labels; see labels_report.json");
    return 0;
}

// ---------------------------------------------------------------- predict

struct PredictOpts {
    std::string store;
    std::string out;
    std::string backend = "stub";
    int side = default_model_side;
    std::optional<std::uint64_t> seed;
    std::string drop;
    int drop_landmarks = 0;
    double jitter = 0.0;
    double scale_jitter = 0.0;
    int morphology = 0;
    double confidence_penalty = 0.1;
    double confidence_threshold = 0.25;
    double mask_threshold = 0.5;
    bool refine = false;
    std::string detector;
    std::string segmenter;
    std::string split = "all";
    int jobs = 0;
};

std::unique_ptr<InferenceBackend> make_backend(const PredictOpts& o, const DataStore& store,
                                               const std::vector<std::string>& ids) {
    const auto& reg = store.registry();
    if (o.backend == "model") {
        if (o.detector.empty()) throw ConfigError("--backend model needs --detector");
        return load_model_backend(o.detector, o.segmenter,
                                  {"model", o.side, o.segmenter.empty() ? Capability::detect : Capability::both, false});
    }
    if (o.backend != "stub") throw ConfigError("--backend must be stub or model");
    const bool stochastic = o.jitter > 0 || o.scale_jitter > 0 || o.drop_landmarks > 0;
    if (stochastic && !o.seed) throw ConfigError("stochastic stub corruption needs --seed");
    StubConfig sc;
    sc.seed = o.seed.value_or(0);
    sc.center_jitter_px = o.jitter;
    sc.scale_jitter = o.scale_jitter;
    sc.morphology = o.morphology;
    sc.confidence_penalty = o.confidence_penalty;
    sc.input_side = o.side;
    for (const auto& code : split_list(o.drop)) sc.drop.insert(reg.require(code));
    if (o.drop_landmarks > 0) {
        auto lm = reg.ids_of_kind(FeatureKind::landmark);
        if (static_cast<std::size_t>(o.drop_landmarks) > lm.size()) throw ConfigError("--drop-landmarks exceeds the landmark count");
        auto rng = make_rng(sc.seed, "drop-landmarks");
        shuffle(lm, rng);
        sc.drop.insert(lm.begin(), lm.begin() + o.drop_landmarks);
    }
    auto stub = std::make_unique<StubBackend>(sc);
    for (const auto& id : ids) {
        const auto* entry = store.find(id);
        if (!entry->has_annotations) continue;
        const auto record = store.load_record(id);
        stub->attach(id, make_stub_truth(store.load_truth(id), reg, record.width(), record.height(), record.spacing(), o.side));
    }
    return stub;
}

int cmd_predict(const PredictOpts& o, std::ostream& out) {
    if (o.jobs < 0) throw ConfigError("--jobs must be >= 0");
    if (o.confidence_threshold < 0 || o.confidence_threshold > 1) throw ConfigError("--confidence-threshold must be in [0, 1]");
    const auto store = DataStore::open(o.store);
    const auto& reg = store.registry();
    const auto ids = select_ids(store, o.split);
    auto backend = make_backend(o, store, ids);
    PipelineConfig pc;
    pc.confidence_threshold = o.confidence_threshold;
    pc.mask_threshold = o.mask_threshold;
    pc.refine_landmarks_with_masks = o.refine;

    const fs::path root(o.out);
    make_dir(root);
    const auto items = run_batch(ids, [&store](const std::string& id) { return store.load_record(id); }, *backend, reg,
                                 pc, o.jobs);
    std::string csv = predictions_csv_header();
    auto failures = json::array();
    std::optional<ErrorKind> worst;
    for (const auto& item : items) {
        if (item.prediction) {
            save_predictions(root / (item.image_id + ".json"), *item.prediction, reg);
            csv += predictions_csv_rows(*item.prediction, reg);
        } else {
            const auto kind = item.error_kind.value_or(ErrorKind::service);
            failures.push_back({{"image_id", item.image_id}, {"kind", to_string(kind)}, {"message", item.error}});
            if (!worst || exit_code_for(kind) > exit_code_for(*worst)) worst = kind;
        }
    }
    write_text_file_atomic(root / "predictions.csv", csv);
    const auto failures_path = root / "failures.json";
    std::error_code ec;
    if (!failures.empty()) {
        write_text_file_atomic(failures_path, json{{"partial", true}, {"failures", failures}}.dump(2) + "\n");
    } else {
        fs::remove(failures_path, ec);
    }
    out << "predict: " << items.size() - failures.size() << "/" << items.size() << " images with backend "
        << backend->descriptor().name << " -> " << root.string() << "\n";
    if (worst) {
        const std::string msg = std::to_string(failures.size()) + " image(s) failed; see " + failures_path.string();
        if (*worst == ErrorKind::backend) throw BackendError(msg);
        if (exit_code_for(*worst) == 1) throw ValidationError(msg);
        throw ServiceError(msg);
    }
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
    std::string predictions;
    std::string truth;
    std::string out;
    std::string std_mode = "population";
    double acceptability = default_acceptability_mm;
};

int cmd_evaluate(const EvaluateOpts& o, std::ostream& out) {
    require_dir(o.predictions, "prediction directory");
    const auto store = DataStore::open(o.truth);
    const auto& reg = store.registry();
    const auto mode = parse_std_mode(o.std_mode);
    if (!mode) throw ConfigError("--std must be population or sample");
    if (!(o.acceptability > 0)) throw ConfigError("--acceptability must be > 0");

    std::vector<PredictionSet> preds;
    std::vector<AnnotationSet> truths;
    for (const auto& path : files_with_extension(o.predictions, ".json")) {
        const auto id = path.stem().string();
        if (id == "failures") continue;
        if (!store.find(id)) throw ValidationError("prediction '" + path.filename().string() + "' has no image in the store");
        preds.push_back(load_predictions(path, reg));
        truths.push_back(store.load_truth(id));
    }
    if (preds.empty()) throw ValidationError("no prediction files in '" + o.predictions + "'");
    std::vector<EvalCase> cases;
    for (std::size_t i = 0; i < preds.size(); ++i) cases.push_back({&preds[i], &truths[i]});
    const auto report = evaluate(cases, reg, {o.acceptability, *mode});

    const fs::path root(o.out);
    make_dir(root);
    write_text_file_atomic(root / "report.json", report_to_json(report).dump(2) + "\n");
    write_text_file_atomic(root / "report.csv", report_csv(report));
    const auto md = report_markdown(report);
    write_text_file_atomic(root / "report.md", md);
    const auto begin = md.find("## Summary");
    const auto end = md.find("\n## ", begin + 1);
    out << md.substr(begin, end == std::string::npos ? std::string::npos : end - begin + 1);
    return 0;
}

// ---------------------------------------------------------------- report

struct ReportOpts {
    std::string input;
    std::string format = "md";
};

int cmd_report(const ReportOpts& o, std::ostream& out) {
    json doc;
    try {
        doc = json::parse(read_text_file(o.input));
    } catch (const json::parse_error& e) {
        throw ValidationError(o.input + ": " + e.what());
    }
    const auto report = report_from_json(doc);
    if (o.format == "md") out << report_markdown(report);
    else if (o.format == "csv") out << report_csv(report);
    else if (o.format == "json") out << report_to_json(report).dump(2) << "\n";
    else throw ConfigError("--format must be md, csv or json");
    return 0;
}

// ---------------------------------------------------------------- serve

struct ServeOpts {
    std::string config;
    std::optional<int> port;
    std::string host;
    std::string data_root;
    std::string registry;
    std::string pool;
    std::string token;
    std::optional<int> threads;
};

int cmd_serve(const ServeOpts& o, std::ostream& out) {
    ServiceConfig cfg = o.config.empty() ? ServiceConfig{} : load_service_config(o.config);
    apply_env_overrides(cfg, [](const char* k) { return std::getenv(k); });
    if (o.port) cfg.port = *o.port;
    if (!o.host.empty()) cfg.host = o.host;
    if (!o.data_root.empty()) cfg.data_root = o.data_root;
    if (!o.registry.empty()) cfg.registry = fs::path(o.registry);
    if (!o.pool.empty()) cfg.pool_dir = fs::path(o.pool);
    if (!o.token.empty()) cfg.token = o.token;
    if (o.threads) cfg.threads = *o.threads;
    if (cfg.data_root.empty()) throw ConfigError("serve needs a data root (--data-root, config or RADMARK_DATA_ROOT)");

    // Signals are taken by a dedicated thread so shutdown runs outside a handler.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    ReviewService service(cfg);
    ReviewServer server(service);
    const int port = server.bind();
    out << "serve: listening on http://" << cfg.host << ":" << port << "/api (data root " << cfg.data_root.string()
        << ")" << std::endl;
    std::thread waiter([&server, set] {
        int sig = 0;
        sigwait(&set, &sig);
        server.stop();
    });
    server.listen();
    // listen() can also end on its own; wake the waiter.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
    out << "serve: stopped" << std::endl;
    return 0;
}

void print_error(std::ostream& err, std::string_view kind, const std::string& message, int code) {
    err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << std::endl;
}

} // namespace

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::configuration:
    case ErrorKind::validation:
    case ErrorKind::ingestion:
        return 1;
    case ErrorKind::backend:
        return 3;
    case ErrorKind::contract:
    case ErrorKind::service:
        return 2;
    }
    return 2;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Landmark and feature detection toolkit for pelvic radiographs", "radmark"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "radmark 0.1.0");

    SynthOpts synth;
    auto* s = app.add_subcommand("synth", "Generate synthetic DICOM images with ground-truth annotations");
    s->add_option("--n", synth.n, "Number of images")->capture_default_str();
    s->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
    s->add_option("--out", synth.out, "Output directory (dicom/ and annotations/)")->required();
    s->add_option("--width", synth.width, "Image width in pixels")->capture_default_str();
    s->add_option("--height", synth.height, "Image height in pixels")->capture_default_str();
    s->add_option("--spacing", synth.spacing, "Pixel spacing in mm")->capture_default_str();
    s->add_flag("--uncalibrated", synth.uncalibrated, "Omit the PixelSpacing attribute");
    s->add_option("--bit-depth", synth.bit_depth, "Stored bits, 8..16")->capture_default_str();
    s->add_option("--registry", synth.registry, "Class registry JSON (default: RADMARK_REGISTRY or bundled)");

    IngestOpts ingest;
    auto* in = app.add_subcommand("ingest", "Validate DICOM files and annotations into a canonical store");
    in->add_option("dicom-dir", ingest.dicom_dir, "Directory of .dcm files")->required();
    in->add_option("annotations-dir", ingest.annotations_dir, "Directory of <image_id>.json annotations")->required();
    in->add_option("--store", ingest.store, "Store directory, created if absent")->required();
    in->add_option("--registry", ingest.registry, "Class registry for a new store");
    in->add_flag("--strict", ingest.strict, "Fail on any rejected file or annotation issue");

    SplitOpts split;
    std::uint64_t split_seed = 0;
    auto* sp = app.add_subcommand("split", "Assign store images to train, val and test");
    sp->add_option("--store", split.store, "Store directory")->required();
    sp->add_option("--counts", split.counts, "train,val,test image counts")->capture_default_str();
    auto* seed_opt = sp->add_option("--seed", split_seed, "Shuffle seed")->required();

    LabelsOpts labels;
    auto* lb = app.add_subcommand("labels", "Rasterize annotations and export detector training labels");
    lb->add_option("--store", labels.store, "Store directory")->required();
    lb->add_option("--out", labels.out, "Dataset output directory")->required();
    lb->add_option("--side", labels.side, "Model input side")->capture_default_str();
    lb->add_option("--split", labels.split, "all, train, val or test")->capture_default_str();
    lb->add_option("--jobs", labels.jobs, "Worker threads (0: runtime default)")->capture_default_str();

    PredictOpts predict;
    std::uint64_t predict_seed = 0;
    auto* pr = app.add_subcommand("predict", "Run the detect-then-segment pipeline over store images");
    pr->add_option("--store", predict.store, "Store directory")->required();
    pr->add_option("--out", predict.out, "Prediction output directory")->required();
    pr->add_option("--backend", predict.backend, "stub or model")->capture_default_str();
    pr->add_option("--side", predict.side, "Model input side")->capture_default_str();
    auto* pseed = pr->add_option("--seed", predict_seed, "Seed for stochastic stub corruption");
    pr->add_option("--drop", predict.drop, "Comma-separated class codes the stub never detects");
    pr->add_option("--drop-landmarks", predict.drop_landmarks, "Drop this many seeded random landmark classes");
    pr->add_option("--jitter", predict.jitter, "Stub box-center jitter sigma, model pixels");
    pr->add_option("--scale-jitter", predict.scale_jitter, "Stub log box-size jitter sigma");
    pr->add_option("--morphology", predict.morphology, "Stub mask dilation (>0) or erosion (<0) steps");
    pr->add_option("--confidence-penalty", predict.confidence_penalty, "Stub confidence loss per corruption")->capture_default_str();
    pr->add_option("--confidence-threshold", predict.confidence_threshold, "Minimum detection confidence")->capture_default_str();
    pr->add_option("--mask-threshold", predict.mask_threshold, "Mask probability threshold")->capture_default_str();
    pr->add_flag("--refine", predict.refine, "Landmarks from mask centroids instead of box centers");
    pr->add_option("--detector", predict.detector, "Detector ONNX file (model backend)");
    pr->add_option("--segmenter", predict.segmenter, "Segmenter ONNX file (model backend)");
    pr->add_option("--split", predict.split, "all, train, val or test")->capture_default_str();
    pr->add_option("--jobs", predict.jobs, "Worker threads (0: runtime default)")->capture_default_str();

    EvaluateOpts ev;
    auto* e = app.add_subcommand("evaluate", "Score predictions against the store ground truth");
    e->add_option("predictions", ev.predictions, "Prediction directory")->required();
    e->add_option("ground-truth", ev.truth, "Store directory")->required();
    e->add_option("--out", ev.out, "Report directory (report.json, report.csv, report.md)")->required();
    e->add_option("--std", ev.std_mode, "population or sample")->capture_default_str();
    e->add_option("--acceptability", ev.acceptability, "Acceptable landmark error, mm")->capture_default_str();

    ReportOpts rep;
    auto* r = app.add_subcommand("report", "Verify a stored report and render it");
    r->add_option("report", rep.input, "report.json")->required();
    r->add_option("--format", rep.format, "md, csv or json")->capture_default_str();

    ServeOpts serve;
    int serve_port = 0, serve_threads = 0;
    auto* sv = app.add_subcommand("serve", "Start the review service");
    sv->add_option("--config", serve.config, "Service config JSON");
    auto* port_opt = sv->add_option("--port", serve_port, "Port (0: ephemeral)");
    sv->add_option("--host", serve.host, "Bind address");
    sv->add_option("--data-root", serve.data_root, "Store directory");
    sv->add_option("--registry", serve.registry, "Registry override");
    sv->add_option("--pool", serve.pool, "Training pool directory");
    sv->add_option("--token", serve.token, "Required X-Radmark-Token value");
    auto* threads_opt = sv->add_option("--threads", serve_threads, "HTTP worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& h) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& h) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << "radmark 0.1.0\n";
        return 0;
    } catch (const CLI::ParseError& pe) {
        print_error(err, "configuration", pe.what(), 1);
        return 1;
    }

    try {
        if (*s) return cmd_synth(synth, out);
        if (*in) return cmd_ingest(ingest, out);
        if (*sp) {
            if (*seed_opt) split.seed = split_seed;
            return cmd_split(split, out);
        }
        if (*lb) return cmd_labels(labels, out);
        if (*pr) {
            if (*pseed) predict.seed = predict_seed;
            return cmd_predict(predict, out);
        }
        if (*e) return cmd_evaluate(ev, out);
        if (*r) return cmd_report(rep, out);
        if (*sv) {
            if (*port_opt) serve.port = serve_port;
            if (*threads_opt) serve.threads = serve_threads;
            return cmd_serve(serve, out);
        }
    } catch (const Error& ex) {
        const int code = exit_code_for(ex.kind());
        print_error(err, to_string(ex.kind()), ex.what(), code);
        return code;
    } catch (const std::exception& ex) {
        print_error(err, "internal", ex.what(), 2);
        return 2;
    }
    return 0;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"radmark"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace radmark::cli
