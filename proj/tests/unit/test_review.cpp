#include "oracles/oracles.hpp"
#include "radmark/error.hpp"
#include "radmark/infer/stub.hpp"
#include "radmark/io/files.hpp"
#include "radmark/io/png.hpp"
#include "radmark/labels/export.hpp"
#include "radmark/pipeline/pipeline.hpp"
#include "radmark/review/service.hpp"
#include "radmark/synth/synth.hpp"
#include "support/helpers.hpp"

#include <doctest.h>
#include <httplib.h>

#include <csignal>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

using namespace radmark;
using nlohmann::json;

namespace {

constexpr int side = 256;

// Data root with synthetic images and stub predictions; `drop` classes are
// predicted missing.
struct Fixture {
    testing::TempDir dir;
    ClassRegistry reg = testing::pelvis_registry();
    std::vector<SynthCase> cases;

    explicit Fixture(int n = 2, std::set<std::string> drop = {}) {
        auto data = DataStore::create(dir.path(), reg);
        SynthConfig syn;
        syn.width = side;
        syn.height = side;
        StubConfig sc;
        sc.input_side = side;
        for (const auto& code : drop) sc.drop.insert(reg.require(code));
        StubBackend stub(sc);
        PipelineConfig pc;
        std::filesystem::create_directories(dir.path() / "predictions");
        for (int i = 0; i < n; ++i) {
            cases.push_back(synth_case(syn, reg, i));
            const auto& c = cases.back();
            data.add(c.record, &c.truth);
            stub.attach(c.record.id(), make_stub_truth(c.truth, reg, side, side, c.record.spacing(), side));
            save_predictions(dir.path() / "predictions" / (c.record.id() + ".json"), run_pipeline(c.record, stub, reg, pc),
                             reg);
        }
        data.save_index();
    }

    ServiceConfig config() const {
        ServiceConfig c;
        c.data_root = dir.path();
        c.model_side = side;
        c.port = 0;
        return c;
    }

    std::string id(int i = 0) const { return cases.at(static_cast<std::size_t>(i)).record.id(); }
};

json accept_all_except(const ClassRegistry& reg, const PredictionSet& p, std::set<std::string> skip) {
    auto arr = json::array();
    for (const auto& c : reg.classes()) {
        if (skip.count(c.code)) continue;
        const bool predicted = p.landmarks.count(c.id) || p.masks.count(c.id);
        arr.push_back({{"code", c.code}, {"kind", predicted ? "accepted" : "marked_missing"}});
    }
    return arr;
}

std::string body(int base, const json& corrections, const std::string& reviewer = "rv") {
    return json{{"base_revision", base}, {"reviewer", reviewer}, {"corrections", corrections}}.dump();
}

std::string finalize_body(int base) { return json{{"base_revision", base}, {"reviewer", "rv"}}.dump(); }

PredictionSet prediction_of(ReviewService& s, const std::string& id) {
    return predictions_from_json(s.predictions(id).json(), s.registry());
}

std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).generic_string()] = read_text_file(e.path());
    return out;
}

// Curates image `id` with A01_r moved by (dx, dy); returns the moved point.
PointPx curate_with_move(ReviewService& s, const std::string& id, double dx, double dy) {
    const auto p = prediction_of(s, id);
    const auto a01 = s.registry().require("A01_r");
    const auto orig = p.landmarks.at(a01).point;
    const PointPx moved{orig.x + dx, orig.y + dy, Frame::original};
    auto batch = accept_all_except(s.registry(), p, {"A01_r"});
    batch.push_back({{"code", "A01_r"}, {"kind", "moved"}, {"geometry", {{"type", "point"}, {"coordinates", {moved.x, moved.y}}}}});
    REQUIRE(s.post_corrections(id, body(0, batch)).status == 200);
    REQUIRE(s.finalize(id, finalize_body(1)).status == 200);
    return moved;
}

} // namespace

TEST_CASE("listing, rendering and predictions") {
    Fixture f(3);
    ReviewService s(f.config());
    auto page = s.list_images(1, 2).json();
    CHECK(page["total"] == 3);
    REQUIRE(page["images"].size() == 2);
    CHECK(page["images"][0]["image_id"] == f.id(0));
    CHECK(page["images"][0]["status"] == "pending");
    CHECK(page["images"][0]["has_predictions"] == true);
    CHECK(s.list_images(2, 2).json()["images"].size() == 1);
    CHECK(s.list_images(9, 2).json()["images"].empty());
    CHECK(s.list_images(0, 2).status == 400);
    CHECK(s.list_images(1, 100000).status == 400);

    const auto png = s.render(f.id(1), "original");
    CHECK(png.status == 200);
    CHECK(png.content_type == "image/png");
    const auto img = decode_png_gray8(std::vector<std::uint8_t>(png.body.begin(), png.body.end()));
    CHECK(img.width == side);
    CHECK(img.pixels == render_original(f.cases[1].record));
    CHECK(s.render(f.id(1), "model").status == 200);
    CHECK(s.render(f.id(1), "thumbnail").status == 400);
    CHECK(s.render("nope", "original").status == 404);

    CHECK(s.predictions(f.id(0)).status == 200);
    CHECK(s.predictions("nope").status == 404);
    const auto rec = s.record(f.id(0)).json();
    CHECK(rec["revision"] == 0);
    CHECK(rec["status"] == "pending");
    CHECK(rec["unresolved"].size() == f.reg.size());
    CHECK(s.get_registry().json()["classes"].size() == f.reg.size());
}

TEST_CASE("finalize with one unresolved class names it") {
    Fixture f(1);
    ReviewService s(f.config());
    const auto p = prediction_of(s, f.id());
    REQUIRE(s.post_corrections(f.id(), body(0, accept_all_except(f.reg, p, {"A01_r"}))).status == 200);
    const auto r = s.finalize(f.id(), finalize_body(1));
    CHECK(r.status == 422);
    CHECK(r.json()["unresolved"] == json::array({"A01_r"}));
    CHECK(s.store().latest(f.id())->status == ReviewStatus::in_review);
    CHECK(s.store().revisions(f.id()) == std::vector<int>{1});
}

TEST_CASE("moved landmark is exported exactly and its disk is regenerated there") {
    Fixture f(2);
    ReviewService s(f.config());
    const auto moved = curate_with_move(s, f.id(1), 2, -3);
    const auto manifest = s.export_training_pool().json();
    REQUIRE(manifest["records"].size() == 1);
    CHECK(manifest["records"][0]["image_id"] == f.id(1));
    CHECK(manifest["records"][0]["split"] == "train");

    const auto pool = s.pool_dir();
    const auto loaded = load_annotations(pool / "annotations" / (f.id(1) + ".json"), f.reg);
    CHECK(loaded.rejected.empty());
    CHECK(loaded.invalid.empty());
    const auto a01 = f.reg.require("A01_r");
    CHECK(loaded.set.landmarks.at(a01) == moved);
    CHECK(loaded.set == curated_annotations(*s.store().latest(f.id(1)), f.reg));

    // Oracle disk at the moved point on the identity letterbox.
    const double mm = f.cases[1].record.spacing()->col_mm;
    const auto disk = oracle::disk(side, side, {moved.x, moved.y}, f.reg.at(a01).radius_mm, mm, mm);
    int x0 = side, y0 = side, x1 = 0, y1 = 0;
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
            if (disk[static_cast<std::size_t>(y) * side + x]) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x + 1);
                y1 = std::max(y1, y + 1);
            }
    const auto labels = parse_box_labels(read_text_file(pool / "labels" / "train" / (f.id(1) + ".txt")));
    bool found = false;
    for (const auto& l : labels) {
        if (l.class_index != index_of(a01)) continue;
        found = true;
        CHECK(l.cx * side == doctest::Approx((x0 + x1) / 2.0).epsilon(1e-5));
        CHECK(l.cy * side == doctest::Approx((y0 + y1) / 2.0).epsilon(1e-5));
        CHECK(l.w * side == doctest::Approx(x1 - x0).epsilon(1e-5));
        CHECK(l.h * side == doctest::Approx(y1 - y0).epsilon(1e-5));
    }
    CHECK(found);
    CHECK(std::filesystem::exists(pool / "images" / "train" / (f.id(1) + ".png")));
    CHECK(std::filesystem::exists(pool / "dataset.yaml"));
}

TEST_CASE("export of zero curated records is an empty manifest") {
    Fixture f(1);
    ReviewService s(f.config());
    const auto r = s.export_training_pool();
    CHECK(r.status == 200);
    CHECK(r.json()["records"].empty());
    CHECK(r.json()["files"].empty());
    CHECK(std::filesystem::exists(s.pool_dir() / "manifest.json"));
}

TEST_CASE("exporting twice without new curation is byte-identical") {
    Fixture f(3, {"P02", "O08"});
    ReviewService s(f.config());
    curate_with_move(s, f.id(0), 1.25, 0.5);
    curate_with_move(s, f.id(2), -4, 2);
    REQUIRE(s.export_training_pool().status == 200);
    const auto first = read_tree(s.pool_dir());
    s.clock = [] { return std::string("2030-01-01T00:00:00Z"); };
    REQUIRE(s.export_training_pool().status == 200);
    CHECK(read_tree(s.pool_dir()) == first);
    CHECK(first.count("manifest.json"));
    // A restarted service exports the same bytes.
    ReviewService again(f.config());
    REQUIRE(again.export_training_pool().status == 200);
    CHECK(read_tree(again.pool_dir()) == first);
}

TEST_CASE("revisions are append-only and each is recoverable") {
    Fixture f(1);
    ReviewService s(f.config());
    const auto p = prediction_of(s, f.id());
    const json first = json::array({{{"code", "A01_r"}, {"kind", "accepted"}}});
    const json second = json::array({{{"code", "A01_l"}, {"kind", "marked_missing"}}});
    CHECK(s.post_corrections(f.id(), body(0, first)).json()["revision"] == 1);
    CHECK(s.post_corrections(f.id(), body(1, second)).json()["revision"] == 2);
    CHECK(s.store().revisions(f.id()) == std::vector<int>{1, 2});
    const auto r1 = s.store().load_revision(f.id(), 1);
    const auto r2 = s.store().load_revision(f.id(), 2);
    CHECK(r1.corrections.size() == 1);
    CHECK(r2.corrections.size() == 2);
    CHECK(r2.corrections.at(f.reg.require("A01_l")).kind == CorrectionKind::marked_missing);
    CHECK(s.revision(f.id(), 1).json()["revision"] == 1);
    CHECK(s.revision(f.id(), 7).status == 404);

    // Every curated value is reachable from disk alone.
    ReviewService restarted(f.config());
    CHECK(record_to_json(*restarted.store().latest(f.id()), f.reg) == record_to_json(r2, f.reg));
}

TEST_CASE("stale revisions conflict and replays are idempotent") {
    Fixture f(1);
    ReviewService s(f.config());
    const json batch = json::array({{{"code", "A01_r"}, {"kind", "accepted"}}});
    CHECK(s.post_corrections(f.id(), body(0, batch)).status == 200);
    const auto replay = s.post_corrections(f.id(), body(0, batch));
    CHECK(replay.status == 200);
    CHECK(replay.json()["replayed"] == true);
    CHECK(replay.json()["revision"] == 1);
    CHECK(s.store().revisions(f.id()) == std::vector<int>{1});

    const json other = json::array({{{"code", "A02_r"}, {"kind", "accepted"}}});
    const auto stale = s.post_corrections(f.id(), body(0, other));
    CHECK(stale.status == 409);
    CHECK(stale.json()["current_revision"] == 1);
    CHECK(s.post_corrections(f.id(), body(5, other)).status == 409);
    CHECK(s.finalize(f.id(), finalize_body(0)).status == 409);
}

TEST_CASE("concurrent writers on one image: one wins, the rest conflict") {
    Fixture f(1);
    ReviewService s(f.config());
    const auto& reg = f.reg;
    std::vector<int> status(8, 0);
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&, t] {
            const json b = json::array({{{"code", reg.classes()[static_cast<std::size_t>(t)].code}, {"kind", "accepted"}}});
            status[static_cast<std::size_t>(t)] = s.post_corrections(f.id(), body(0, b)).status;
        });
    }
    for (auto& th : threads) th.join();
    CHECK(std::count(status.begin(), status.end(), 200) == 1);
    CHECK(std::count(status.begin(), status.end(), 409) == 7);
    CHECK(s.store().revisions(f.id()) == std::vector<int>{1});
}

TEST_CASE("invalid correction geometry is rejected with per-field reasons") {
    Fixture f(1, {"P02"});
    ReviewService s(f.config());
    auto issues = [&](const json& batch) {
        const auto r = s.post_corrections(f.id(), body(0, batch));
        CHECK(r.status == 422);
        return r.json()["issues"];
    };
    auto pt = [](double x, double y) { return json{{"type", "point"}, {"coordinates", {x, y}}}; };

    auto i = issues(json::array({{{"code", "A01_r"}, {"kind", "moved"}, {"geometry", pt(side + 1, 3)}}}));
    CHECK(i[0]["field"] == "geometry.coordinates");
    CHECK(i[0]["code"] == "A01_r");
    i = issues(json::array({{{"code", "Z99"}, {"kind", "accepted"}}}));
    CHECK(i[0]["field"] == "code");
    i = issues(json::array({{{"code", "A01_r"}, {"kind", "teleported"}}}));
    CHECK(i[0]["field"] == "kind");
    i = issues(json::array({{{"code", "A01_r"}, {"kind", "moved"}}}));
    CHECK(i[0]["field"] == "geometry");
    i = issues(json::array({{{"code", "P01_r"}, {"kind", "moved"}, {"geometry", pt(3, 3)}}}));
    CHECK(i[0]["field"] == "kind");
    i = issues(json::array({{{"code", "P01_r"},
                             {"kind", "mask_replaced"},
                             {"geometry", {{"type", "mask"}, {"width", 3}, {"height", 3}, {"rle", {9}}}}}}));
    CHECK(i[0]["field"] == "geometry");
    i = issues(json::array({{{"code", "P02"}, {"kind", "accepted"}}}));
    CHECK(i[0]["field"] == "kind");
    i = issues(json::array({{{"code", "P02"}, {"kind", "added"}, {"geometry", {{"type", "polygon"}, {"coordinates", {{1, 1}, {2, 2}}}}}}}));
    CHECK(i[0]["field"] == "geometry.coordinates");
    i = issues(json::array({{{"code", "A01_r"}, {"kind", "accepted"}}, {{"code", "A01_r"}, {"kind", "marked_missing"}}}));
    CHECK(i[0]["index"] == 1);
    CHECK(issues(json::array()).size() == 1);
    CHECK(s.store().revisions(f.id()).empty());

    CHECK(s.post_corrections(f.id(), "{not json").status == 400);
    CHECK(s.post_corrections(f.id(), json{{"corrections", json::array()}}.dump()).status == 400);
    CHECK(s.post_corrections("ghost", body(0, json::array())).status == 404);
    CHECK(s.finalize("ghost", finalize_body(0)).status == 404);
}

TEST_CASE("added geometry fills a missing class and reopening resets curation") {
    Fixture f(1, {"P02"});
    ReviewService s(f.config());
    const auto p = prediction_of(s, f.id());
    auto batch = accept_all_except(f.reg, p, {"P02"});
    const json square{{"type", "polygon"}, {"coordinates", {{100, 200}, {120, 200}, {120, 220}, {100, 220}}}};
    batch.push_back({{"code", "P02"}, {"kind", "added"}, {"geometry", square}});
    REQUIRE(s.post_corrections(f.id(), body(0, batch)).status == 200);
    REQUIRE(s.finalize(f.id(), finalize_body(1)).json()["status"] == "curated");
    // Finalize replay returns the same revision.
    CHECK(s.finalize(f.id(), finalize_body(1)).json()["replayed"] == true);
    const auto curated = curated_annotations(*s.store().latest(f.id()), f.reg);
    CHECK(curated.patches.at(f.reg.require("P02")).vertices.size() == 4);

    const auto reopen = s.post_corrections(f.id(), body(2, json::array({{{"code", "A01_r"}, {"kind", "marked_missing"}}})));
    CHECK(reopen.json()["status"] == "in_review");
    CHECK(s.export_training_pool().json()["records"].empty());
}

TEST_CASE("kill between revision write and index update is recovered by rescan") {
    Fixture f(1);
    const auto cfg = f.config();
    const json first = json::array({{{"code", "A01_r"}, {"kind", "accepted"}}});
    const json second = json::array({{{"code", "A02_r"}, {"kind", "marked_missing"}}});
    {
        ReviewService s(cfg);
        REQUIRE(s.post_corrections(f.id(), body(0, first)).status == 200);
    }
    const pid_t pid = ::fork();
    REQUIRE(pid >= 0);
    if (pid == 0) {
        ReviewService s(cfg);
        s.store().after_revision_write = [] { ::raise(SIGKILL); };
        s.post_corrections(f.id(), body(1, second));
        ::_exit(0);
    }
    int wstatus = 0;
    ::waitpid(pid, &wstatus, 0);
    REQUIRE(WIFSIGNALED(wstatus));
    CHECK(WTERMSIG(wstatus) == SIGKILL);

    // The index still says revision 1; a torn temporary is left beside it.
    const auto index = json::parse(read_text_file(cfg.data_root / "review" / "index.json"));
    CHECK(index["images"][f.id()]["revision"] == 1);
    write_text_file_atomic(cfg.data_root / "review" / f.id() / "rev-000003.json.tmp", "{\"trunc");

    ReviewService s(cfg);
    CHECK(s.store().rescan_report().repaired == 1);
    CHECK(s.store().rescan_report().unreadable.empty());
    const auto latest = s.store().latest(f.id());
    REQUIRE(latest);
    CHECK(latest->revision == 2);
    CHECK(latest->corrections.at(f.reg.require("A02_r")).kind == CorrectionKind::marked_missing);
    CHECK(json::parse(read_text_file(cfg.data_root / "review" / "index.json"))["images"][f.id()]["revision"] == 2);
    // Work continues from the recovered revision.
    CHECK(s.post_corrections(f.id(), body(2, json::array({{{"code", "A02_l"}, {"kind", "accepted"}}}))).json()["revision"] == 3);
}

TEST_CASE("service configuration and environment overrides") {
    auto c = service_config_from_json(json{{"port", 9000}, {"data_root", "/data"}, {"token", "t"}});
    CHECK(c.port == 9000);
    CHECK(c.data_root == "/data");
    CHECK(*c.token == "t");
    CHECK_THROWS_AS(service_config_from_json(json{{"prot", 1}}), ConfigError);
    CHECK_THROWS_AS(service_config_from_json(json{{"port", "x"}}), ConfigError);
    CHECK_THROWS_AS(service_config_from_json(json{{"port", 70000}}), ConfigError);
    std::map<std::string, std::string> env{{"RADMARK_PORT", "8123"}, {"RADMARK_DATA_ROOT", "/other"},
                                           {"RADMARK_REGISTRY", "/r.json"}};
    apply_env_overrides(c, [&](const char* k) -> const char* {
        auto it = env.find(k);
        return it == env.end() ? nullptr : it->second.c_str();
    });
    CHECK(c.port == 8123);
    CHECK(c.data_root == "/other");
    CHECK(*c.registry == "/r.json");
    CHECK(*c.token == "t");
    env["RADMARK_PORT"] = "80x";
    CHECK_THROWS_AS(apply_env_overrides(c, [&](const char* k) -> const char* {
                        auto it = env.find(k);
                        return it == env.end() ? nullptr : it->second.c_str();
                    }),
                    ConfigError);

    testing::TempDir d;
    ServiceConfig empty_root;
    empty_root.data_root = d.path();
    CHECK_THROWS_AS(ReviewService{empty_root}, ConfigError);
}

TEST_CASE("HTTP binding enforces the token and routes under /api") {
    Fixture f(1);
    auto cfg = f.config();
    cfg.token = "sesame";
    ReviewService s(cfg);
    ReviewServer server(s);
    const int port = server.bind();
    std::thread t([&] { server.listen(); });
    httplib::Client cli("127.0.0.1", port);
    const httplib::Headers auth{{"X-Radmark-Token", "sesame"}};

    CHECK(cli.Get("/api/images")->status == 401);
    CHECK(cli.Get("/api/images", {{"X-Radmark-Token", "wrong"}})->status == 401);
    auto r = cli.Get("/api/images?page=1&page_size=5", auth);
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(json::parse(r->body)["images"][0]["image_id"] == f.id());
    r = cli.Get("/api/images/" + f.id() + "/render?frame=original", auth);
    CHECK(r->status == 200);
    CHECK(r->get_header_value("Content-Type") == "image/png");
    CHECK(cli.Get("/api/images/" + f.id() + "/predictions", auth)->status == 200);
    CHECK(cli.Get("/api/images/zzz/predictions", auth)->status == 404);
    r = cli.Post("/api/images/" + f.id() + "/corrections", auth,
                 body(0, json::array({{{"code", "A01_r"}, {"kind", "accepted"}}})), "application/json");
    CHECK(r->status == 200);
    CHECK(cli.Get("/api/images/" + f.id() + "/revisions/1", auth)->status == 200);
    r = cli.Post("/api/images/" + f.id() + "/finalize", auth, finalize_body(1), "application/json");
    CHECK(r->status == 422);
    CHECK(cli.Post("/api/export/training-pool", auth, "", "application/json")->status == 200);
    server.stop();
    t.join();
}
