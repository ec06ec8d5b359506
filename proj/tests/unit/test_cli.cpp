#include "radmark/cli/app.hpp"
#include "radmark/eval/report.hpp"
#include "radmark/io/files.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

using namespace radmark;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result radmark_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_text_file(e.path());
    return out;
}

// synth -> ingest under root; returns the store path.
fs::path make_store(const fs::path& root, int n, int side = 256) {
    const auto s = std::to_string(side);
    REQUIRE(radmark_cli({"synth", "--n", std::to_string(n), "--seed", "7", "--out", (root / "raw").string(), "--width", s,
                         "--height", s})
                .code == 0);
    REQUIRE(radmark_cli({"ingest", (root / "raw" / "dicom").string(), (root / "raw" / "annotations").string(), "--store",
                         (root / "store").string()})
                .code == 0);
    return root / "store";
}

} // namespace

TEST_CASE("identity chain: synth, labels, stub predict, evaluate") {
    testing::TempDir d;
    const auto store = make_store(d.path(), 3);
    CHECK(radmark_cli({"labels", "--store", store.string(), "--out", (d / "ds").string(), "--side", "256"}).code == 0);
    CHECK(fs::exists(d / "ds" / "dataset.yaml"));
    CHECK(fs::exists(d / "ds" / "labels" / "unassigned" / "synth_0001.txt"));
    CHECK(radmark_cli({"predict", "--backend", "stub", "--store", store.string(), "--out", (d / "pred").string(), "--side",
                       "256"})
              .code == 0);
    CHECK(fs::exists(d / "pred" / "synth_0003.json"));
    CHECK(fs::exists(d / "pred" / "predictions.csv"));
    CHECK_FALSE(fs::exists(d / "pred" / "failures.json"));
    const auto r = radmark_cli({"evaluate", (d / "pred").string(), store.string(), "--out", (d / "rep").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("Landmark error, mean: 0.00 mm") != std::string::npos);
    CHECK(r.out.find("Mask IoU, mean: 1.00") != std::string::npos);
    for (const char* f : {"report.json", "report.csv", "report.md"}) CHECK(fs::exists(d / "rep" / f));
    const auto rep = report_from_json(json::parse(read_text_file(d / "rep" / "report.json")));
    CHECK(summarize(rep).landmark_identified == 3 * 72);

    const auto again = radmark_cli({"report", (d / "rep" / "report.json").string(), "--format", "md"});
    CHECK(again.code == 0);
    CHECK(again.out == read_text_file(d / "rep" / "report.md"));
}

TEST_CASE("fixed seeds give byte-identical outputs for every step") {
    testing::TempDir d;
    for (const char* run : {"a", "b"}) {
        const auto root = d / run;
        const auto store = make_store(root, 2, 128);
        REQUIRE(radmark_cli({"split", "--store", store.string(), "--counts", "1,0,1", "--seed", "4"}).code == 0);
        REQUIRE(radmark_cli({"labels", "--store", store.string(), "--out", (root / "ds").string(), "--side", "128",
                             "--jobs", run == std::string("a") ? "1" : "3"})
                    .code == 0);
        REQUIRE(radmark_cli({"predict", "--store", store.string(), "--out", (root / "pred").string(), "--side", "128",
                             "--jitter", "2", "--scale-jitter", "0.1", "--morphology", "1", "--seed", "11", "--jobs",
                             run == std::string("a") ? "1" : "4"})
                    .code == 0);
        REQUIRE(radmark_cli({"evaluate", (root / "pred").string(), store.string(), "--out", (root / "rep").string()}).code == 0);
    }
    const auto a = read_tree(d / "a"), b = read_tree(d / "b");
    CHECK(a.size() == b.size());
    for (const auto& [path, bytes] : a) {
        CAPTURE(path);
        CHECK(b.count(path));
        if (b.count(path)) CHECK(b.at(path) == bytes);
    }
}

TEST_CASE("split count mismatch is a configuration error") {
    testing::TempDir d;
    const auto store = make_store(d.path(), 99, 64);
    const auto r = radmark_cli({"split", "--store", store.string(), "--counts", "80,5,15", "--seed", "1"});
    CHECK(r.code == 1);
    const auto err = json::parse(r.err);
    CHECK(err["error"] == "configuration");
    CHECK(err["exit_code"] == 1);
    CHECK_FALSE(fs::exists(store / "split.txt"));
    CHECK(radmark_cli({"split", "--store", store.string(), "--counts", "79,5,15", "--seed", "1"}).code == 0);
    CHECK(fs::exists(store / "split.txt"));
    CHECK(radmark_cli({"split", "--store", store.string(), "--counts", "79,5,15"}).code == 1);
}

TEST_CASE("dropping five landmark classes prints 93 percent identification") {
    testing::TempDir d;
    const auto store = make_store(d.path(), 1);
    REQUIRE(radmark_cli({"predict", "--store", store.string(), "--out", (d / "pred").string(), "--side", "256",
                         "--drop-landmarks", "5", "--seed", "2"})
                .code == 0);
    const auto r = radmark_cli({"evaluate", (d / "pred").string(), store.string(), "--out", (d / "rep").string()});
    CHECK(r.out.find("Landmarks identified: 93% (67/72)") != std::string::npos);
}

TEST_CASE("exit codes and machine-readable errors") {
    testing::TempDir d;
    CHECK(radmark_cli({"--help"}).code == 0);
    CHECK(radmark_cli({"predict", "--help"}).out.find("--backend") != std::string::npos);
    auto r = radmark_cli({"bogus"});
    CHECK(r.code == 1);
    CHECK(json::parse(r.err)["error"] == "configuration");
    CHECK(radmark_cli({}).code == 1);

    const auto store = make_store(d.path(), 1, 64);
    r = radmark_cli({"predict", "--store", store.string(), "--out", (d / "p").string(), "--backend", "model", "--detector",
                     (d / "missing.onnx").string()});
    CHECK(r.code == 3);
    CHECK(json::parse(r.err)["error"] == "backend");
    r = radmark_cli({"predict", "--store", store.string(), "--out", (d / "p").string(), "--jitter", "1"});
    CHECK(r.code == 1);
    r = radmark_cli({"predict", "--store", store.string(), "--out", (d / "p").string(), "--drop", "NOPE"});
    CHECK(r.code == 1);
    r = radmark_cli({"evaluate", (d / "nowhere").string(), store.string(), "--out", (d / "r").string()});
    CHECK(r.code == 1);
    r = radmark_cli({"labels", "--store", (d / "nostore").string(), "--out", (d / "x").string()});
    CHECK(r.code == 1);
    r = radmark_cli({"serve"});
    CHECK(r.code == 1);

    // A tampered report fails verification.
    REQUIRE(radmark_cli({"predict", "--store", store.string(), "--out", (d / "p").string(), "--side", "64"}).code == 0);
    REQUIRE(radmark_cli({"evaluate", (d / "p").string(), store.string(), "--out", (d / "r").string()}).code == 0);
    auto doc = json::parse(read_text_file(d / "r" / "report.json"));
    doc["summary"]["landmarks"]["identified"] = 1;
    write_text_file_atomic(d / "r" / "bad.json", doc.dump());
    CHECK(radmark_cli({"report", (d / "r" / "bad.json").string()}).code == 1);
}

TEST_CASE("ingest reports per-file problems and marks partial output") {
    testing::TempDir d;
    REQUIRE(radmark_cli({"synth", "--n", "3", "--out", (d / "raw").string(), "--width", "64", "--height", "64"}).code == 0);
    write_text_file_atomic(d / "raw" / "dicom" / "broken.dcm", "not a dicom file");
    fs::remove(d / "raw" / "annotations" / "synth_0002.json");
    write_text_file_atomic(d / "raw" / "annotations" / "orphan.json", "{}");
    auto ann = json::parse(read_text_file(d / "raw" / "annotations" / "synth_0003.json"));
    ann["landmarks"][0]["coordinates"] = {500, 500};
    write_text_file_atomic(d / "raw" / "annotations" / "synth_0003.json", ann.dump());

    const auto args = std::vector<std::string>{"ingest", (d / "raw" / "dicom").string(), (d / "raw" / "annotations").string(),
                                               "--store", (d / "store").string()};
    REQUIRE(radmark_cli(args).code == 0);
    const auto report = json::parse(read_text_file(d / "store" / "ingest_report.json"));
    CHECK(report["ingested"] == 3);
    CHECK(report["rejected"] == 1);
    CHECK(report["partial"] == true);
    CHECK(report["orphan_annotations"] == json::array({"orphan.json"}));
    std::map<std::string, json> by_id;
    for (const auto& f : report["files"]) by_id[f["image_id"]] = f;
    CHECK(by_id["broken"]["status"] == "rejected");
    CHECK(by_id["synth_0001"]["status"] == "ok");
    CHECK(by_id["synth_0002"]["status"] == "warning");
    CHECK(by_id["synth_0003"]["annotation_issues"][0]["reason"].get<std::string>().rfind("dropped:", 0) == 0);

    testing::TempDir d2;
    auto strict = args;
    strict[4] = (d2 / "store").string();
    strict.push_back("--strict");
    CHECK(radmark_cli(strict).code == 1);
}
