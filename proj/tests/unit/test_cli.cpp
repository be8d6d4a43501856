#include "calib/cli.hpp"
#include "calib/data.hpp"
#include "support.hpp"

#include <doctest.h>

#include <sstream>

using calib::testing::read_text;
using calib::testing::TempDir;
using calib::testing::write_text;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = calib::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string p(const TempDir& d, const char* name) { return (d / name).string(); }

}  // namespace

TEST_CASE("simulate, fit, apply, eval pipeline") {
    TempDir d("cli");
    REQUIRE(run({"simulate", "oracle", "--curve", "square", "--n", "3000", "--seed", "4", "--out", p(d, "o.csv")}).code == 0);
    REQUIRE(run({"fit", "--method", "histogram", "--in", p(d, "o.csv"), "--out", p(d, "h.json")}).code == 0);
    REQUIRE(run({"apply", "--model", p(d, "h.json"), "--in", p(d, "o.csv"), "--out", p(d, "c.csv")}).code == 0);
    const auto table = read_text(d / "c.csv");
    CHECK(table.rfind("score,label,calibrated\n", 0) == 0);

    const auto e = run({"eval", "--in", p(d, "c.csv"), "--reliability-out", p(d, "r.csv"), "--report-out",
                        p(d, "m.csv")});
    CHECK(e.code == 0);
    for (const char* row : {"RMSE", "AUC", "ACC", "MCE", "ECE", "AUC_Loss"}) CHECK(e.out.find(row) != std::string::npos);
    CHECK(read_text(d / "m.csv").rfind("measure,raw,calibrated\n", 0) == 0);

    const auto e2 = run({"eval", "--in", p(d, "o.csv"), "--model", p(d, "h.json")});
    CHECK(e2.code == 0);
    CHECK(e2.out == e.out);
}

TEST_CASE("eval of perfectly calibrated predictions") {
    TempDir d("cli");
    write_text(d / "p.csv", "score,label\n0,0\n1,1\n0,0\n1,1\n");
    const auto e = run({"eval", "--in", p(d, "p.csv"), "--report-out", p(d, "m.csv")});
    CHECK(e.code == 0);
    const auto report = read_text(d / "m.csv");
    CHECK(report.find("MCE,0\n") != std::string::npos);
    CHECK(report.find("ECE,0\n") != std::string::npos);
}

TEST_CASE("exit codes") {
    TempDir d("cli");
    write_text(d / "one.csv", "score,label\n0.2,1\n0.4,1\n0.9,1\n");
    write_text(d / "bad.csv", "score,label\n0.2,1\n1.4,0\n");
    CHECK(run({"fit", "--method", "platt", "--in", p(d, "one.csv"), "--out", p(d, "m.json")}).code == 3);
    const auto bad = run({"fit", "--method", "platt", "--in", p(d, "bad.csv"), "--out", p(d, "m.json")});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("row 2") != std::string::npos);
    CHECK(run({"fit", "--method", "svm", "--in", p(d, "one.csv"), "--out", p(d, "m.json")}).code == 2);
    CHECK(run({"fit", "--in", p(d, "one.csv")}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"fit", "-m", "platt"}).code == 2);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"verify", "mce-bound", "--trials", "10"}).code == 2);
}

TEST_CASE("verify prints the closed-form bound and writes reports") {
    TempDir d("cli");
    const auto r = run({"verify", "mce-bound", "--trials", "50", "--test-size", "2000", "--seed", "3", "--out-csv",
                        p(d, "r.csv"), "--out-json", p(d, "r.json")});
    CHECK(r.code == 0);
    CHECK(r.out.find("bound 0.3462") != std::string::npos);
    CHECK(read_text(d / "r.json").find("\"assertion\": \"pass\"") != std::string::npos);
}

TEST_CASE("simulate scored writes train and test files") {
    TempDir d("cli");
    const auto r = run({"simulate", "scored", "--learner", "quadratic", "--n-train", "400", "--n-test", "300",
                        "--seed", "2", "--out-train", p(d, "tr.csv"), "--out-test", p(d, "te.csv"),
                        "--out-features-train", p(d, "ftr.csv")});
    CHECK(r.code == 0);
    CHECK(calib::load_scored_csv(d / "tr.csv").size() == 400);
    CHECK(calib::load_scored_csv(d / "te.csv").size() == 300);
    CHECK(calib::load_feature_csv(d / "ftr.csv").size() == 400);
    CHECK(run({"simulate", "xor", "--n", "40", "--out", p(d, "x.csv")}).code == 0);
}

TEST_CASE("reruns are byte-identical") {
    TempDir a("cli"), b("cli");
    for (const TempDir* d : {&a, &b}) {
        REQUIRE(run({"simulate", "oracle", "--n", "800", "--seed", "9", "--out", p(*d, "o.csv")}).code == 0);
        REQUIRE(run({"fit", "--method", "dpm", "--max-iter", "50", "--seed", "1", "--in", p(*d, "o.csv"), "--out",
                     p(*d, "m.json")}).code == 0);
        REQUIRE(run({"apply", "--model", p(*d, "m.json"), "--in", p(*d, "o.csv"), "--out", p(*d, "c.csv")}).code == 0);
    }
    for (const char* f : {"o.csv", "m.json", "c.csv"}) CHECK(read_text(a / f) == read_text(b / f));
}
