#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "helpers.hpp"

#include "ake/extractor.hpp"
#include "ake/synthetic.hpp"

using namespace ake;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result ake_run(std::vector<std::string> args) {
    args.insert(args.begin(), "ake");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct Workspace {
    test::TempDir dir;
    std::string p(const std::string& name) const { return (dir.path() / name).string(); }
    Workspace() {
        SyntheticOptions so;
        so.docs_per_category = 2;
        write_synthetic(generate_synthetic(so), dir.path());
    }
};

}  // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(ake_run({}).code == cli::kExitUsage);
    CHECK(ake_run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(ake_run({"train", "--bogus"}).code == cli::kExitUsage);
    CHECK(ake_run({"train", "--corpus", "x"}).code == cli::kExitUsage);
    CHECK(ake_run({"--help"}).code == cli::kExitOk);
    const auto help = ake_run({"extract", "--help"});
    CHECK(help.code == cli::kExitOk);
    CHECK(help.out.find("--model") != std::string::npos);
}

TEST_CASE("missing inputs exit with 2 and name the path") {
    test::TempDir dir;
    test::write_file(dir.path() / "story.txt", "Title\nBody text here.\n");
    const auto r = ake_run({"extract", "--model", "/nonexistent/m.model", "--in", (dir.path() / "story.txt").string()});
    CHECK(r.code == cli::kExitData);
    CHECK(r.err.find("/nonexistent/m.model") != std::string::npos);
    const auto g = ake_run({"aggregate", "--hits", "/nonexistent/h.jsonl", "--stories", "/nonexistent/c.jsonl", "--out",
                            (dir.path() / "g.jsonl").string()});
    CHECK(g.code == cli::kExitData);
}

TEST_CASE("bad option values are usage errors") {
    Workspace ws;
    CHECK(ake_run({"train", "--corpus", ws.p("corpus.jsonl"), "--gold", ws.p("gold.jsonl"), "--out", ws.p("m"), "--mask",
                   "ss,zz"})
              .code == cli::kExitUsage);
    CHECK(ake_run({"train", "--corpus", ws.p("corpus.jsonl"), "--gold", ws.p("gold.jsonl"), "--out", ws.p("m"),
                   "--split", "nonsense"})
              .code == cli::kExitUsage);
    CHECK(ake_run({"train", "--corpus", ws.p("corpus.jsonl"), "--gold", ws.p("gold.jsonl"), "--out", ws.p("m"),
                   "--filter-fraction", "1.5"})
              .code == cli::kExitUsage);
}

TEST_CASE("aggregate, build-lm, train, extract, eval and ablate end to end") {
    Workspace ws;
    const auto agg = ake_run({"aggregate", "--hits", ws.p("hits.jsonl"), "--stories", ws.p("corpus.jsonl"), "--out",
                              ws.p("gold2.jsonl"), "--rejected", ws.p("rejected.jsonl")});
    REQUIRE_MESSAGE(agg.code == 0, agg.err);
    CHECK(test::read_file(ws.p("gold2.jsonl")) == test::read_file(ws.p("gold.jsonl")));

    const auto lm = ake_run({"build-lm", "--text", ws.p("lm.txt"), "--out", ws.p("lm.bin")});
    REQUIRE_MESSAGE(lm.code == 0, lm.err);
    CHECK(lm.out.find("bits/key") != std::string::npos);

    const auto train = ake_run({"train", "--corpus", ws.p("corpus.jsonl"), "--gold", ws.p("gold.jsonl"), "--lm",
                                ws.p("lm.bin"), "--bags", "3", "--split", "14/6", "--out", ws.p("m.model")});
    REQUIRE_MESSAGE(train.code == 0, train.err);
    CHECK_NOTHROW(KeyphraseModel::load(ws.p("m.model")));

    test::write_file(ws.p("story.txt"),
                     "Council passes budget\nThe city council approved the budget on Monday. The mayor praised it.\n");
    const auto ex = ake_run({"extract", "--model", ws.p("m.model"), "--lm", ws.p("lm.bin"), "--in", ws.p("story.txt"),
                             "--k", "3"});
    REQUIRE_MESSAGE(ex.code == 0, ex.err);
    std::istringstream lines(ex.out);
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        ++n;
        CHECK(line.rfind(std::to_string(n) + "\t", 0) == 0);
    }
    CHECK(n == 3);

    const auto exj = ake_run({"extract", "--model", ws.p("m.model"), "--in", ws.p("corpus.jsonl"), "--json", "--k", "2"});
    REQUIRE_MESSAGE(exj.code == 0, exj.err);
    CHECK(exj.err.find("warning") != std::string::npos);
    std::istringstream jl(exj.out);
    std::getline(jl, line);
    CHECK(nlohmann::json::parse(line)["phrases"].size() == 2);

    const auto ev = ake_run({"eval", "--model", ws.p("m.model"), "--lm", ws.p("lm.bin"), "--corpus",
                             ws.p("corpus.jsonl"), "--gold", ws.p("gold.jsonl"), "--split", "14/6", "--json", ws.p("eval.json"),
                             "--hits", ws.p("hits.jsonl")});
    REQUIRE_MESSAGE(ev.code == 0, ev.err);
    CHECK(ev.out.find("human baseline nDCG@10") != std::string::npos);
    const auto evj = nlohmann::json::parse(test::read_file(ws.p("eval.json")));
    CHECK(evj["stories_evaluated"] == 6);
    CHECK(evj["macro_ndcg"].get<double>() >= 0.0);
    CHECK(evj.contains("human_baseline_ndcg"));

    const auto ab = ake_run({"ablate", "--corpus", ws.p("corpus.jsonl"), "--gold", ws.p("gold.jsonl"), "--conditions",
                             "baseline;baseline+ss", "--split", "14/6", "--bags", "2"});
    REQUIRE_MESSAGE(ab.code == 0, ab.err);
    CHECK(ab.out.find("Baseline + SS") != std::string::npos);
}
