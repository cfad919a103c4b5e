#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "httplib.h"

#include "ake/service.hpp"

using namespace ake;

namespace {

Corpus two_stories() {
    return {make_document("s1", "Council vote", "The council approved the budget. The mayor spoke.", Category::USPolitics),
            make_document("s2", "Storm", "Heavy rain hit the coast. Roads closed.", Category::Science)};
}

struct FakeClock {
    double now = 100.0;
    AnnotationService::Clock fn() {
        return [this] { return now; };
    }
};

nlohmann::json body_of(const ServiceResponse& r) { return nlohmann::json::parse(r.body); }

std::string submission(const std::string& worker, const std::string& selections) {
    return R"({"worker_id":")" + worker + R"(","selections":)" + selections + "}";
}

}  // namespace

TEST_CASE("next story hands out the least annotated story and reuses open sessions") {
    test::TempDir dir;
    FakeClock clock;
    AnnotationService svc(two_stories(), ServiceConfig{20, dir.path(), {}}, clock.fn());
    const auto a = svc.next_story("w1");
    REQUIRE(a.status == 200);
    const auto ja = body_of(a);
    CHECK(ja["story_id"] == "s1");
    CHECK(ja["sentences"].size() == 3);
    CHECK(ja["sentences"][0]["from_title"] == true);
    CHECK(ja["guidelines"].get<std::string>().find("20") != std::string::npos);
    CHECK(body_of(svc.next_story("w1"))["session_id"] == ja["session_id"]);

    clock.now += 75.0;
    const auto sub = svc.submit("s1", submission("w1", R"([{"sentence":1,"start_token":1,"end_token":2}])"));
    CHECK(sub.status == 201);
    CHECK(body_of(sub)["duration_seconds"] == doctest::Approx(75.0));
    CHECK(svc.annotation_count("s1") == 1);
    CHECK(body_of(svc.next_story("w1"))["story_id"] == "s2");
    CHECK(body_of(svc.next_story("w2"))["story_id"] == "s2");
    CHECK(svc.next_story("").status == 400);
}

TEST_CASE("submission errors map to status codes") {
    test::TempDir dir;
    FakeClock clock;
    AnnotationService svc(two_stories(), ServiceConfig{20, dir.path(), {}}, clock.fn());
    const std::string sel = R"([{"sentence":1,"start_token":0,"end_token":2}])";
    CHECK(svc.submit("s1", submission("w1", sel)).status == 409);
    svc.next_story("w1");
    CHECK(svc.submit("nope", submission("w1", sel)).status == 404);
    CHECK(svc.submit("s1", "{not json").status == 400);
    CHECK(svc.submit("s1", R"({"selections":[]})").status == 400);
    CHECK(svc.submit("s1", submission("w1", R"([{"sentence":1,"start_token":0,"end_token":99}])")).status == 422);
    CHECK(svc.submit("s1", submission("w1", R"([{"sentence":7,"start_token":0,"end_token":1}])")).status == 422);
    CHECK(svc.submit("s1", submission("w1", sel)).status == 201);
    CHECK(svc.submit("s1", submission("w1", sel)).status == 409);
    CHECK(svc.hits().size() == 1);
}

TEST_CASE("quota and exhaustion") {
    test::TempDir dir;
    FakeClock clock;
    AnnotationService svc(two_stories(), ServiceConfig{1, dir.path(), {}}, clock.fn());
    for (const char* w : {"a", "b"}) {
        const auto id = body_of(svc.next_story(w))["story_id"].get<std::string>();
        CHECK(svc.submit(id, submission(w, "[]")).status == 201);
    }
    CHECK(svc.next_story("c").status == 404);
    CHECK_THROWS_AS(AnnotationService({}, ServiceConfig{1, dir.path(), {}}), std::invalid_argument);
    CHECK_THROWS_AS(AnnotationService(two_stories(), ServiceConfig{0, dir.path(), {}}), std::invalid_argument);
}

TEST_CASE("export flags fast HITs and the log survives a restart") {
    test::TempDir dir;
    FakeClock clock;
    {
        AnnotationService svc(two_stories(), ServiceConfig{20, dir.path(), {}}, clock.fn());
        svc.next_story("fast");
        clock.now += 5.0;
        svc.submit("s1", submission("fast", R"([{"sentence":1,"start_token":1,"end_token":2}])"));
        svc.next_story("slow");
        clock.now += 200.0;
        svc.submit("s2", submission("slow", R"([{"sentence":1,"start_token":0,"end_token":2}])"));
        const auto ex = svc.export_hits();
        CHECK(ex.content_type == "application/x-ndjson");
        const auto hits = parse_hits(ex.body);
        REQUIRE(hits.size() == 2);
        std::istringstream lines(ex.body);
        std::string line;
        std::getline(lines, line);
        CHECK(nlohmann::json::parse(line)["flags"] == nlohmann::json::array({"fast-completion"}));
        std::getline(lines, line);
        CHECK(nlohmann::json::parse(line)["flags"].empty());
    }
    AnnotationService again(two_stories(), ServiceConfig{20, dir.path(), {}}, clock.fn());
    CHECK(again.hits().size() == 2);
    CHECK(again.annotation_count("s1") == 1);
    again.next_story("fast");
    CHECK(again.submit("s1", submission("fast", "[]")).status == 409);
    CHECK(read_hits(again.log_path()).size() == 2);
}

TEST_CASE("HTTP routes serve the same backend") {
    test::TempDir dir;
    AnnotationService svc(two_stories(), ServiceConfig{20, dir.path(), {}});
    auto server = make_http_server(svc);
    const int port = server->bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread th([&] { server->listen_after_bind(); });
    server->wait_until_ready();

    httplib::Client cli("127.0.0.1", port);
    auto next = cli.Get("/api/stories/next?worker=h1");
    REQUIRE(next);
    CHECK(next->status == 200);
    const auto story = nlohmann::json::parse(next->body)["story_id"].get<std::string>();
    auto post = cli.Post("/api/stories/" + story + "/annotations",
                         submission("h1", R"([{"sentence":1,"start_token":0,"end_token":1}])"), "application/json");
    REQUIRE(post);
    CHECK(post->status == 201);
    auto dup = cli.Post("/api/stories/" + story + "/annotations", submission("h1", "[]"), "application/json");
    REQUIRE(dup);
    CHECK(dup->status == 409);
    auto missing = cli.Post("/api/stories/zzz/annotations", submission("h1", "[]"), "application/json");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    auto ex = cli.Get("/api/export");
    REQUIRE(ex);
    CHECK(ex->status == 200);
    CHECK(parse_hits(ex->body).size() == 1);

    server->stop();
    th.join();
}
