#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ake/corpus.hpp"
#include "ake/goldstandard.hpp"

namespace httplib {
class Server;
}

namespace ake {

struct ServiceConfig {
    std::size_t quota = 20;               // HITs wanted per story
    std::filesystem::path data_dir = ".";  // holds hits.jsonl
    HitRules rules;
};

struct ServiceResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// Transport-independent annotation backend. The clock returns seconds on any
/// monotonic scale; durations are always measured by the server.
class AnnotationService {
public:
    using Clock = std::function<double()>;

    AnnotationService(Corpus corpus, ServiceConfig cfg, Clock clock = {});

    /// Reuses the worker's open session if there is one, otherwise opens a
    /// session on the least-annotated story the worker has not done and that
    /// is still under quota. 404 when nothing is left.
    ServiceResponse next_story(const std::string& worker);
    /// Body: {"worker_id": W, "selections": [{sentence, start_token, end_token}]}.
    /// 409 on a repeat (worker, story) submission, 422 on spans outside the story.
    ServiceResponse submit(const std::string& story_id, const std::string& body);
    /// Every stored HIT as one JSON line, with "flags" listing the bad-HIT rules it trips.
    ServiceResponse export_hits() const;

    std::vector<Hit> hits() const;
    std::size_t annotation_count(const std::string& story_id) const;
    std::filesystem::path log_path() const { return cfg_.data_dir / "hits.jsonl"; }

    static std::string_view guidelines();

private:
    struct Session {
        std::string id;
        double started = 0.0;
    };

    ServiceResponse error(int status, const std::string& message) const;
    nlohmann::json story_payload(const Document& doc, const Session& s) const;
    void load_log();

    Corpus corpus_;
    StoryIndex index_;
    ServiceConfig cfg_;
    Clock clock_;

    mutable std::mutex mu_;
    std::map<std::pair<std::string, std::string>, Session> open_;  // (worker, story)
    std::set<std::pair<std::string, std::string>> done_;
    std::map<std::string, std::size_t> counts_;
    std::vector<Hit> hits_;
    std::size_t next_session_ = 1;
};

/// Registers the HTTP routes of `service` on a new server.
std::unique_ptr<httplib::Server> make_http_server(AnnotationService& service);

/// Blocks serving on host:port. Returns false if the port could not be bound.
bool serve_annotation(AnnotationService& service, const std::string& host, int port);

}  // namespace ake
