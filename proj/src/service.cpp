#include "ake/service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "httplib.h"

namespace ake {

namespace {

double steady_seconds() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

std::string hit_id_for(std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "hit-%06zu", n);
    return buf;
}

}  // namespace

AnnotationService::AnnotationService(Corpus corpus, ServiceConfig cfg, Clock clock)
    : corpus_(std::move(corpus)), cfg_(std::move(cfg)), clock_(clock ? std::move(clock) : Clock(steady_seconds)) {
    if (corpus_.empty()) throw std::invalid_argument("annotation service needs at least one story");
    if (cfg_.quota < 1) throw std::invalid_argument("quota must be at least 1");
    index_ = index_stories(corpus_);
    std::filesystem::create_directories(cfg_.data_dir);
    load_log();
}

std::string_view AnnotationService::guidelines() {
    return "Read the story, then click the words and phrases that best express what it is about.\n"
           "- Click each word of a phrase separately; neighbouring selected words join into one phrase.\n"
           "- Choose names, places, events and topics rather than whole sentences.\n"
           "- Do not select an entire sentence.\n"
           "- Try to find at least 20 different phrases.";
}

void AnnotationService::load_log() {
    std::ifstream in(log_path());
    if (!in) return;
    std::stringstream buf;
    buf << in.rdbuf();
    for (auto& h : parse_hits(buf.str())) {
        done_.emplace(h.worker_id, h.story_id);
        ++counts_[h.story_id];
        hits_.push_back(std::move(h));
    }
}

ServiceResponse AnnotationService::error(int status, const std::string& message) const {
    return ServiceResponse{status, nlohmann::json{{"error", message}}.dump()};
}

nlohmann::json AnnotationService::story_payload(const Document& doc, const Session& s) const {
    nlohmann::json sentences = nlohmann::json::array();
    for (const auto& sent : doc.sentences) {
        nlohmann::json toks = nlohmann::json::array();
        for (const auto& t : sent.tokens) toks.push_back(t.surface);
        sentences.push_back({{"index", sent.index}, {"from_title", sent.from_title}, {"tokens", toks}});
    }
    return {{"story_id", doc.id},
            {"session_id", s.id},
            {"title", doc.title},
            {"category", std::string(category_label(doc.category))},
            {"sentences", sentences},
            {"guidelines", std::string(guidelines())}};
}

ServiceResponse AnnotationService::next_story(const std::string& worker) {
    if (worker.empty()) return error(400, "missing worker parameter");
    std::lock_guard lock(mu_);
    for (const auto& [key, session] : open_) {
        if (key.first == worker) return ServiceResponse{200, story_payload(*index_.at(key.second), session).dump()};
    }
    const Document* pick = nullptr;
    std::size_t best = 0;
    for (const auto& doc : corpus_) {
        if (done_.contains({worker, doc.id})) continue;
        const auto it = counts_.find(doc.id);
        const std::size_t n = it == counts_.end() ? 0 : it->second;
        if (n >= cfg_.quota) continue;
        if (!pick || n < best) {
            pick = &doc;
            best = n;
        }
    }
    if (!pick) return error(404, "no stories left for worker " + worker);
    Session s{"s" + std::to_string(next_session_++), clock_()};
    open_.emplace(std::make_pair(worker, pick->id), s);
    return ServiceResponse{200, story_payload(*pick, s).dump()};
}

ServiceResponse AnnotationService::submit(const std::string& story_id, const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        return error(400, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("worker_id") || !j["worker_id"].is_string())
        return error(400, "body must contain a string worker_id");
    if (!j.contains("selections") || !j["selections"].is_array()) return error(400, "body must contain a selections array");
    const std::string worker = j["worker_id"].get<std::string>();

    const auto doc_it = index_.find(story_id);
    if (doc_it == index_.end()) return error(404, "unknown story " + story_id);

    Hit hit;
    hit.worker_id = worker;
    hit.story_id = story_id;
    try {
        for (const auto& s : j["selections"]) {
            hit.selections.push_back(Selection{s.at("sentence").get<std::size_t>(), s.at("start_token").get<std::size_t>(),
                                               s.at("end_token").get<std::size_t>()});
        }
    } catch (const nlohmann::json::exception& e) {
        return error(400, std::string("bad selection: ") + e.what());
    }

    std::lock_guard lock(mu_);
    const auto key = std::make_pair(worker, story_id);
    if (done_.contains(key)) return error(409, "worker " + worker + " already annotated story " + story_id);
    const auto session = open_.find(key);
    if (session == open_.end()) return error(409, "no open session for worker " + worker + " on story " + story_id);
    for (const auto& s : hit.selections) {
        if (!selection_text(*doc_it->second, s))
            return error(422, "selection [" + std::to_string(s.sentence) + ":" + std::to_string(s.start_token) + "-" +
                                  std::to_string(s.end_token) + ") is outside story " + story_id);
    }

    hit.duration_seconds = std::max(0.0, clock_() - session->second.started);
    hit.hit_id = hit_id_for(hits_.size() + 1);
    {
        std::ofstream log(log_path(), std::ios::app);
        const std::string line = hit_to_json(hit).dump() + "\n";
        log.write(line.data(), static_cast<std::streamsize>(line.size()));
        log.flush();
        if (!log) return error(500, "could not append to " + log_path().string());
    }
    open_.erase(session);
    done_.insert(key);
    ++counts_[story_id];
    hits_.push_back(hit);
    return ServiceResponse{201, nlohmann::json{{"hit_id", hit.hit_id}, {"duration_seconds", hit.duration_seconds}}.dump()};
}

ServiceResponse AnnotationService::export_hits() const {
    std::lock_guard lock(mu_);
    std::string out;
    for (const auto& h : hits_) {
        auto j = hit_to_json(h);
        nlohmann::json flags = nlohmann::json::array();
        for (auto r : check_hit(h, index_, cfg_.rules)) flags.push_back(std::string(hit_rule_name(r)));
        j["flags"] = std::move(flags);
        out += j.dump();
        out.push_back('\n');
    }
    return ServiceResponse{200, std::move(out), "application/x-ndjson"};
}

std::vector<Hit> AnnotationService::hits() const {
    std::lock_guard lock(mu_);
    return hits_;
}

std::size_t AnnotationService::annotation_count(const std::string& story_id) const {
    std::lock_guard lock(mu_);
    const auto it = counts_.find(story_id);
    return it == counts_.end() ? 0 : it->second;
}

std::unique_ptr<httplib::Server> make_http_server(AnnotationService& service) {
    auto server = std::make_unique<httplib::Server>();
    auto reply = [](httplib::Response& res, const ServiceResponse& r) {
        res.status = r.status;
        res.set_content(r.body, r.content_type);
    };
    server->Get("/api/stories/next", [&service, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.next_story(req.has_param("worker") ? req.get_param_value("worker") : std::string()));
    });
    server->Post(R"(/api/stories/([^/]+)/annotations)",
                 [&service, reply](const httplib::Request& req, httplib::Response& res) {
                     reply(res, service.submit(req.matches[1].str(), req.body));
                 });
    server->Get("/api/export", [&service, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, service.export_hits());
    });
    return server;
}

bool serve_annotation(AnnotationService& service, const std::string& host, int port) {
    auto server = make_http_server(service);
    return server->listen(host, port);
}

}  // namespace ake
