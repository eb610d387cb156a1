#include "masbus/components/chatstub.hpp"

#include <json.hpp>

#include "masbus/components/core.hpp"

namespace masbus {

void TranscriptStore::append(TranscriptRow row) {
    std::function<void(const TranscriptRow&)> listener;
    {
        std::lock_guard lock(mu_);
        rows_.push_back(row);
        listener = listener_;
    }
    if (listener) listener(row);
}

std::vector<TranscriptRow> TranscriptStore::rows() const {
    std::lock_guard lock(mu_);
    return rows_;
}

std::size_t TranscriptStore::count_for_chat(const std::string& chat_id) const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& r : rows_)
        if (r.chat_id == chat_id) ++n;
    return n;
}

std::string TranscriptStore::to_jsonl() const {
    std::string out;
    for (const auto& r : rows()) {
        nlohmann::ordered_json j;
        j["token"] = r.token;
        j["chatId"] = r.chat_id;
        j["text"] = r.text;
        j["ts"] = r.ts;
        out += j.dump();
        out += '\n';
    }
    return out;
}

void TranscriptStore::set_listener(std::function<void(const TranscriptRow&)> fn) {
    std::lock_guard lock(mu_);
    listener_ = std::move(fn);
}

namespace {

class ChatProducer final : public Producer {
public:
    ChatProducer(TranscriptStore& store, Clock& clock, std::string token, std::string chat_id)
        : store_(store), clock_(clock), token_(std::move(token)), chat_id_(std::move(chat_id)) {}

    void deliver(const Exchange& ex) override {
        store_.append(TranscriptRow{token_, chat_id_, render_term(ex.body), clock_.now_ms()});
    }

private:
    TranscriptStore& store_;
    Clock& clock_;
    std::string token_;
    std::string chat_id_;
};

}  // namespace

std::unique_ptr<Producer> ChatStubComponent::create_producer(const EndpointUri& uri, RouteContext& route) {
    std::string chat_id = require_param(uri, "chatId");
    std::string token = uri.path;
    if (token.rfind("bots/", 0) == 0) token = token.substr(5);
    if (token.empty()) throw Error(Errc::MissingParam, format_uri(uri) + " needs a bot token in its path");
    return std::make_unique<ChatProducer>(transcript_, route.bus().clock(), token, chat_id);
}

}  // namespace masbus
