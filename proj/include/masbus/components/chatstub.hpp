#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include "masbus/bus.hpp"

namespace masbus {

struct TranscriptRow {
    std::string token;
    std::string chat_id;
    std::string text;
    std::int64_t ts = 0;  // bus clock, ms

    friend bool operator==(const TranscriptRow&, const TranscriptRow&) = default;
};

class TranscriptStore {
public:
    void append(TranscriptRow row);
    std::vector<TranscriptRow> rows() const;
    std::size_t count_for_chat(const std::string& chat_id) const;
    /// One JSON object per line: {"token","chatId","text","ts"}.
    std::string to_jsonl() const;
    void set_listener(std::function<void(const TranscriptRow&)> fn);

private:
    mutable std::mutex mu_;
    std::vector<TranscriptRow> rows_;
    std::function<void(const TranscriptRow&)> listener_;
};

/// `chatstub:bots/<token>?chatId=<id>` - producer only. Stands in for a chat
/// bot API by appending the rendered body to an inspectable transcript.
class ChatStubComponent final : public Component {
public:
    std::unique_ptr<Producer> create_producer(const EndpointUri& uri, RouteContext& route) override;

    TranscriptStore& transcript() { return transcript_; }

private:
    TranscriptStore transcript_;
};

}  // namespace masbus
