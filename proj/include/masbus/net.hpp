#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <list>
#include <mutex>
#include <string>
#include <thread>

namespace masbus {

/// Splits `host:port`; throws BadParam.
std::pair<std::string, std::uint16_t> split_host_port(const std::string& text);

/// Line-oriented TCP server. Each received line (without the trailing
/// newline or CR) is handed to the callback on the connection's thread; the
/// listener then writes "ok\n" back so senders can wait for acceptance.
class TcpLineListener {
public:
    using LineFn = std::function<void(const std::string& line)>;

    TcpLineListener(std::string host, std::uint16_t port, LineFn on_line);
    ~TcpLineListener();

    TcpLineListener(const TcpLineListener&) = delete;
    TcpLineListener& operator=(const TcpLineListener&) = delete;

    /// Binds and starts accepting; throws BindFailure. Port 0 picks a free
    /// port, see port().
    void start();
    void stop();
    std::uint16_t port() const { return port_; }

private:
    void accept_loop();
    void serve(int fd);

    std::string host_;
    std::uint16_t port_;
    LineFn on_line_;
    int listen_fd_ = -1;
    std::atomic<bool> stopping_{false};
    std::thread accept_thread_;
    std::mutex conn_mu_;
    std::condition_variable conn_cv_;
    std::size_t active_ = 0;  // connection threads are detached; stop() waits for this to drop to 0
    std::list<int> conn_fds_;
};

/// Connects, writes `line + "\n"` and closes. With a positive ack_timeout
/// it waits for the listener's acknowledgement first. Throws
/// ConnectionRefused.
void send_line(const std::string& host, std::uint16_t port, const std::string& line,
               std::chrono::milliseconds ack_timeout = std::chrono::milliseconds{0});

}  // namespace masbus
