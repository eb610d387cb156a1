#include "masbus/net.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "masbus/error.hpp"

namespace masbus {

std::pair<std::string, std::uint16_t> split_host_port(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0)
        throw Error(Errc::BadParam, "expected host:port, got '" + text + "'");
    std::string host = text.substr(0, colon);
    std::string port_text = text.substr(colon + 1);
    unsigned value = 0;
    auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), value);
    if (ec != std::errc{} || p != port_text.data() + port_text.size() || port_text.empty() || value > 65535)
        throw Error(Errc::BadParam, "bad port in '" + text + "'");
    return {host, static_cast<std::uint16_t>(value)};
}

namespace {

// IPv4 only.
sockaddr_in resolve(const std::string& host, std::uint16_t port, Errc on_error) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    std::string h = host == "localhost" ? "127.0.0.1" : host;
    if (h.empty() || h == "0.0.0.0") {
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
        return addr;
    }
    if (inet_pton(AF_INET, h.c_str(), &addr.sin_addr) == 1) return addr;
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (getaddrinfo(h.c_str(), nullptr, &hints, &res) != 0 || !res)
        throw Error(on_error, "cannot resolve host '" + host + "'");
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    freeaddrinfo(res);
    return addr;
}

bool write_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        off += static_cast<std::size_t>(n);
    }
    return true;
}

}  // namespace

TcpLineListener::TcpLineListener(std::string host, std::uint16_t port, LineFn on_line)
    : host_(std::move(host)), port_(port), on_line_(std::move(on_line)) {}

TcpLineListener::~TcpLineListener() { stop(); }

void TcpLineListener::start() {
    sockaddr_in addr = resolve(host_, port_, Errc::BindFailure);
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error(Errc::BindFailure, std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd, 64) < 0) {
        int err = errno;
        ::close(fd);
        throw Error(Errc::BindFailure,
                    "cannot listen on " + host_ + ":" + std::to_string(port_) + ": " + std::strerror(err));
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
    listen_fd_ = fd;
    stopping_ = false;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void TcpLineListener::stop() {
    if (listen_fd_ < 0) return;
    stopping_ = true;
    if (accept_thread_.joinable()) accept_thread_.join();
    ::close(listen_fd_);
    listen_fd_ = -1;
    std::unique_lock lock(conn_mu_);
    for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
    conn_cv_.wait(lock, [this] { return active_ == 0; });
}

void TcpLineListener::accept_loop() {
    while (!stopping_) {
        pollfd p{listen_fd_, POLLIN, 0};
        int r = ::poll(&p, 1, 50);
        if (r <= 0) continue;
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        std::lock_guard lock(conn_mu_);
        if (stopping_) {
            ::close(fd);
            break;
        }
        conn_fds_.push_back(fd);
        ++active_;
        std::thread([this, fd] { serve(fd); }).detach();
    }
}

void TcpLineListener::serve(int fd) {
    std::string buffer;
    char chunk[4096];
    for (;;) {
        ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        buffer.append(chunk, static_cast<std::size_t>(n));
        std::size_t nl;
        while ((nl = buffer.find('\n')) != std::string::npos) {
            std::string line = buffer.substr(0, nl);
            buffer.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            on_line_(line);
            write_all(fd, "ok\n");
        }
    }
    // a final unterminated line still counts
    if (!buffer.empty() && !stopping_) {
        if (buffer.back() == '\r') buffer.pop_back();
        on_line_(buffer);
    }
    std::lock_guard lock(conn_mu_);
    conn_fds_.remove(fd);
    ::close(fd);
    --active_;
    conn_cv_.notify_all();
}

void send_line(const std::string& host, std::uint16_t port, const std::string& line,
               std::chrono::milliseconds ack_timeout) {
    sockaddr_in addr = resolve(host, port, Errc::ConnectionRefused);
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error(Errc::ConnectionRefused, std::string("socket: ") + std::strerror(errno));
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
        int err = errno;
        ::close(fd);
        throw Error(Errc::ConnectionRefused,
                    "cannot connect to " + host + ":" + std::to_string(port) + ": " + std::strerror(err));
    }
    if (!write_all(fd, line + "\n")) {
        ::close(fd);
        throw Error(Errc::ConnectionRefused, "connection to " + host + ":" + std::to_string(port) + " dropped");
    }
    if (ack_timeout.count() > 0) {
        pollfd p{fd, POLLIN, 0};
        bool acked = false;
        if (::poll(&p, 1, static_cast<int>(ack_timeout.count())) > 0) {
            char buf[8];
            acked = ::recv(fd, buf, sizeof buf, 0) > 0;
        }
        if (!acked) {
            ::close(fd);
            throw Error(Errc::ConnectionRefused,
                        "no acknowledgement from " + host + ":" + std::to_string(port));
        }
    }
    ::close(fd);
}

}  // namespace masbus
