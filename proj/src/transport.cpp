#include "offload/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>

namespace offload::transport {

namespace {

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64_be(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32_be(std::span<const std::uint8_t> bytes) {
    return (static_cast<std::uint32_t>(bytes[0]) << 24) |
           (static_cast<std::uint32_t>(bytes[1]) << 16) |
           (static_cast<std::uint32_t>(bytes[2]) << 8) |
           static_cast<std::uint32_t>(bytes[3]);
}

std::uint64_t get_u64_be(std::span<const std::uint8_t> bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v = (v << 8) | bytes[i];
    return v;
}

std::vector<std::uint8_t> encode(std::uint8_t tag, std::uint64_t task_id,
                                 double value) {
    std::vector<std::uint8_t> out;
    out.reserve(kFrameLength);
    put_u32_be(out, static_cast<std::uint32_t>(kPayloadLength));
    out.push_back(tag);
    put_u64_be(out, task_id);
    put_u64_be(out, std::bit_cast<std::uint64_t>(value));
    return out;
}

Decoded decode_error(std::string message) {
    Decoded d;
    d.status = DecodeStatus::Error;
    d.error = std::move(message);
    return d;
}

} // namespace

std::vector<std::uint8_t> encode_frame(const ExecRequest& msg) {
    if (!std::isfinite(msg.d) || msg.d < 0.0)
        throw std::invalid_argument("request d must be finite and non-negative");
    return encode(kTagRequest, msg.task_id, msg.d);
}

std::vector<std::uint8_t> encode_frame(const ExecResponse& msg) {
    if (!std::isfinite(msg.elapsed) || msg.elapsed <= 0.0)
        throw std::invalid_argument("response elapsed must be finite and positive");
    return encode(kTagResponse, msg.task_id, msg.elapsed);
}

Decoded decode_frame(std::span<const std::uint8_t> bytes) {
    Decoded d;
    if (bytes.size() < 4)
        return d; // NeedMore

    const std::uint32_t length = get_u32_be(bytes);
    if (length != kPayloadLength)
        return decode_error("bad payload length " + std::to_string(length));
    if (bytes.size() < kFrameLength)
        return d; // NeedMore

    const std::uint8_t tag = bytes[4];
    const std::uint64_t task_id = get_u64_be(bytes.subspan(5, 8));
    const double value =
        std::bit_cast<double>(get_u64_be(bytes.subspan(13, 8)));
    d.consumed = kFrameLength;
    if (tag == kTagRequest) {
        if (!std::isfinite(value) || value < 0.0)
            return decode_error("request d out of range");
        d.status = DecodeStatus::Ok;
        d.request = ExecRequest{task_id, value};
    } else if (tag == kTagResponse) {
        if (!std::isfinite(value) || value <= 0.0)
            return decode_error("response elapsed out of range");
        d.status = DecodeStatus::Ok;
        d.response = ExecResponse{task_id, value};
    } else {
        return decode_error("unknown frame tag " + std::to_string(tag));
    }
    return d;
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint) {
    const std::size_t colon = endpoint.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size())
        throw TransportError("bad endpoint '" + endpoint + "', expected host:port");
    const std::string host = endpoint.substr(0, colon);
    const std::string port_str = endpoint.substr(colon + 1);
    char* end = nullptr;
    const long port = std::strtol(port_str.c_str(), &end, 10);
    if (end == port_str.c_str() || *end != '\0' || port < 0 || port > 65535)
        throw TransportError("bad port in endpoint '" + endpoint + "'");
    return {host, static_cast<std::uint16_t>(port)};
}

namespace {

bool send_all(int fd, const std::uint8_t* data, std::size_t len) {
    std::size_t sent = 0;
    while (sent < len) {
        const ssize_t n = ::send(fd, data + sent, len - sent, MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && errno == EINTR)
                continue;
            return false;
        }
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

void set_timeout(int fd, double seconds) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(seconds);
    tv.tv_usec = static_cast<suseconds_t>((seconds - std::floor(seconds)) * 1e6);
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw TransportError("bad IPv4 address '" + host + "'");
    return addr;
}

} // namespace

Server::Server(ServerConfig config) : config_(std::move(config)) {
    if (config_.injected_rtt < 0.0)
        throw std::invalid_argument("injected_rtt must be non-negative");
}

Server::~Server() {
    stop();
}

void Server::start() {
    if (running_.load())
        return;

    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0)
        throw TransportError("socket: " + std::string(std::strerror(errno)));

    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr = make_addr(config_.bind_host, config_.port);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        const std::string msg = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw TransportError("bind " + config_.bind_host + ":" +
                             std::to_string(config_.port) + ": " + msg);
    }
    if (::listen(listen_fd_, 16) != 0) {
        const std::string msg = std::strerror(errno);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw TransportError("listen: " + msg);
    }

    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    bound_port_ = ntohs(bound.sin_port);

    running_.store(true);
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void Server::stop() {
    if (!running_.exchange(false)) {
        if (accept_thread_.joinable())
            accept_thread_.join();
        return;
    }
    // Wake the blocked accept(); the fd member is only written again once
    // the accept thread is joined.
    if (listen_fd_ >= 0)
        ::shutdown(listen_fd_, SHUT_RDWR);
    if (accept_thread_.joinable())
        accept_thread_.join();
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
    }

    std::vector<std::thread> workers;
    {
        // Shut registered connections down under the lock: a worker
        // deregisters and closes its fd under the same lock, so every fd
        // here is still open and cannot have been recycled.
        std::lock_guard lock(mutex_);
        for (int fd : connections_)
            ::shutdown(fd, SHUT_RDWR);
        connections_.clear();
        workers.swap(threads_);
    }
    for (std::thread& t : workers)
        if (t.joinable())
            t.join();
}

void Server::accept_loop() {
    std::uint64_t connection_id = 0;
    while (running_.load()) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR)
                continue;
            break; // listener closed by stop()
        }
        ++connection_id;
        std::lock_guard lock(mutex_);
        connections_.push_back(fd);
        threads_.emplace_back(
            [this, fd, connection_id] { serve_connection(fd, connection_id); });
    }
}

// Sleeps in short slices so shutdown does not wait out long simulated
// executions; returns false when interrupted.
bool Server::interruptible_sleep(double seconds) {
    constexpr double kSlice = 0.05;
    double remaining = seconds;
    while (remaining > 0.0) {
        if (!running_.load())
            return false;
        const double slice = std::min(remaining, kSlice);
        std::this_thread::sleep_for(std::chrono::duration<double>(slice));
        remaining -= slice;
    }
    return running_.load();
}

void Server::serve_connection(int fd, std::uint64_t connection_id) {
    // Each connection draws its noise independently; the stream stays
    // reproducible for a fixed (seed, connection order).
    std::mt19937_64 rng(config_.noise_seed ^ (0x9e3779b97f4a7c15ULL * connection_id));
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<std::uint8_t> buffer;
    std::uint8_t chunk[256];
    while (running_.load()) {
        const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n <= 0)
            break; // peer closed or connection shut down
        buffer.insert(buffer.end(), chunk, chunk + n);

        bool close_connection = false;
        while (true) {
            const Decoded decoded = decode_frame(buffer);
            if (decoded.status == DecodeStatus::NeedMore)
                break;
            if (decoded.status == DecodeStatus::Error || !decoded.request) {
                close_connection = true; // responses are not valid here
                break;
            }
            buffer.erase(buffer.begin(),
                         buffer.begin() + static_cast<long>(decoded.consumed));

            const ExecRequest& req = *decoded.request;
            const double noise_value = config_.cloud_cost.noise_std > 0.0
                                           ? noise(rng) * config_.cloud_cost.noise_std
                                           : 0.0;
            const double exec_time =
                profile_time(config_.cloud_cost, req.task_id, req.d, noise_value);
            const double total = exec_time + config_.injected_rtt;
            if (config_.log_requests)
                std::fprintf(stderr, "conn %llu task %llu d=%.6g exec=%.6f rtt=%.6f\n",
                             static_cast<unsigned long long>(connection_id),
                             static_cast<unsigned long long>(req.task_id), req.d,
                             exec_time, config_.injected_rtt);
            if (!interruptible_sleep(total)) {
                close_connection = true; // shutting down
                break;
            }

            requests_served_.fetch_add(1);
            const auto frame = encode_frame(ExecResponse{req.task_id, total});
            if (!send_all(fd, frame.data(), frame.size())) {
                close_connection = true;
                break;
            }
        }
        if (close_connection)
            break;
    }
    {
        // Deregister and close atomically with respect to stop(), which
        // never touches an fd outside the registry.
        std::lock_guard lock(mutex_);
        std::erase(connections_, fd);
        ::close(fd);
    }
}

Client::~Client() {
    close();
}

void Client::connect(const std::string& host, std::uint16_t port,
                     double timeout_seconds) {
    close();
    timeout_seconds_ = timeout_seconds;

    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0)
        throw TransportError("socket: " + std::string(std::strerror(errno)));
    set_timeout(fd_, timeout_seconds);

    sockaddr_in addr = make_addr(host, port);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        const std::string msg = std::strerror(errno);
        close();
        throw TransportError("connect " + host + ":" + std::to_string(port) +
                             ": " + msg);
    }
    const int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

void Client::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
    read_buffer_.clear();
}

double Client::remote_execute(std::uint64_t task_id, double d) {
    if (fd_ < 0)
        throw TransportError("not connected");

    const auto frame = encode_frame(ExecRequest{task_id, d});
    const auto start = std::chrono::steady_clock::now();
    if (!send_all(fd_, frame.data(), frame.size()))
        throw TransportError("send failed: " + std::string(std::strerror(errno)));

    std::uint8_t chunk[256];
    while (true) {
        const Decoded decoded = decode_frame(read_buffer_);
        if (decoded.status == DecodeStatus::Error)
            throw TransportError("protocol error: " + decoded.error);
        if (decoded.status == DecodeStatus::Ok) {
            read_buffer_.erase(read_buffer_.begin(),
                               read_buffer_.begin() +
                                   static_cast<long>(decoded.consumed));
            if (!decoded.response)
                throw TransportError("protocol error: unexpected request frame");
            if (decoded.response->task_id != task_id)
                throw TransportError(
                    "protocol error: response task_id " +
                    std::to_string(decoded.response->task_id) +
                    " does not match request " + std::to_string(task_id));
            last_server_elapsed_ = decoded.response->elapsed;
            const auto end = std::chrono::steady_clock::now();
            return std::chrono::duration<double>(end - start).count();
        }

        const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
        if (n == 0)
            throw TransportError("connection closed by server");
        if (n < 0) {
            if (errno == EINTR)
                continue;
            if (errno == EAGAIN || errno == EWOULDBLOCK)
                throw TransportError("timeout after " +
                                     std::to_string(timeout_seconds_) + " s");
            throw TransportError("recv failed: " +
                                 std::string(std::strerror(errno)));
        }
        read_buffer_.insert(read_buffer_.end(), chunk, chunk + n);
    }
}

double RemoteExecutor::execute(std::uint64_t task_id, double d) {
    try {
        return client_.remote_execute(task_id, d);
    } catch (const TransportError& err) {
        throw ExecutorError(err.what());
    }
}

} // namespace offload::transport
