#pragma once

// Request/response wire protocol and the loopback cloud-executor service.
//
// Frame layout (big-endian throughout):
//   4 bytes  payload length, always 17
//   1 byte   type tag: 0x01 request, 0x02 response
//   8 bytes  task_id, unsigned
//   8 bytes  IEEE-754 double: d (request) or elapsed seconds (response)
//
// One request is in flight per connection; the server answers requests in
// order and keeps a connection open across requests.

#include "offload/engine.hpp"
#include "offload/workload.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace offload::transport {

struct ExecRequest {
    std::uint64_t task_id = 0;
    double d = 0.0;

    friend bool operator==(const ExecRequest&, const ExecRequest&) = default;
};

struct ExecResponse {
    std::uint64_t task_id = 0;
    double elapsed = 0.0; // seconds

    friend bool operator==(const ExecResponse&, const ExecResponse&) = default;
};

inline constexpr std::uint8_t kTagRequest = 0x01;
inline constexpr std::uint8_t kTagResponse = 0x02;
inline constexpr std::size_t kPayloadLength = 17; // tag + id + double
inline constexpr std::size_t kFrameLength = 4 + kPayloadLength;

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Throws std::invalid_argument when the message violates its invariants
// (request: d finite and >= 0; response: elapsed finite and > 0).
std::vector<std::uint8_t> encode_frame(const ExecRequest& msg);
std::vector<std::uint8_t> encode_frame(const ExecResponse& msg);

enum class DecodeStatus {
    Ok,       // one message decoded, `consumed` bytes used
    NeedMore, // not enough bytes for a full frame yet
    Error,    // protocol violation; connection must be closed
};

struct Decoded {
    DecodeStatus status = DecodeStatus::NeedMore;
    std::size_t consumed = 0;
    std::optional<ExecRequest> request;
    std::optional<ExecResponse> response;
    std::string error;
};

Decoded decode_frame(std::span<const std::uint8_t> bytes);

// "host:port" -> (host, port).  Throws TransportError on malformed input.
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint);

struct ServerConfig {
    std::string bind_host = "127.0.0.1";
    std::uint16_t port = 7070;         // 0 picks a free port
    TargetCost cloud_cost;             // simulated execution-time model
    double injected_rtt = 0.030;       // seconds added to every exchange
    std::uint64_t noise_seed = 0;      // seeds the cost model's noise draws
    bool log_requests = false;         // one stderr line per request
};

// Simulated cloud executor: for each request it computes an execution
// time from the cost model, sleeps for that time plus the injected RTT,
// and replies with the total.  Each connection is served on its own
// thread; a protocol error closes only that connection.
class Server {
public:
    explicit Server(ServerConfig config);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    // Binds and starts accepting.  Throws TransportError when the address
    // cannot be bound.
    void start();

    // Stops accepting, closes live connections, joins worker threads.
    // Safe to call more than once.
    void stop();

    bool running() const { return running_.load(); }
    std::uint16_t port() const { return bound_port_; }
    std::uint64_t requests_served() const { return requests_served_.load(); }

private:
    void accept_loop();
    void serve_connection(int fd, std::uint64_t connection_id);
    bool interruptible_sleep(double seconds);

    ServerConfig config_;
    int listen_fd_ = -1;
    std::uint16_t bound_port_ = 0;
    std::atomic<bool> running_{false};
    std::atomic<std::uint64_t> requests_served_{0};
    std::thread accept_thread_;
    std::mutex mutex_; // guards connections_ and threads_
    std::vector<int> connections_;
    std::vector<std::thread> threads_;
};

// Client side of the protocol.  One outstanding request at a time.
class Client {
public:
    Client() = default;
    ~Client();

    Client(const Client&) = delete;
    Client& operator=(const Client&) = delete;

    // Throws TransportError when the connection cannot be established.
    void connect(const std::string& host, std::uint16_t port,
                 double timeout_seconds = 5.0);
    void close();
    bool connected() const { return fd_ >= 0; }

    // Sends the request and waits for the matching response.  Returns the
    // wall-clock seconds measured on this side of the link; the server's
    // own elapsed figure is retained for diagnostics.  Throws
    // TransportError on timeout, task-id mismatch, or protocol error.
    double remote_execute(std::uint64_t task_id, double d);

    double last_server_elapsed() const { return last_server_elapsed_; }

private:
    int fd_ = -1;
    double timeout_seconds_ = 5.0;
    double last_server_elapsed_ = 0.0;
    std::vector<std::uint8_t> read_buffer_;
};

// Engine executor backed by a connected Client; transport failures
// surface as ExecutorError so the engine can fall back to the other
// target.
class RemoteExecutor : public Executor {
public:
    explicit RemoteExecutor(Client& client) : client_(client) {}
    double execute(std::uint64_t task_id, double d) override;

private:
    Client& client_;
};

} // namespace offload::transport
