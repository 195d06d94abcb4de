#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <future>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "lemir/score_types.hpp"

// Newline-delimited JSON protocol for delegating span x label scoring to an
// external process. Both sides first send
//   {"protocol":"glilem-scorer","version":1}
// then the client sends requests
//   {"request_id":"r1","tokens":[...],"spans":[[0,0],...],"labels":[...]}
// and the server answers each with
//   {"request_id":"r1","scores":[[...],...]}   or
//   {"request_id":"r1","error":"message"}
// in any order. Unknown fields are ignored.
namespace lemir::bridge {

inline constexpr std::string_view kProtocolName = "glilem-scorer";
inline constexpr int kProtocolVersion = 1;
inline constexpr std::chrono::milliseconds kDefaultTimeout{30'000};

std::string encode_handshake(int version = kProtocolVersion);
/// Throws ProtocolError(VersionMismatch) for another version of this
/// protocol, ProtocolError(Malformed) for anything else.
void check_handshake(std::string_view line);

std::string encode_request(const ScoreRequest& request);
ScoreRequest decode_request(std::string_view line);

std::string encode_response(const ScoreResponse& response);
std::string encode_error(std::string_view request_id, std::string_view message);

/// A decoded server message: either scores or an error for `request_id`.
struct ResponseMessage {
    ScoreResponse response;
    std::optional<std::string> error;
};

/// Checks JSON structure and score range; shape is checked against the
/// request later with validate_response.
ResponseMessage decode_response_message(std::string_view line);
/// Like decode_response_message but throws RemoteError for error messages.
ScoreResponse decode_response(std::string_view line);

/// Remembers every request id used on one connection.
class RequestIdRegistry {
  public:
    /// Throws ProtocolError(DuplicateRequestId) on reuse.
    void claim(const std::string& id);
    bool contains(const std::string& id) const;

  private:
    mutable std::mutex mutex_;
    std::set<std::string> ids_;
};

/// Splits a byte stream into lines; tolerates arbitrary chunking.
class LineSplitter {
  public:
    void feed(std::string_view bytes);
    std::optional<std::string> next();

  private:
    std::string buffer_;
    std::size_t scanned_ = 0;
};

// --- transports --------------------------------------------------------------

/// A bidirectional line-oriented connection.
class LineChannel {
  public:
    virtual ~LineChannel() = default;
    /// Throws ConnectionClosed when the peer is gone.
    virtual void write_line(std::string_view line) = 0;
    /// Blocks; std::nullopt at end of stream.
    virtual std::optional<std::string> read_line() = 0;
    /// Signals end of output to the peer; reads may continue.
    virtual void close_write() = 0;
    /// Forcefully tears the connection down, unblocking readers.
    virtual void terminate() = 0;
};

/// Channel over a connected stream socket. Owns the descriptor.
class SocketChannel : public LineChannel {
  public:
    explicit SocketChannel(int fd, int child_pid = -1);
    ~SocketChannel() override;
    SocketChannel(const SocketChannel&) = delete;
    SocketChannel& operator=(const SocketChannel&) = delete;

    void write_line(std::string_view line) override;
    std::optional<std::string> read_line() override;
    void close_write() override;
    void terminate() override;

  private:
    int fd_;
    int child_pid_;
    LineSplitter splitter_;
    bool eof_ = false;
    std::atomic<bool> terminated_{false};
};

/// Runs `command` through /bin/sh with its stdin and stdout connected to the
/// returned channel; stderr is inherited.
std::unique_ptr<LineChannel> spawn_process(const std::string& command);
std::unique_ptr<LineChannel> connect_tcp(const std::string& host, std::uint16_t port);

/// Channel over iostreams (e.g. stdin/stdout) for the serving side.
class StreamChannel : public LineChannel {
  public:
    StreamChannel(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
    void write_line(std::string_view line) override;
    std::optional<std::string> read_line() override;
    void close_write() override;
    void terminate() override {}

  private:
    std::istream& in_;
    std::ostream& out_;
};

// --- client ------------------------------------------------------------------

/// Multiplexes concurrent callers over one connection. Requests may be
/// pipelined; responses are matched by request_id in any arrival order.
class ScorerClient : public SpanScorer {
  public:
    /// Performs the handshake; throws ProtocolError or ConnectionClosed.
    explicit ScorerClient(std::unique_ptr<LineChannel> channel,
                          std::chrono::milliseconds timeout = kDefaultTimeout);
    ~ScorerClient() override;
    ScorerClient(const ScorerClient&) = delete;
    ScorerClient& operator=(const ScorerClient&) = delete;

    static std::shared_ptr<ScorerClient> spawn(const std::string& command,
                                               std::chrono::milliseconds timeout = kDefaultTimeout);
    static std::shared_ptr<ScorerClient> tcp(const std::string& host, std::uint16_t port,
                                             std::chrono::milliseconds timeout = kDefaultTimeout);

    /// Sends `request` under its own id (which must be new on this connection).
    std::future<ScoreResponse> submit(const ScoreRequest& request);
    /// submit + wait. Throws ScorerTimeout, ConnectionClosed, ProtocolError
    /// or RemoteError.
    ScoreResponse remote_score(const ScoreRequest& request, std::optional<std::chrono::milliseconds> timeout = {});

    /// SpanScorer interface: sends the request under a fresh connection-unique
    /// id and returns the response carrying the caller's id.
    ScoreResponse score(const ScoreRequest& request) override;

    std::chrono::milliseconds timeout() const noexcept { return timeout_; }

  private:
    struct Pending {
        ScoreRequest request;
        std::promise<ScoreResponse> promise;
    };

    void reader_loop();
    void fail_all(const std::exception_ptr& error);

    std::unique_ptr<LineChannel> channel_;
    std::chrono::milliseconds timeout_;
    RequestIdRegistry ids_;
    std::atomic<std::uint64_t> next_id_{0};

    std::mutex mutex_;  // guards pending_, abandoned_, failure_
    std::map<std::string, Pending> pending_;
    std::set<std::string> abandoned_;
    std::exception_ptr failure_;

    std::mutex write_mutex_;
    std::thread reader_;
};

std::shared_ptr<ScorerClient> remote_connect(const std::string& endpoint,
                                             std::chrono::milliseconds timeout = kDefaultTimeout);

ScoreResponse remote_score(ScorerClient& connection, const ScoreRequest& request,
                           std::chrono::milliseconds timeout = kDefaultTimeout);

// --- server side ---------------------------------------------------------------

/// Serves `scorer` on `channel` until end of input: handshake, then one
/// response (or error message) per request line, in order.
void serve(LineChannel& channel, SpanScorer& scorer);

struct ConformanceResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Golden handshake/request/response checks plus `fuzz_requests` random
/// requests validated for shape and range.
std::vector<ConformanceResult> run_conformance_suite(ScorerClient& client, std::size_t fuzz_requests,
                                                     std::uint64_t seed);

}  // namespace lemir::bridge
