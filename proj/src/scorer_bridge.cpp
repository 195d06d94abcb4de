#include "lemir/scorer_bridge.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>

#include <fcntl.h>
#include <netdb.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "lemir/editscript.hpp"
#include "lemir/errors.hpp"

namespace lemir {

void validate_request(const ScoreRequest& request)
{
    for (const auto& span : request.spans) {
        if (span.start > span.end || span.end >= request.tokens.size()) {
            throw ProtocolError(ProtocolErrorKind::Malformed,
                                "span [" + std::to_string(span.start) + ", " + std::to_string(span.end) +
                                    "] outside " + std::to_string(request.tokens.size()) + " tokens");
        }
    }
    for (const auto& label : request.labels) {
        if (label.empty()) {
            throw ProtocolError(ProtocolErrorKind::Malformed, "empty label");
        }
    }
}

void validate_response(const ScoreResponse& response, const ScoreRequest& request)
{
    if (response.scores.size() != request.spans.size()) {
        throw ProtocolError(ProtocolErrorKind::DimensionMismatch,
                            "request '" + request.request_id + "' has " + std::to_string(request.spans.size()) +
                                " spans, response has " + std::to_string(response.scores.size()) + " rows");
    }
    for (const auto& row : response.scores) {
        if (row.size() != request.labels.size()) {
            throw ProtocolError(ProtocolErrorKind::DimensionMismatch,
                                "request '" + request.request_id + "' has " + std::to_string(request.labels.size()) +
                                    " labels, response row has " + std::to_string(row.size()) + " columns");
        }
        for (double s : row) {
            if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
                throw ProtocolError(ProtocolErrorKind::OutOfRange,
                                    "score " + std::to_string(s) + " for request '" + request.request_id + "'");
            }
        }
    }
}

}  // namespace lemir

namespace lemir::bridge {

using nlohmann::json;

namespace {

json parse_object(std::string_view line)
{
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ProtocolError(ProtocolErrorKind::Malformed, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ProtocolError(ProtocolErrorKind::Malformed, "expected a JSON object");
    }
    return j;
}

template <typename T>
T field(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end()) {
        throw ProtocolError(ProtocolErrorKind::Malformed, std::string("missing field '") + key + "'");
    }
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ProtocolError(ProtocolErrorKind::Malformed, std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace

std::string encode_handshake(int version)
{
    return json{{"protocol", kProtocolName}, {"version", version}}.dump();
}

void check_handshake(std::string_view line)
{
    const json j = parse_object(line);
    auto protocol = j.find("protocol");
    auto version = j.find("version");
    if (protocol == j.end() || !protocol->is_string() || protocol->get<std::string>() != kProtocolName ||
        version == j.end() || !version->is_number_integer()) {
        throw ProtocolError(ProtocolErrorKind::Malformed, "expected handshake, got " + std::string(line));
    }
    if (version->get<long long>() != kProtocolVersion) {
        throw ProtocolError(ProtocolErrorKind::VersionMismatch,
                            "peer speaks version " + std::to_string(version->get<long long>()) + ", expected " +
                                std::to_string(kProtocolVersion));
    }
}

std::string encode_request(const ScoreRequest& request)
{
    json spans = json::array();
    for (const auto& s : request.spans) {
        spans.push_back({s.start, s.end});
    }
    return json{{"request_id", request.request_id},
                {"tokens", request.tokens},
                {"spans", spans},
                {"labels", request.labels}}
        .dump();
}

ScoreRequest decode_request(std::string_view line)
{
    const json j = parse_object(line);
    ScoreRequest request;
    request.request_id = field<std::string>(j, "request_id");
    request.tokens = field<std::vector<std::string>>(j, "tokens");
    request.labels = field<std::vector<std::string>>(j, "labels");
    for (const auto& pair : field<std::vector<std::vector<long long>>>(j, "spans")) {
        if (pair.size() != 2 || pair[0] < 0 || pair[1] < 0) {
            throw ProtocolError(ProtocolErrorKind::Malformed, "spans must be [start, end] pairs");
        }
        request.spans.push_back({static_cast<std::size_t>(pair[0]), static_cast<std::size_t>(pair[1])});
    }
    validate_request(request);
    return request;
}

std::string encode_response(const ScoreResponse& response)
{
    return json{{"request_id", response.request_id}, {"scores", response.scores}}.dump();
}

std::string encode_error(std::string_view request_id, std::string_view message)
{
    return json{{"request_id", request_id}, {"error", message}}.dump();
}

ResponseMessage decode_response_message(std::string_view line)
{
    const json j = parse_object(line);
    ResponseMessage msg;
    msg.response.request_id = field<std::string>(j, "request_id");
    if (auto err = j.find("error"); err != j.end()) {
        msg.error = err->is_string() ? err->get<std::string>() : err->dump();
        return msg;
    }
    const auto it = j.find("scores");
    if (it == j.end() || !it->is_array()) {
        throw ProtocolError(ProtocolErrorKind::Malformed, "missing 'scores' matrix");
    }
    for (const auto& row : *it) {
        if (!row.is_array()) {
            throw ProtocolError(ProtocolErrorKind::Malformed, "'scores' rows must be arrays");
        }
        std::vector<double> values;
        values.reserve(row.size());
        for (const auto& v : row) {
            if (!v.is_number()) {
                throw ProtocolError(ProtocolErrorKind::Malformed, "scores must be numbers");
            }
            const double s = v.get<double>();
            if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
                throw ProtocolError(ProtocolErrorKind::OutOfRange, "score " + v.dump() + " for request '" +
                                                                       msg.response.request_id + "'");
            }
            values.push_back(s);
        }
        msg.response.scores.push_back(std::move(values));
    }
    return msg;
}

ScoreResponse decode_response(std::string_view line)
{
    auto msg = decode_response_message(line);
    if (msg.error) {
        throw RemoteError("scorer failed request '" + msg.response.request_id + "': " + *msg.error);
    }
    return std::move(msg.response);
}

void RequestIdRegistry::claim(const std::string& id)
{
    std::lock_guard lock(mutex_);
    if (!ids_.insert(id).second) {
        throw ProtocolError(ProtocolErrorKind::DuplicateRequestId, "request id '" + id + "' already used");
    }
}

bool RequestIdRegistry::contains(const std::string& id) const
{
    std::lock_guard lock(mutex_);
    return ids_.count(id) != 0;
}

void LineSplitter::feed(std::string_view bytes) { buffer_.append(bytes); }

std::optional<std::string> LineSplitter::next()
{
    const auto nl = buffer_.find('\n', scanned_);
    if (nl == std::string::npos) {
        scanned_ = buffer_.size();
        return std::nullopt;
    }
    std::string line = buffer_.substr(0, nl);
    buffer_.erase(0, nl + 1);
    scanned_ = 0;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return line;
}

// --- transports --------------------------------------------------------------

SocketChannel::SocketChannel(int fd, int child_pid) : fd_(fd), child_pid_(child_pid) {}

SocketChannel::~SocketChannel()
{
    ::close(fd_);
    if (child_pid_ > 0) {
        int status = 0;
        for (int i = 0; i < 200; ++i) {
            if (::waitpid(child_pid_, &status, WNOHANG) != 0) {
                return;
            }
            ::usleep(10'000);
        }
        ::kill(-child_pid_, SIGKILL);
        ::waitpid(child_pid_, &status, 0);
    }
}

void SocketChannel::write_line(std::string_view line)
{
    std::string data(line);
    data += '\n';
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw ConnectionClosed(std::string("scorer connection closed while writing: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(n);
    }
}

std::optional<std::string> SocketChannel::read_line()
{
    while (true) {
        if (auto line = splitter_.next()) {
            return line;
        }
        if (eof_) {
            return std::nullopt;
        }
        char buf[8192];
        const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
        if (n < 0 && errno == EINTR) {
            continue;
        }
        if (n <= 0) {
            eof_ = true;
            splitter_.feed("\n");  // flush an unterminated last line
            auto last = splitter_.next();
            if (last && !last->empty()) {
                return last;
            }
            return std::nullopt;
        }
        splitter_.feed(std::string_view(buf, static_cast<std::size_t>(n)));
    }
}

void SocketChannel::close_write() { ::shutdown(fd_, SHUT_WR); }

void SocketChannel::terminate()
{
    if (terminated_.exchange(true)) {
        return;
    }
    ::shutdown(fd_, SHUT_RDWR);
    if (child_pid_ > 0) {
        ::kill(-child_pid_, SIGKILL);
    }
}

std::unique_ptr<LineChannel> spawn_process(const std::string& command)
{
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
        throw ConnectionClosed(std::string("socketpair: ") + std::strerror(errno));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(sv[0]);
        ::close(sv[1]);
        throw ConnectionClosed(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(sv[1], STDIN_FILENO);
        ::dup2(sv[1], STDOUT_FILENO);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    ::close(sv[1]);
    return std::make_unique<SocketChannel>(sv[0], pid);
}

std::unique_ptr<LineChannel> connect_tcp(const std::string& host, std::uint16_t port)
{
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* result = nullptr;
    const std::string service = std::to_string(port);
    if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &result); rc != 0) {
        throw ConnectionClosed("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    int fd = -1;
    for (addrinfo* ai = result; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) {
            continue;
        }
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            break;
        }
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(result);
    if (fd < 0) {
        throw ConnectionClosed("cannot connect to " + host + ":" + service);
    }
    return std::make_unique<SocketChannel>(fd);
}

void StreamChannel::write_line(std::string_view line)
{
    out_ << line << '\n';
    out_.flush();
    if (!out_) {
        throw ConnectionClosed("output stream closed");
    }
}

std::optional<std::string> StreamChannel::read_line()
{
    std::string line;
    if (!std::getline(in_, line)) {
        return std::nullopt;
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    return line;
}

void StreamChannel::close_write() { out_.flush(); }

// --- client ------------------------------------------------------------------

ScorerClient::ScorerClient(std::unique_ptr<LineChannel> channel, std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), timeout_(timeout)
{
    std::promise<void> handshake;
    auto handshake_done = handshake.get_future();
    channel_->write_line(encode_handshake());
    reader_ = std::thread([this, hs = std::move(handshake)]() mutable {
        try {
            auto first = channel_->read_line();
            if (!first) {
                throw ConnectionClosed("scorer closed the connection before the handshake");
            }
            check_handshake(*first);
        } catch (...) {
            hs.set_exception(std::current_exception());
            return;
        }
        hs.set_value();
        reader_loop();
    });

    if (handshake_done.wait_for(timeout_) == std::future_status::timeout) {
        channel_->terminate();
        reader_.join();
        throw ScorerTimeout("no handshake from scorer within " + std::to_string(timeout_.count()) + " ms");
    }
    try {
        handshake_done.get();
    } catch (...) {
        channel_->terminate();
        reader_.join();
        throw;
    }
}

ScorerClient::~ScorerClient()
{
    try {
        channel_->close_write();
    } catch (...) {
    }
    // Give a well-behaved server the chance to drain and exit on its own.
    {
        std::unique_lock lock(mutex_);
        for (int i = 0; i < 100 && !failure_; ++i) {
            lock.unlock();
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
            lock.lock();
        }
    }
    channel_->terminate();
    if (reader_.joinable()) {
        reader_.join();
    }
}

void ScorerClient::fail_all(const std::exception_ptr& error)
{
    std::lock_guard lock(mutex_);
    if (!failure_) {
        failure_ = error;
    }
    for (auto& [id, pending] : pending_) {
        pending.promise.set_exception(error);
    }
    pending_.clear();
}

void ScorerClient::reader_loop()
{
    try {
        while (auto line = channel_->read_line()) {
            if (line->find_first_not_of(" \t") == std::string::npos) {
                continue;
            }
            ResponseMessage msg = decode_response_message(*line);
            const std::string& id = msg.response.request_id;

            std::unique_lock lock(mutex_);
            auto it = pending_.find(id);
            if (it == pending_.end()) {
                if (abandoned_.erase(id) != 0) {
                    continue;  // late answer to a request that already timed out
                }
                throw ProtocolError(ProtocolErrorKind::UnknownRequestId, "response for unknown request '" + id + "'");
            }
            Pending pending = std::move(it->second);
            pending_.erase(it);
            lock.unlock();

            if (msg.error) {
                pending.promise.set_exception(
                    std::make_exception_ptr(RemoteError("scorer failed request '" + id + "': " + *msg.error)));
                continue;
            }
            try {
                validate_response(msg.response, pending.request);
                pending.promise.set_value(std::move(msg.response));
            } catch (...) {
                pending.promise.set_exception(std::current_exception());
            }
        }
        fail_all(std::make_exception_ptr(ConnectionClosed("scorer closed the connection")));
    } catch (...) {
        fail_all(std::current_exception());
    }
}

std::future<ScoreResponse> ScorerClient::submit(const ScoreRequest& request)
{
    validate_request(request);
    std::future<ScoreResponse> future;
    {
        std::lock_guard lock(mutex_);
        if (failure_) {
            std::rethrow_exception(failure_);
        }
        ids_.claim(request.request_id);
        Pending pending{request, {}};
        future = pending.promise.get_future();
        pending_.emplace(request.request_id, std::move(pending));
    }
    try {
        std::lock_guard lock(write_mutex_);
        channel_->write_line(encode_request(request));
    } catch (...) {
        std::lock_guard lock(mutex_);
        pending_.erase(request.request_id);
        throw;
    }
    return future;
}

ScoreResponse ScorerClient::remote_score(const ScoreRequest& request, std::optional<std::chrono::milliseconds> timeout)
{
    auto future = submit(request);
    if (future.wait_for(timeout.value_or(timeout_)) == std::future_status::timeout) {
        std::lock_guard lock(mutex_);
        if (pending_.erase(request.request_id) != 0) {
            abandoned_.insert(request.request_id);
            throw ScorerTimeout("request '" + request.request_id + "' timed out after " +
                                std::to_string(timeout.value_or(timeout_).count()) + " ms");
        }
    }
    return future.get();
}

ScoreResponse ScorerClient::score(const ScoreRequest& request)
{
    ScoreRequest wire = request;
    wire.request_id = "r" + std::to_string(next_id_.fetch_add(1));
    while (ids_.contains(wire.request_id)) {
        wire.request_id = "r" + std::to_string(next_id_.fetch_add(1));
    }
    ScoreResponse response = remote_score(wire);
    response.request_id = request.request_id;
    return response;
}

std::shared_ptr<ScorerClient> ScorerClient::spawn(const std::string& command, std::chrono::milliseconds timeout)
{
    return std::make_shared<ScorerClient>(spawn_process(command), timeout);
}

std::shared_ptr<ScorerClient> ScorerClient::tcp(const std::string& host, std::uint16_t port,
                                                std::chrono::milliseconds timeout)
{
    return std::make_shared<ScorerClient>(connect_tcp(host, port), timeout);
}

std::shared_ptr<ScorerClient> remote_connect(const std::string& endpoint, std::chrono::milliseconds timeout)
{
    constexpr std::string_view kTcp = "tcp:";
    if (endpoint.rfind(kTcp, 0) == 0) {
        const std::string rest = endpoint.substr(kTcp.size());
        const auto colon = rest.rfind(':');
        if (colon == std::string::npos) {
            throw InvalidInput("TCP endpoint must look like tcp:HOST:PORT");
        }
        int port = 0;
        try {
            port = std::stoi(rest.substr(colon + 1));
        } catch (const std::exception&) {
            port = -1;
        }
        if (port <= 0 || port > 65535) {
            throw InvalidInput("bad TCP port in '" + endpoint + "'");
        }
        return ScorerClient::tcp(rest.substr(0, colon), static_cast<std::uint16_t>(port), timeout);
    }
    return ScorerClient::spawn(endpoint, timeout);
}

ScoreResponse remote_score(ScorerClient& connection, const ScoreRequest& request, std::chrono::milliseconds timeout)
{
    return connection.remote_score(request, timeout);
}

// --- server side ---------------------------------------------------------------

void serve(LineChannel& channel, SpanScorer& scorer)
{
    channel.write_line(encode_handshake());
    auto first = channel.read_line();
    if (!first) {
        return;
    }
    check_handshake(*first);
    while (auto line = channel.read_line()) {
        if (line->find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        std::string id;
        try {
            const json j = json::parse(*line, nullptr, false);
            if (j.is_object() && j.contains("request_id") && j["request_id"].is_string()) {
                id = j["request_id"].get<std::string>();
            }
            const ScoreRequest request = decode_request(*line);
            ScoreResponse response = scorer.score(request);
            response.request_id = request.request_id;
            validate_response(response, request);
            channel.write_line(encode_response(response));
        } catch (const ConnectionClosed&) {
            throw;
        } catch (const std::exception& e) {
            channel.write_line(encode_error(id, e.what()));
        }
    }
    channel.close_write();
}

// --- conformance ---------------------------------------------------------------

namespace {

std::string random_token(std::mt19937_64& rng)
{
    static const std::vector<std::string> pieces = {"a", "e", "i", "o", "u", "k", "s", "t", "m", "l", "õ", "ä",
                                                    "ö", "ü", "š", "ž", "1", "K", "Ä", ",", "!", "-", "д", "日"};
    std::uniform_int_distribution<std::size_t> len(1, 8);
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
    std::string token;
    for (std::size_t i = len(rng); i > 0; --i) {
        token += pieces[pick(rng)];
    }
    return token;
}

ScoreRequest random_request(std::mt19937_64& rng, const std::string& id)
{
    ScoreRequest request;
    request.request_id = id;
    std::uniform_int_distribution<std::size_t> n_tokens(1, 12);
    std::uniform_int_distribution<std::size_t> n_labels(0, 6);
    const std::size_t n = n_tokens(rng);
    for (std::size_t i = 0; i < n; ++i) {
        request.tokens.push_back(random_token(rng));
    }
    std::uniform_int_distribution<std::size_t> pos(0, n - 1);
    std::uniform_int_distribution<std::size_t> n_spans(1, n);
    for (std::size_t i = n_spans(rng); i > 0; --i) {
        std::size_t a = pos(rng);
        std::size_t b = pos(rng);
        if (a > b) {
            std::swap(a, b);
        }
        request.spans.push_back({a, b});
    }
    for (std::size_t i = n_labels(rng); i > 0; --i) {
        const std::string form = random_token(rng);
        const std::string lemma = random_token(rng);
        request.labels.push_back(extract_rule_string(form, lemma));
    }
    return request;
}

}  // namespace

std::vector<ConformanceResult> run_conformance_suite(ScorerClient& client, std::size_t fuzz_requests,
                                                     std::uint64_t seed)
{
    std::vector<ConformanceResult> results;
    auto check = [&](const std::string& name, auto&& body) {
        ConformanceResult r{name, false, {}};
        try {
            r.detail = body();
            r.passed = r.detail.empty();
        } catch (const std::exception& e) {
            r.detail = e.what();
        }
        results.push_back(std::move(r));
    };
    const std::string prefix = "conformance-" + std::to_string(seed) + "-";

    results.push_back({"handshake", true, {}});

    check("request 2 spans x 3 labels", [&]() -> std::string {
        ScoreRequest req{prefix + "golden-1", {"Koera", "haukus", "."}, {{0, 0}, {1, 1}},
                         {"U|P|S-", "U|P|S-+m+a", "U0:1|P|S"}};
        const auto resp = client.remote_score(req);
        if (resp.request_id != req.request_id) {
            return "response carries id '" + resp.request_id + "'";
        }
        return resp.scores.size() == 2 && resp.scores[0].size() == 3 ? "" : "wrong shape";
    });

    check("request with zero labels", [&]() -> std::string {
        ScoreRequest req{prefix + "golden-2", {"ja", "ka"}, {{0, 0}, {1, 1}}, {}};
        const auto resp = client.remote_score(req);
        return resp.scores.size() == 2 && resp.scores[0].empty() && resp.scores[1].empty() ? ""
                                                                                           : "expected a 2x0 matrix";
    });

    check("identical requests give identical scores", [&]() -> std::string {
        ScoreRequest a{prefix + "golden-3a", {"Eesti", "keele", "sõnad"}, {{0, 0}, {1, 1}, {2, 2}},
                       {"U0:1|P|S", "U|P|S-", "U|P|S--"}};
        ScoreRequest b = a;
        b.request_id = prefix + "golden-3b";
        return client.remote_score(a).scores == client.remote_score(b).scores ? "" : "scores differ";
    });

    check("pipelined requests resolve by id", [&]() -> std::string {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
        std::vector<ScoreRequest> reqs;
        std::vector<std::future<ScoreResponse>> futures;
        for (int i = 0; i < 8; ++i) {
            reqs.push_back(random_request(rng, prefix + "pipe-" + std::to_string(i)));
            futures.push_back(client.submit(reqs.back()));
        }
        for (std::size_t i = 0; i < reqs.size(); ++i) {
            if (futures[i].wait_for(client.timeout()) == std::future_status::timeout) {
                return "request " + reqs[i].request_id + " timed out";
            }
            if (futures[i].get().request_id != reqs[i].request_id) {
                return "mismatched id for " + reqs[i].request_id;
            }
        }
        return "";
    });

    check("randomized shape/range fuzz (" + std::to_string(fuzz_requests) + " requests)", [&]() -> std::string {
        std::mt19937_64 rng(seed);
        std::size_t violations = 0;
        std::string first;
        for (std::size_t i = 0; i < fuzz_requests; ++i) {
            const auto req = random_request(rng, prefix + "fuzz-" + std::to_string(i));
            try {
                client.remote_score(req);  // the client validates shape and range
            } catch (const ProtocolError& e) {
                if (violations++ == 0) {
                    first = e.what();
                }
            }
        }
        return violations == 0 ? "" : std::to_string(violations) + " violations, first: " + first;
    });
    return results;
}

}  // namespace lemir::bridge
