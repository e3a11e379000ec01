#include "ucorrect/external_scorer.hpp"

#include <atomic>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <future>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "ucorrect/error.hpp"

extern char** environ;

namespace ucorrect {

std::string encode_request(std::uint64_t id, std::span<const Token> tokens,
                           std::size_t mask_index, std::size_t top_l, std::string_view orig) {
  nlohmann::ordered_json req;
  req["id"] = id;
  nlohmann::json texts = nlohmann::json::array();
  for (const auto& t : tokens) texts.push_back(t.text);
  req["tokens"] = std::move(texts);
  req["mask_index"] = mask_index;
  req["top_l"] = top_l;
  req["orig"] = std::string(orig);
  return req.dump();
}

namespace {

[[noreturn]] void protocol_error(const std::string& what) {
  throw Error(ErrorCode::kProtocolError, what);
}

double checked_prob(const nlohmann::json& v, const char* field) {
  if (!v.is_number()) protocol_error(std::string(field) + " is not a number");
  double p = v.get<double>();
  if (!(p >= 0.0 && p <= 1.0)) {
    protocol_error(std::string(field) + " outside [0, 1]: " + v.dump());
  }
  return p;
}

}  // namespace

ScorerResponse decode_response(std::string_view line) {
  nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) protocol_error("malformed response line");
  if (doc.contains("error")) {
    std::string id = doc.contains("id") ? doc["id"].dump() : "null";
    protocol_error("adapter error for id " + id + ": " +
                   (doc["error"].is_string() ? doc["error"].get<std::string>()
                                             : doc["error"].dump()));
  }
  if (!doc.contains("id") || !doc["id"].is_number_unsigned()) {
    protocol_error("response id missing or not a non-negative integer");
  }
  ScorerResponse out;
  out.id = doc["id"].get<std::uint64_t>();
  if (!doc.contains("prob_orig")) protocol_error("response lacks prob_orig");
  out.prob_orig = checked_prob(doc["prob_orig"], "prob_orig");
  if (doc.contains("top")) {
    const auto& top = doc["top"];
    if (!top.is_array()) protocol_error("top is not an array");
    for (const auto& entry : top) {
      if (entry.is_array() && entry.size() == 2 && entry[0].is_string()) {
        out.top.emplace_back(entry[0].get<std::string>(), checked_prob(entry[1], "top prob"));
      } else if (entry.is_object() && entry.contains("token") && entry["token"].is_string() &&
                 entry.contains("prob")) {
        out.top.emplace_back(entry["token"].get<std::string>(),
                             checked_prob(entry["prob"], "top prob"));
      } else {
        protocol_error("malformed top entry: " + entry.dump());
      }
    }
  }
  return out;
}

void check_handshake(std::string_view line) {
  nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("hello") ||
      doc["hello"] != kScorerHello || !doc.contains("version")) {
    protocol_error("bad handshake: " + std::string(line));
  }
  if (doc["version"] != kScorerProtocolVersion) {
    protocol_error("unsupported scorer protocol version " + doc["version"].dump());
  }
}

struct ExternalScorer::Channel {
  int read_fd = -1;
  int write_fd = -1;
  pid_t pid = -1;
  int wake[2] = {-1, -1};
  std::string buffer;

  std::mutex write_mu;
  std::mutex mu;
  std::unordered_map<std::uint64_t, std::promise<ScorerResponse>> pending;
  std::unordered_set<std::uint64_t> abandoned;
  std::exception_ptr broken;
  std::atomic<std::uint64_t> next_id{1};
  std::thread reader;

  ~Channel() {
    if (wake[1] >= 0) {
      char c = 0;
      [[maybe_unused]] auto n = ::write(wake[1], &c, 1);
    }
    if (reader.joinable()) reader.join();
    if (write_fd >= 0 && write_fd != read_fd) ::close(write_fd);
    if (read_fd >= 0) ::close(read_fd);
    for (int fd : wake) {
      if (fd >= 0) ::close(fd);
    }
    if (pid > 0) {
      // stdin is closed, so a well-behaved adapter exits on its own.
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid, nullptr, WNOHANG) == pid) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
      ::kill(pid, SIGKILL);
      ::waitpid(pid, nullptr, 0);
    }
  }

  // Next complete line, or nullopt on EOF / wake-up. timeout < 0 blocks.
  std::optional<std::string> read_line(int timeout_ms) {
    while (true) {
      auto nl = buffer.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      pollfd fds[2] = {{read_fd, POLLIN, 0}, {wake[0], POLLIN, 0}};
      int rc = ::poll(fds, 2, timeout_ms);
      if (rc < 0 && errno == EINTR) continue;
      if (rc == 0) throw Error(ErrorCode::kTimeout, "no data from scorer");
      if (rc < 0 || (fds[1].revents & POLLIN)) return std::nullopt;
      char chunk[4096];
      ssize_t n = ::read(read_fd, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) return std::nullopt;
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void fail_all(std::exception_ptr err) {
    std::lock_guard lock(mu);
    if (!broken) broken = err;
    for (auto& [id, promise] : pending) promise.set_exception(broken);
    pending.clear();
  }

  // An adapter error naming a pending id fails only that request.
  bool fail_one(const std::string& line) {
    auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("error") ||
        !doc.contains("id") || !doc["id"].is_number_unsigned()) {
      return false;
    }
    std::lock_guard lock(mu);
    auto it = pending.find(doc["id"].get<std::uint64_t>());
    if (it == pending.end()) return abandoned.erase(doc["id"].get<std::uint64_t>()) > 0;
    it->second.set_exception(std::make_exception_ptr(
        Error(ErrorCode::kProtocolError, "adapter error: " + doc["error"].dump())));
    pending.erase(it);
    return true;
  }

  void run_reader() {
    try {
      while (auto line = read_line(-1)) {
        if (line->empty()) continue;
        ScorerResponse resp;
        try {
          resp = decode_response(*line);
        } catch (const Error&) {
          if (!fail_one(*line)) throw;
          continue;
        }
        std::lock_guard lock(mu);
        auto it = pending.find(resp.id);
        if (it != pending.end()) {
          it->second.set_value(std::move(resp));
          pending.erase(it);
        } else if (abandoned.erase(resp.id) == 0) {
          protocol_error("response for unknown id " + std::to_string(resp.id));
        }
      }
      fail_all(std::make_exception_ptr(Error(ErrorCode::kProcessExited, "scorer closed its output")));
    } catch (...) {
      fail_all(std::current_exception());
    }
  }

  void write_line(const std::string& line) {
    std::lock_guard lock(write_mu);
    std::string data = line + "\n";
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
      ssize_t n = ::send(write_fd, p, left, MSG_NOSIGNAL);
      if (n < 0 && errno == ENOTSOCK) n = ::write(write_fd, p, left);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw Error(ErrorCode::kProcessExited, "cannot write to scorer");
      p += n;
      left -= static_cast<std::size_t>(n);
    }
  }

  void start(std::chrono::milliseconds timeout) {
    if (::pipe2(wake, O_CLOEXEC) != 0) throw Error(ErrorCode::kIo, "pipe2 failed");
    std::optional<std::string> hello;
    try {
      hello = read_line(static_cast<int>(timeout.count()));
    } catch (const Error& e) {
      throw Error(e.code(), "waiting for scorer handshake");
    }
    if (!hello) throw Error(ErrorCode::kProcessExited, "scorer exited before its handshake");
    check_handshake(*hello);
    reader = std::thread([this] { run_reader(); });
  }
};

ExternalScorer::ExternalScorer(std::unique_ptr<Channel> channel, Vocab vocab,
                               ExternalScorerOptions options)
    : channel_(std::move(channel)), vocab_(std::move(vocab)), options_(options) {}

ExternalScorer::~ExternalScorer() = default;

std::unique_ptr<ExternalScorer> ExternalScorer::spawn(const std::string& command, Vocab vocab,
                                                      ExternalScorerOptions options) {
  // Writes to a dead adapter must surface as errors, not kill the process.
  std::signal(SIGPIPE, SIG_IGN);

  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw Error(ErrorCode::kIo, "pipe2 failed");
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw Error(ErrorCode::kIo, "pipe2 failed");
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);

  const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
  pid_t pid = -1;
  int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char**>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(to_child[0]);
  ::close(from_child[1]);
  if (rc != 0) {
    ::close(to_child[1]);
    ::close(from_child[0]);
    throw Error(ErrorCode::kIo, "cannot spawn scorer: " + std::string(std::strerror(rc)));
  }

  auto channel = std::make_unique<Channel>();
  channel->read_fd = from_child[0];
  channel->write_fd = to_child[1];
  channel->pid = pid;
  channel->start(options.timeout);
  return std::unique_ptr<ExternalScorer>(
      new ExternalScorer(std::move(channel), std::move(vocab), options));
}

std::unique_ptr<ExternalScorer> ExternalScorer::connect(const std::string& host,
                                                        std::uint16_t port, Vocab vocab,
                                                        ExternalScorerOptions options) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorCode::kIo, "cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(ErrorCode::kIo, "cannot connect to " + host + ":" + service);

  auto channel = std::make_unique<Channel>();
  channel->read_fd = fd;
  channel->write_fd = fd;
  channel->start(options.timeout);
  return std::unique_ptr<ExternalScorer>(
      new ExternalScorer(std::move(channel), std::move(vocab), options));
}

ScorerResponse ExternalScorer::roundtrip(const MaskedSeq& m, std::string_view orig,
                                         std::size_t top_l) const {
  Channel& ch = *channel_;
  const std::uint64_t id = ch.next_id.fetch_add(1);
  std::future<ScorerResponse> reply;
  {
    std::lock_guard lock(ch.mu);
    if (ch.broken) std::rethrow_exception(ch.broken);
    reply = ch.pending[id].get_future();
  }
  try {
    ch.write_line(encode_request(id, m.base(), m.mask_index(), top_l, orig));
  } catch (...) {
    std::lock_guard lock(ch.mu);
    ch.pending.erase(id);
    throw;
  }

  if (reply.wait_for(options_.timeout) != std::future_status::ready) {
    std::lock_guard lock(ch.mu);
    if (ch.pending.erase(id) > 0) {
      ch.abandoned.insert(id);
      throw Error(ErrorCode::kTimeout, "no response for request " + std::to_string(id));
    }
  }
  ScorerResponse resp = reply.get();
  if (resp.top.size() > top_l) {
    throw Error(ErrorCode::kProtocolError, "response carries more than top_l candidates");
  }
  return resp;
}

double ExternalScorer::prob(const MaskedSeq& m, TokenId t) const {
  require_regular(vocab_, t);
  return roundtrip(m, vocab_.text_of(t), 0).prob_orig;
}

std::vector<TokenProb> ExternalScorer::top_candidates(const MaskedSeq& m, std::size_t l) const {
  auto resp = roundtrip(m, m.masked_token().text, l);
  std::vector<TokenProb> out;
  out.reserve(resp.top.size());
  for (auto& [text, p] : resp.top) out.push_back({vocab_.token_for(text), p});
  rank_candidates(out, l);
  return out;
}

}  // namespace ucorrect
