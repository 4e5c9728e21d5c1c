#include "dragonpit/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>

namespace dragonpit {
namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw NetError(what + ": " + std::strerror(errno));
}

void write_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("send");
    }
    off += static_cast<std::size_t>(n);
  }
}

// Pops one \n-terminated line out of buf, reading more as needed.
std::optional<std::string> read_line(int fd, std::string& buf) {
  for (;;) {
    auto pos = buf.find('\n');
    if (pos != std::string::npos) {
      std::string line = buf.substr(0, pos);
      buf.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    char chunk[4096];
    ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("recv");
    }
    if (n == 0) {
      if (!buf.empty()) {  // trailing unterminated line
        std::string line;
        line.swap(buf);
        return line;
      }
      return std::nullopt;
    }
    buf.append(chunk, static_cast<std::size_t>(n));
  }
}

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw NetError("bad IPv4 address: " + host);
  return addr;
}

}  // namespace

void InprocChannel::send_line(const std::string& line) {
  for (auto& reply : session_.handle_line(line)) pending_.push_back(std::move(reply));
}

std::optional<std::string> InprocChannel::recv_line() {
  if (next_ >= pending_.size()) return std::nullopt;
  return pending_[next_++];
}

std::unique_ptr<SocketChannel> SocketChannel::connect(const std::string& host,
                                                      std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket");
  sockaddr_in addr = make_addr(host, port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    int err = errno;
    ::close(fd);
    errno = err;
    throw_errno("connect " + host + ":" + std::to_string(port));
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return std::make_unique<SocketChannel>(fd);
}

SocketChannel::~SocketChannel() { close(); }

void SocketChannel::send_line(const std::string& line) {
  if (fd_ < 0) throw NetError("send on closed channel");
  write_all(fd_, line + "\n");
}

std::optional<std::string> SocketChannel::recv_line() {
  if (fd_ < 0) return std::nullopt;
  return read_line(fd_, buf_);
}

void SocketChannel::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Server::Server(ScenarioConfig cfg, ServerOptions opts)
    : cfg_(std::move(cfg)), opts_(std::move(opts)) {}

Server::~Server() {
  stop();
  join();
}

void Server::start() {
  if (listen_fd_ >= 0) return;
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw_errno("socket");
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = make_addr(opts_.host, opts_.port);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    int err = errno;
    ::close(fd);
    errno = err;
    throw_errno("bind " + opts_.host + ":" + std::to_string(opts_.port));
  }
  if (::listen(fd, 8) != 0) {
    int err = errno;
    ::close(fd);
    errno = err;
    throw_errno("listen");
  }
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len) != 0)
    throw_errno("getsockname");
  bound_port_ = ntohs(bound.sin_port);
  listen_fd_ = fd;
}

void Server::run() {
  if (listen_fd_ < 0) start();
  int served = 0;
  while (!stopping_.load()) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;  // listener closed by stop()
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    client_fd_.store(fd);
    serve_connection(fd, served);
    client_fd_.store(-1);
    ::close(fd);
    ++served;
    if (opts_.max_sessions > 0 && served >= opts_.max_sessions) break;
  }
}

void Server::run_in_thread() {
  start();
  thread_ = std::thread([this] { run(); });
}

void Server::stop() {
  stopping_.store(true);
  int fd = listen_fd_;
  listen_fd_ = -1;
  if (fd >= 0) {
    ::shutdown(fd, SHUT_RDWR);
    ::close(fd);
  }
  int cfd = client_fd_.exchange(-1);
  if (cfd >= 0) ::shutdown(cfd, SHUT_RDWR);
}

void Server::join() {
  if (thread_.joinable()) thread_.join();
}

void Server::serve_connection(int fd, int session_index) {
  SessionOptions sopts;
  sopts.replay_dir = opts_.replay_dir;
  sopts.session_index = session_index;
  SessionEngine session(cfg_, sopts);
  std::string buf;
  try {
    for (;;) {
      auto line = read_line(fd, buf);
      if (!line) break;  // disconnect; ~SessionEngine flags a partial replay
      if (line->empty()) continue;
      for (const auto& reply : session.handle_line(*line)) write_all(fd, reply + "\n");
    }
  } catch (const NetError&) {
    // Dropped connection mid-write; treated like EOF.
  }
}

std::vector<int> scenario_hero_ids(const ScenarioConfig& cfg) {
  std::vector<int> ids;
  ids.reserve(cfg.heroes.size());
  for (const auto& slot : cfg.heroes) ids.push_back(slot.unit_id);
  return ids;
}

namespace {

template <typename T>
T expect(WireMessage msg, const char* what) {
  if (auto* m = std::get_if<T>(&msg)) return std::move(*m);
  throw ProtocolError(std::string("unexpected reply, wanted ") + what);
}

// The rule policy's deadzone in whatever units the frame uses. Raw frames
// carry map-scale coordinates, normalized ones stay within the unit box.
double frame_axis_deadzone(const FrameMsg& frame) {
  double extent = 0;
  for (const auto& o : frame.obs)
    for (int k : {0, 1, 3, 4}) extent = std::max(extent, std::abs(o[k]));
  return extent > 2.0 ? kRuleAxisDeadzone : kRuleAxisDeadzone / kMapHalfExtent;
}

}  // namespace

ClientRunSummary run_client(MessageChannel& channel, const ClientOptions& opts) {
  ClientRunSummary out;
  SeededRng rng(mix_seed(opts.seed, 0x636c69656e74ULL));  // "client"

  auto send = [&](const WireMessage& msg) { channel.send_line(encode_message(msg)); };
  auto recv = [&]() -> WireMessage {
    auto line = channel.recv_line();
    if (!line) throw ProtocolError("connection closed by server");
    if (opts.keep_transcript) out.transcript.push_back(*line);
    WireMessage msg = decode_message(*line);
    if (const auto* err = std::get_if<ErrorMsg>(&msg))
      throw ProtocolError("server error [" + err->code + "] " + err->message);
    return msg;
  };

  HelloMsg hello;
  hello.hero_ids = opts.hero_ids;
  send(hello);
  auto ack = expect<HelloAckMsg>(recv(), "hello_ack");
  if (ack.n_agents != static_cast<int>(opts.hero_ids.size()))
    throw ProtocolError("hello_ack agent count mismatch");

  for (int episode = 0; episode < opts.episodes; ++episode) {
    ResetMsg reset;
    reset.seed = mix_seed(opts.seed, static_cast<std::uint64_t>(episode));
    send(reset);
    auto frame = expect<FrameMsg>(recv(), "frame");

    for (;;) {
      ActionsMsg act;
      act.episode_id = frame.episode_id;
      act.step_index = frame.step_index;
      act.actions.resize(frame.obs.size());
      double deadzone = frame_axis_deadzone(frame);
      for (std::size_t a = 0; a < frame.obs.size(); ++a) {
        act.actions[a] = opts.policy == ClientPolicy::rule
                             ? rule_policy(frame.obs[a], frame.avail_actions[a], deadzone)
                             : random_policy(frame.avail_actions[a], rng);
      }
      send(act);

      auto step = expect<StepAckMsg>(recv(), "step_ack");
      out.steps += 1;
      out.total_reward += step.reward;
      out.total_damage += step.step_damage;
      frame = expect<FrameMsg>(recv(), "frame");
      if (step.terminated || step.truncated) {
        auto end = expect<EpisodeEndMsg>(recv(), "episode_end");
        out.dragon_dead_any = out.dragon_dead_any || end.dragon_dead;
        break;
      }
    }
    out.episodes += 1;
  }
  return out;
}

}  // namespace dragonpit
