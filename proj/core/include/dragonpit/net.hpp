#pragma once

#include <atomic>
#include <functional>
#include <thread>

#include "dragonpit/policies.hpp"
#include "dragonpit/protocol.hpp"

namespace dragonpit {

struct NetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Byte-level line channel. The client logic runs against this, so a TCP
// socket and a direct in-process session are interchangeable.
class MessageChannel {
 public:
  virtual ~MessageChannel() = default;
  virtual void send_line(const std::string& line) = 0;
  // Next server line; empty optional on orderly close.
  virtual std::optional<std::string> recv_line() = 0;
};

// Loops the line through a SessionEngine in this process.
class InprocChannel : public MessageChannel {
 public:
  InprocChannel(const ScenarioConfig& cfg, SessionOptions opts)
      : session_(cfg, std::move(opts)) {}
  void send_line(const std::string& line) override;
  std::optional<std::string> recv_line() override;
  SessionEngine& session() { return session_; }

 private:
  SessionEngine session_;
  std::vector<std::string> pending_;
  std::size_t next_ = 0;
};

// Blocking TCP line channel (client side).
class SocketChannel : public MessageChannel {
 public:
  static std::unique_ptr<SocketChannel> connect(const std::string& host,
                                                std::uint16_t port);
  explicit SocketChannel(int fd) : fd_(fd) {}
  ~SocketChannel() override;
  void send_line(const std::string& line) override;
  std::optional<std::string> recv_line() override;
  void close();

 private:
  int fd_ = -1;
  std::string buf_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0: pick an ephemeral port
  std::string replay_dir;
  int max_sessions = 0;  // 0: serve until stopped
};

// Single-connection-at-a-time JSON-lines server.
class Server {
 public:
  Server(ScenarioConfig cfg, ServerOptions opts);
  ~Server();

  void start();                 // bind + listen
  std::uint16_t port() const { return bound_port_; }
  void run();                   // accept loop; returns after stop()/max_sessions
  void run_in_thread();
  void stop();                  // closes the listener and any live connection
  void join();

 private:
  void serve_connection(int fd, int session_index);

  ScenarioConfig cfg_;
  ServerOptions opts_;
  int listen_fd_ = -1;
  std::atomic<int> client_fd_{-1};
  std::atomic<bool> stopping_{false};
  std::uint16_t bound_port_ = 0;
  std::thread thread_;
};

enum class ClientPolicy { random, rule };

struct ClientOptions {
  std::vector<int> hero_ids;
  int episodes = 1;
  std::uint64_t seed = 1;          // episode e uses mix_seed(seed, e)
  ClientPolicy policy = ClientPolicy::rule;
  bool keep_transcript = false;    // record server reply lines byte-for-byte
};

struct ClientRunSummary {
  int episodes = 0;
  int steps = 0;
  double total_reward = 0;
  long long total_damage = 0;
  bool dragon_dead_any = false;
  std::vector<std::string> transcript;
};

// Drives the full protocol: hello, then per episode reset/actions until
// episode_end. Throws ProtocolError on server errors or early close.
ClientRunSummary run_client(MessageChannel& channel, const ClientOptions& opts);

std::vector<int> scenario_hero_ids(const ScenarioConfig& cfg);

}  // namespace dragonpit
