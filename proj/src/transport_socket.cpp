// Copyright (c) 2026 bcastlab contributors.
// SPDX-License-Identifier: Apache-2.0

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <system_error>

#include "bcastlab/runtime.hpp"

namespace bcastlab {

namespace {

constexpr std::size_t kHeaderBytes = 16;

[[noreturn]] void throw_errno(const char* what) {
  throw std::system_error(errno, std::generic_category(), what);
}

void put_u32(std::uint8_t* out, std::uint32_t value) {
  out[0] = static_cast<std::uint8_t>(value);
  out[1] = static_cast<std::uint8_t>(value >> 8);
  out[2] = static_cast<std::uint8_t>(value >> 16);
  out[3] = static_cast<std::uint8_t>(value >> 24);
}

std::uint32_t get_u32(const std::uint8_t* in) {
  return static_cast<std::uint32_t>(in[0]) |
         static_cast<std::uint32_t>(in[1]) << 8 |
         static_cast<std::uint32_t>(in[2]) << 16 |
         static_cast<std::uint32_t>(in[3]) << 24;
}

void write_all(int fd, const std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t wrote = ::write(fd, data, size);
    if (wrote < 0) {
      if (errno == EINTR) continue;
      throw_errno("socket write");
    }
    data += wrote;
    size -= static_cast<std::size_t>(wrote);
  }
}

void read_all(int fd, std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    const ssize_t got = ::read(fd, data, size);
    if (got < 0) {
      if (errno == EINTR) continue;
      throw_errno("socket read");
    }
    if (got == 0) {
      throw std::runtime_error("socket closed mid-message");
    }
    data += got;
    size -= static_cast<std::size_t>(got);
  }
}

class OwnedFd {
 public:
  OwnedFd() = default;
  explicit OwnedFd(int fd) : fd_(fd) {}
  OwnedFd(OwnedFd&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  OwnedFd& operator=(OwnedFd&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = other.fd_;
      other.fd_ = -1;
    }
    return *this;
  }
  OwnedFd(const OwnedFd&) = delete;
  OwnedFd& operator=(const OwnedFd&) = delete;
  ~OwnedFd() { reset(); }

  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }
  int get() const { return fd_; }

 private:
  int fd_ = -1;
};

class SocketFabric;

class SocketEndpoint final : public Transport {
 public:
  SocketEndpoint(SocketFabric& fabric, int rank)
      : fabric_(fabric), rank_(rank) {}

  void send(int dst_rank, std::uint32_t chunk_id,
            std::span<const std::uint8_t> data) override;
  std::vector<std::uint8_t> recv(int src_rank,
                                 std::uint32_t chunk_id) override;

 private:
  SocketFabric& fabric_;
  int rank_;
};

// The full connection mesh is dialed up front on the constructing thread:
// every rank gets a listener, then each ordered pair (src, dst) connects to
// dst's listener in a fixed order, so accepted sockets are identified
// without a handshake. Rank threads then use each fd from one side only.
class SocketFabric final : public TransportFabric {
 public:
  SocketFabric(int n, std::uint16_t base_port) : n_(n) {
    if (n < 1) {
      throw std::invalid_argument("rank count must be >= 1");
    }
    const auto count = static_cast<std::size_t>(n);
    send_fds_.resize(count * count);
    recv_fds_.resize(count * count);

    std::vector<OwnedFd> listeners;
    std::vector<std::uint16_t> ports(count, 0);
    for (int rank = 0; rank < n; ++rank) {
      OwnedFd listener(::socket(AF_INET, SOCK_STREAM, 0));
      if (listener.get() < 0) throw_errno("socket");
      const int one = 1;
      ::setsockopt(listener.get(), SOL_SOCKET, SO_REUSEADDR, &one,
                   sizeof one);
      sockaddr_in addr{};
      addr.sin_family = AF_INET;
      addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
      addr.sin_port =
          base_port == 0 ? 0 : htons(static_cast<std::uint16_t>(base_port +
                                                                rank));
      if (::bind(listener.get(), reinterpret_cast<sockaddr*>(&addr),
                 sizeof addr) < 0) {
        throw_errno("bind");
      }
      if (::listen(listener.get(), n) < 0) throw_errno("listen");
      socklen_t len = sizeof addr;
      if (::getsockname(listener.get(), reinterpret_cast<sockaddr*>(&addr),
                        &len) < 0) {
        throw_errno("getsockname");
      }
      ports[static_cast<std::size_t>(rank)] = ntohs(addr.sin_port);
      listeners.push_back(std::move(listener));
    }

    for (int src = 0; src < n; ++src) {
      for (int dst = 0; dst < n; ++dst) {
        if (src == dst) continue;
        OwnedFd conn(::socket(AF_INET, SOCK_STREAM, 0));
        if (conn.get() < 0) throw_errno("socket");
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(ports[static_cast<std::size_t>(dst)]);
        if (::connect(conn.get(), reinterpret_cast<sockaddr*>(&addr),
                      sizeof addr) < 0) {
          throw_errno("connect");
        }
        const int one = 1;
        ::setsockopt(conn.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        OwnedFd accepted(
            ::accept(listeners[static_cast<std::size_t>(dst)].get(), nullptr,
                     nullptr));
        if (accepted.get() < 0) throw_errno("accept");
        ::setsockopt(accepted.get(), IPPROTO_TCP, TCP_NODELAY, &one,
                     sizeof one);
        at(send_fds_, src, dst) = std::move(conn);
        at(recv_fds_, dst, src) = std::move(accepted);
      }
    }

    for (int rank = 0; rank < n; ++rank) {
      endpoints_.push_back(std::make_unique<SocketEndpoint>(*this, rank));
    }
  }

  int n_ranks() const override { return n_; }

  Transport& endpoint(int rank) override {
    return *endpoints_.at(static_cast<std::size_t>(rank));
  }

  int send_fd(int src, int dst) { return at(send_fds_, src, dst).get(); }
  int recv_fd(int me, int src) { return at(recv_fds_, me, src).get(); }

 private:
  OwnedFd& at(std::vector<OwnedFd>& fds, int a, int b) {
    return fds[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) +
               static_cast<std::size_t>(b)];
  }

  int n_;
  std::vector<OwnedFd> send_fds_;
  std::vector<OwnedFd> recv_fds_;
  std::vector<std::unique_ptr<SocketEndpoint>> endpoints_;
};

void SocketEndpoint::send(int dst_rank, std::uint32_t chunk_id,
                          std::span<const std::uint8_t> data) {
  std::uint8_t header[kHeaderBytes];
  put_u32(header, static_cast<std::uint32_t>(rank_));
  put_u32(header + 4, static_cast<std::uint32_t>(dst_rank));
  put_u32(header + 8, chunk_id);
  put_u32(header + 12, static_cast<std::uint32_t>(data.size()));
  const int fd = fabric_.send_fd(rank_, dst_rank);
  write_all(fd, header, sizeof header);
  if (!data.empty()) write_all(fd, data.data(), data.size());
}

std::vector<std::uint8_t> SocketEndpoint::recv(int src_rank,
                                               std::uint32_t chunk_id) {
  const int fd = fabric_.recv_fd(rank_, src_rank);
  std::uint8_t header[kHeaderBytes];
  read_all(fd, header, sizeof header);
  const std::uint32_t src = get_u32(header);
  const std::uint32_t dst = get_u32(header + 4);
  const std::uint32_t chunk = get_u32(header + 8);
  const std::uint32_t payload_len = get_u32(header + 12);
  if (src != static_cast<std::uint32_t>(src_rank) ||
      dst != static_cast<std::uint32_t>(rank_) || chunk != chunk_id) {
    throw std::runtime_error("frame mismatch: expected (src " +
                             std::to_string(src_rank) + ", chunk " +
                             std::to_string(chunk_id) + "), got (src " +
                             std::to_string(src) + ", chunk " +
                             std::to_string(chunk) + ")");
  }
  std::vector<std::uint8_t> payload(payload_len);
  if (payload_len > 0) read_all(fd, payload.data(), payload_len);
  return payload;
}

}  // namespace

std::unique_ptr<TransportFabric> make_socket_fabric(int n,
                                                    std::uint16_t base_port) {
  return std::make_unique<SocketFabric>(n, base_port);
}

}  // namespace bcastlab
