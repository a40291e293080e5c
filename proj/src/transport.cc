#include "ibcs/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "ibcs/error.h"
#include "ibcs/instance_io.h"

namespace ibcs {

bool IsKnownFrameTag(uint8_t tag) {
  switch (tag) {
    case 0x01:
    case 0x02:
    case 0x03:
    case 0x04:
    case 0x10:
    case 0x11:
      return true;
    default:
      return false;
  }
}

std::string FrameTagName(FrameTag tag) {
  switch (tag) {
    case FrameTag::kCommit:
      return "commit";
    case FrameTag::kChallenge:
      return "challenge";
    case FrameTag::kFinalResponse:
      return "final-response";
    case FrameTag::kDecision:
      return "decision";
    case FrameTag::kInstance:
      return "instance";
    case FrameTag::kParams:
      return "params";
  }
  return "unknown";
}

void AppendFrame(Bytes& out, const Frame& frame) {
  if (frame.payload.size() > kMaxFramePayload) throw InvalidMessage("frame payload too large");
  PutU32(out, static_cast<uint32_t>(frame.payload.size()));
  PutU8(out, static_cast<uint8_t>(frame.tag));
  PutBytes(out, frame.payload);
}

Bytes EncodeFrame(const Frame& frame) {
  Bytes out;
  out.reserve(frame.WireSize());
  AppendFrame(out, frame);
  return out;
}

Frame DecodeFrame(ByteReader& in) {
  const size_t start = in.offset();
  const uint32_t length = in.U32();
  if (length > kMaxFramePayload) throw DecodeError("frame length exceeds limit", start);
  const uint8_t tag = in.U8();
  if (!IsKnownFrameTag(tag)) throw DecodeError("unknown frame tag " + std::to_string(tag), start + 4);
  const ByteSpan payload = in.Take(length);
  return Frame{static_cast<FrameTag>(tag), Bytes(payload.begin(), payload.end())};
}

std::vector<Frame> DecodeFrames(ByteSpan data) {
  ByteReader in(data);
  std::vector<Frame> frames;
  while (!in.done()) frames.push_back(DecodeFrame(in));
  return frames;
}

Bytes EncodeFrames(const std::vector<Frame>& frames) {
  Bytes out;
  for (const Frame& f : frames) AppendFrame(out, f);
  return out;
}

Bytes EncodeCommitMessage(const Digest& root) { return Bytes(root.begin(), root.end()); }

Digest DecodeCommitMessage(ByteSpan payload) {
  if (payload.size() != kDigestSize)
    throw DecodeError("commitment must be " + std::to_string(kDigestSize) + " bytes", std::min(payload.size(), kDigestSize));
  Digest root;
  std::copy(payload.begin(), payload.end(), root.begin());
  return root;
}

Bytes EncodeChallengeMessage(const Challenge& c) {
  if (!c.WellFormed()) throw InvalidMessage("malformed challenge");
  return c.data;
}

Challenge DecodeChallengeMessage(ByteSpan payload, uint64_t bits) {
  const size_t expected = (bits + 7) / 8;
  if (payload.size() != expected) throw DecodeError("challenge has wrong length", std::min(payload.size(), expected));
  Challenge c{bits, Bytes(payload.begin(), payload.end())};
  if (!c.WellFormed()) throw DecodeError("challenge padding bits are not zero", expected - 1);
  return c;
}

namespace {

Symbol SymbolMask(unsigned bits) { return bits >= 64 ? ~Symbol{0} : (Symbol{1} << bits) - 1; }

void CheckResponseShape(const ArgParams& pp, const FinalResponse& response) {
  const IopSpec& spec = pp.spec;
  if (response.size() != spec.rounds) throw InvalidMessage("response must hold one opening per round");
  for (size_t i = 0; i < spec.rounds; ++i) {
    const vc::Opening& op = response[i];
    const std::string where = "round " + std::to_string(i + 1) + ": ";
    if (op.positions.size() != spec.query_counts[i] || op.answers.size() != spec.query_counts[i])
      throw InvalidMessage(where + "opening size differs from q_i");
    uint64_t prev = 0;
    for (uint64_t pos : op.positions) {
      if (pos <= prev || pos > spec.proof_lengths[i]) throw InvalidMessage(where + "positions not encodable");
      prev = pos;
    }
    for (Symbol s : op.answers)
      if (s & ~SymbolMask(spec.symbol_bits)) throw InvalidMessage(where + "symbol wider than symbol_bits");
    if (op.proof.size() != vc::ProofLength(pp.vc, op.positions))
      throw InvalidMessage(where + "proof length is not the canonical one");
  }
}

}  // namespace

EncodedResponse EncodeFinalResponse(const ArgParams& pp, const FinalResponse& response) {
  CheckResponseShape(pp, response);
  const IopSpec& spec = pp.spec;
  EncodedResponse enc;
  BitWriter w;
  for (size_t i = 0; i < spec.rounds; ++i) {
    const vc::Opening& op = response[i];
    const unsigned pos_bits = CeilLog2(spec.proof_lengths[i]);
    const size_t before = w.bit_count();
    for (size_t j = 0; j < op.positions.size(); ++j) {
      w.Write(op.positions[j] - 1, pos_bits);
      w.Write(op.answers[j], spec.symbol_bits);
    }
    const size_t mid = w.bit_count();
    for (const Digest& d : op.proof) w.WriteBytes(ByteSpan(d.data(), d.size()));
    enc.answer_bits.push_back(mid - before);
    enc.proof_bits.push_back(w.bit_count() - mid);
  }
  enc.content_bits = w.bit_count();
  enc.payload = w.Finish();
  return enc;
}

FinalResponse DecodeFinalResponse(const ArgParams& pp, ByteSpan payload) {
  const IopSpec& spec = pp.spec;
  BitReader r(payload);
  FinalResponse response(spec.rounds);
  for (size_t i = 0; i < spec.rounds; ++i) {
    vc::Opening& op = response[i];
    const unsigned pos_bits = CeilLog2(spec.proof_lengths[i]);
    uint64_t prev = 0;
    for (uint64_t j = 0; j < spec.query_counts[i]; ++j) {
      const size_t at = r.bit_offset() / 8;
      const uint64_t pos = r.Read(pos_bits) + 1;
      if (pos > spec.proof_lengths[i]) throw DecodeError("position beyond the proof string", at);
      if (pos <= prev) throw DecodeError("positions not strictly increasing", at);
      prev = pos;
      op.positions.push_back(pos);
      op.answers.push_back(r.Read(spec.symbol_bits));
    }
    const size_t n = vc::ProofLength(pp.vc, op.positions);
    for (size_t j = 0; j < n; ++j) {
      const Bytes raw = r.ReadBytes(kDigestSize);
      Digest d;
      std::copy(raw.begin(), raw.end(), d.begin());
      op.proof.push_back(d);
    }
  }
  r.ExpectEnd();
  return response;
}

Bytes EncodeDecision(bool accept) { return Bytes{static_cast<uint8_t>(accept ? 1 : 0)}; }

bool DecodeDecision(ByteSpan payload) {
  if (payload.size() != 1) throw DecodeError("decision must be one byte", 0);
  if (payload[0] > 1) throw DecodeError("decision byte must be 0 or 1", 0);
  return payload[0] == 1;
}

Bytes EncodeCommitment(const vc::Commitment& cm) {
  Bytes out(cm.root.begin(), cm.root.end());
  PutU64(out, cm.length);
  return out;
}

vc::Commitment DecodeCommitment(ByteSpan data) {
  ByteReader in(data);
  vc::Commitment cm;
  const ByteSpan root = in.Take(kDigestSize);
  std::copy(root.begin(), root.end(), cm.root.begin());
  cm.length = in.U64();
  in.ExpectEnd();
  return cm;
}

Bytes EncodeOpening(const vc::VcParams& params, const vc::Opening& op) {
  if (op.answers.size() != op.positions.size()) throw InvalidMessage("answers and positions differ in count");
  if (op.positions.size() > UINT32_MAX || op.proof.size() > UINT32_MAX) throw InvalidMessage("opening too large");
  Bytes out;
  PutU32(out, static_cast<uint32_t>(op.positions.size()));
  for (uint64_t pos : op.positions) {
    if (pos > UINT32_MAX) throw InvalidMessage("position does not fit 4 bytes");
    PutU32(out, static_cast<uint32_t>(pos));
  }
  for (Symbol s : op.answers) {
    if (s > params.max_symbol()) throw InvalidMessage("symbol wider than symbol_bits");
    PutUintBE(out, s, params.symbol_bytes());
  }
  PutU32(out, static_cast<uint32_t>(op.proof.size()));
  for (const Digest& d : op.proof) PutBytes(out, ByteSpan(d.data(), d.size()));
  return out;
}

vc::Opening DecodeOpening(const vc::VcParams& params, ByteSpan data) {
  ByteReader in(data);
  vc::Opening op;
  const size_t count_at = in.offset();
  const uint32_t count = in.U32();
  if (count > in.remaining() / 4) throw DecodeError("position count exceeds payload", count_at);
  uint64_t prev = 0;
  for (uint32_t j = 0; j < count; ++j) {
    const size_t at = in.offset();
    const uint64_t pos = in.U32();
    if (pos <= prev) throw DecodeError("positions not strictly increasing", at);
    prev = pos;
    op.positions.push_back(pos);
  }
  for (uint32_t j = 0; j < count; ++j) {
    const size_t at = in.offset();
    const Symbol s = in.UintBE(params.symbol_bytes());
    if (s > params.max_symbol()) throw DecodeError("symbol wider than symbol_bits", at);
    op.answers.push_back(s);
  }
  const size_t proof_at = in.offset();
  const uint32_t n = in.U32();
  if (n > in.remaining() / kDigestSize) throw DecodeError("proof count exceeds payload", proof_at);
  for (uint32_t j = 0; j < n; ++j) {
    const ByteSpan raw = in.Take(kDigestSize);
    Digest d;
    std::copy(raw.begin(), raw.end(), d.begin());
    op.proof.push_back(d);
  }
  in.ExpectEnd();
  return op;
}

void Channel::Send(const Frame& frame) {
  Bytes raw = EncodeFrame(frame);
  const size_t n = raw.size();
  SendBytes(std::move(raw));
  bytes_sent_ += n;
}

Frame Channel::Receive() {
  const Bytes raw = ReceiveBytes();
  ByteReader in(raw);
  Frame f = DecodeFrame(in);
  in.ExpectEnd();
  bytes_received_ += raw.size();
  return f;
}

namespace {

struct MemoryPipe {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Bytes> queues[2];
  bool closed = false;
};

class MemoryChannel final : public Channel {
 public:
  MemoryChannel(std::shared_ptr<MemoryPipe> pipe, int side, std::chrono::milliseconds timeout)
      : pipe_(std::move(pipe)), side_(side), timeout_(timeout) {}
  ~MemoryChannel() override { Close(); }

  void Close() override {
    std::lock_guard lock(pipe_->mu);
    pipe_->closed = true;
    pipe_->cv.notify_all();
  }

 protected:
  void SendBytes(Bytes frame) override {
    std::lock_guard lock(pipe_->mu);
    if (pipe_->closed) throw TransportError("channel closed");
    pipe_->queues[1 - side_].push_back(std::move(frame));
    pipe_->cv.notify_all();
  }

  Bytes ReceiveBytes() override {
    std::unique_lock lock(pipe_->mu);
    auto& q = pipe_->queues[side_];
    if (!pipe_->cv.wait_for(lock, timeout_, [&] { return !q.empty() || pipe_->closed; }))
      throw TransportError("receive timed out");
    if (q.empty()) throw TransportError("channel closed by peer");
    Bytes out = std::move(q.front());
    q.pop_front();
    return out;
  }

 private:
  std::shared_ptr<MemoryPipe> pipe_;
  int side_;
  std::chrono::milliseconds timeout_;
};

class TcpChannel final : public Channel {
 public:
  TcpChannel(int fd, std::chrono::milliseconds timeout) : fd_(fd) {
    int one = 1;
    setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    timeval tv{};
    tv.tv_sec = timeout.count() / 1000;
    tv.tv_usec = (timeout.count() % 1000) * 1000;
    setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  }
  ~TcpChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void Close() override {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  }

 protected:
  void SendBytes(Bytes frame) override {
    size_t done = 0;
    while (done < frame.size()) {
      const ssize_t n = ::send(fd_, frame.data() + done, frame.size() - done, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("send failed: ") + std::strerror(errno));
      }
      done += static_cast<size_t>(n);
    }
  }

  Bytes ReceiveBytes() override {
    Bytes frame(kFrameHeaderSize);
    ReadExact(frame.data(), kFrameHeaderSize);
    const uint32_t length = (uint32_t{frame[0]} << 24) | (uint32_t{frame[1]} << 16) | (uint32_t{frame[2]} << 8) |
                            uint32_t{frame[3]};
    if (length > kMaxFramePayload) throw DecodeError("frame length exceeds limit", 0);
    frame.resize(kFrameHeaderSize + length);
    ReadExact(frame.data() + kFrameHeaderSize, length);
    return frame;
  }

 private:
  void ReadExact(uint8_t* out, size_t n) {
    size_t done = 0;
    while (done < n) {
      const ssize_t got = ::recv(fd_, out + done, n - done, 0);
      if (got == 0) throw TransportError("connection closed by peer");
      if (got < 0) {
        if (errno == EINTR) continue;
        if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportError("receive timed out");
        throw TransportError(std::string("recv failed: ") + std::strerror(errno));
      }
      done += static_cast<size_t>(got);
    }
  }

  int fd_;
};

addrinfo* Resolve(const std::string& host, uint16_t port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  const int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &res);
  if (rc != 0) throw TransportError("cannot resolve " + host + ": " + gai_strerror(rc));
  return res;
}

}  // namespace

ChannelPair MakeMemoryChannelPair(std::chrono::milliseconds timeout) {
  auto pipe = std::make_shared<MemoryPipe>();
  return {std::make_unique<MemoryChannel>(pipe, 0, timeout), std::make_unique<MemoryChannel>(pipe, 1, timeout)};
}

std::unique_ptr<Channel> TcpConnect(const std::string& host, uint16_t port, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string last_error;
  while (true) {
    addrinfo* res = Resolve(host, port, false);
    for (addrinfo* a = res; a; a = a->ai_next) {
      const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
        freeaddrinfo(res);
        return std::make_unique<TcpChannel>(fd, timeout);
      }
      last_error = std::strerror(errno);
      ::close(fd);
    }
    freeaddrinfo(res);
    if (std::chrono::steady_clock::now() >= deadline)
      throw TransportError("cannot connect to " + host + ":" + std::to_string(port) + ": " + last_error);
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

TcpListener::TcpListener(const std::string& host, uint16_t port) {
  addrinfo* res = Resolve(host, port, true);
  std::string last_error = "no address";
  for (addrinfo* a = res; a; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    int one = 1;
    setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 16) == 0) {
      fd_ = fd;
      break;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  freeaddrinfo(res);
  if (fd_ < 0) throw TransportError("cannot listen on " + host + ":" + std::to_string(port) + ": " + last_error);
  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  if (addr.ss_family == AF_INET) {
    port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  } else {
    port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  }
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Channel> TcpListener::Accept(std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  const int rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (rc == 0) throw TransportError("accept timed out");
  if (rc < 0) throw TransportError(std::string("poll failed: ") + std::strerror(errno));
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) throw TransportError(std::string("accept failed: ") + std::strerror(errno));
  return std::make_unique<TcpChannel>(fd, timeout);
}

std::pair<std::string, uint16_t> ParseEndpoint(const std::string& text) {
  const size_t colon = text.rfind(':');
  if (colon == std::string::npos) throw InvalidParameter("endpoint must be host:port");
  const std::string port_text = text.substr(colon + 1);
  size_t used = 0;
  unsigned long port = 0;
  try {
    port = std::stoul(port_text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != port_text.size() || port > 65535) throw InvalidParameter("bad port in " + text);
  std::string host = text.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  return {host, static_cast<uint16_t>(port)};
}

namespace {

Frame Expect(Channel& ch, SessionResult& res, FrameTag tag) {
  Frame f = ch.Receive();
  res.frames.push_back(f);
  if (f.tag != tag)
    throw ProtocolViolation("expected " + FrameTagName(tag) + " frame, got " + FrameTagName(f.tag));
  return f;
}

void Post(Channel& ch, SessionResult& res, Frame f) {
  res.frames.push_back(f);
  ch.Send(f);
}

void CountCommit(WireStats& w, size_t payload_bytes) {
  w.commitment_bits.push_back(8 * kDigestSize);
  w.prover_to_verifier_bits += 8 * kDigestSize;
  w.prover_padding_bits += 8 * payload_bytes - 8 * kDigestSize;
  w.prover_protocol_bytes += kFrameHeaderSize + payload_bytes;
  ++w.protocol_frames;
}

void CountChallenge(WireStats& w, const Challenge& c) {
  w.challenge_bits.push_back(c.bits);
  w.verifier_to_prover_bits += c.bits;
  w.verifier_padding_bits += 8 * c.data.size() - c.bits;
  w.verifier_protocol_bytes += kFrameHeaderSize + c.data.size();
  ++w.protocol_frames;
}

void CountResponse(WireStats& w, const EncodedResponse& enc) {
  w.answer_bits = enc.answer_bits;
  w.proof_bits = enc.proof_bits;
  w.prover_to_verifier_bits += enc.content_bits;
  w.prover_padding_bits += 8 * enc.payload.size() - enc.content_bits;
  w.prover_protocol_bytes += kFrameHeaderSize + enc.payload.size();
  ++w.protocol_frames;
}

}  // namespace

SessionResult RunVerifierSession(Channel& channel, const ArgParams& pp, std::shared_ptr<const Iop> iop,
                                 uint64_t session_seed) {
  SessionResult res;
  ArgVerifier verifier(pp, iop, session_seed);
  bool decided = false;
  try {
    const Frame params = Expect(channel, res, FrameTag::kParams);
    if (params.payload != pp.Serialize()) throw ProtocolViolation("prover uses different public parameters");
    const Frame instance = Expect(channel, res, FrameTag::kInstance);
    if (instance.payload != iop->EncodeInstance()) throw ProtocolViolation("prover uses a different instance");
    for (size_t i = 0; i < pp.spec.rounds; ++i) {
      const Frame f = Expect(channel, res, FrameTag::kCommit);
      verifier.OnCommitment(DecodeCommitMessage(f.payload));
      CountCommit(res.wire, f.payload.size());
      const Challenge c = verifier.NextChallenge();
      CountChallenge(res.wire, c);
      Post(channel, res, Frame{FrameTag::kChallenge, EncodeChallengeMessage(c)});
    }
    const Frame f = Expect(channel, res, FrameTag::kFinalResponse);
    FinalResponse response = DecodeFinalResponse(pp, f.payload);
    CountResponse(res.wire, EncodeFinalResponse(pp, response));
    verifier.OnResponse(std::move(response));
    decided = true;
    res.accept = verifier.decision();
    res.diagnostic = verifier.diagnostic();
  } catch (const std::exception& e) {
    res.aborted = true;
    res.accept = false;
    res.diagnostic = e.what();
  }
  res.transcript = verifier.transcript();
  try {
    if (decided || res.aborted) Post(channel, res, Frame{FrameTag::kDecision, EncodeDecision(res.accept)});
  } catch (const std::exception&) {
    // The peer is gone; the decision stands locally.
  }
  res.bytes_sent = channel.bytes_sent();
  res.bytes_received = channel.bytes_received();
  return res;
}

SessionResult RunProverSession(Channel& channel, const ArgParams& pp, const Iop& iop, ArgumentProver& prover) {
  SessionResult res;
  res.transcript.instance = iop.EncodeInstance();
  try {
    Post(channel, res, Frame{FrameTag::kParams, pp.Serialize()});
    Post(channel, res, Frame{FrameTag::kInstance, res.transcript.instance});
    std::optional<Challenge> last;
    for (size_t i = 0; i < pp.spec.rounds; ++i) {
      const Digest root = prover.Commit(last ? &*last : nullptr);
      const Bytes payload = EncodeCommitMessage(root);
      CountCommit(res.wire, payload.size());
      res.transcript.commitments.push_back(root);
      Post(channel, res, Frame{FrameTag::kCommit, payload});
      const Frame f = Expect(channel, res, FrameTag::kChallenge);
      last = DecodeChallengeMessage(f.payload, pp.spec.challenge_bits[i]);
      CountChallenge(res.wire, *last);
      res.transcript.challenges.push_back(*last);
    }
    std::optional<FinalResponse> response = prover.Respond(*last);
    if (!response) {
      res.aborted = true;
      res.diagnostic = "prover aborted";
      channel.Close();
    } else {
      const EncodedResponse enc = EncodeFinalResponse(pp, *response);
      CountResponse(res.wire, enc);
      res.transcript.response = std::move(*response);
      Post(channel, res, Frame{FrameTag::kFinalResponse, enc.payload});
      const Frame f = Expect(channel, res, FrameTag::kDecision);
      res.accept = DecodeDecision(f.payload);
    }
  } catch (const std::exception& e) {
    res.aborted = true;
    res.accept = false;
    res.diagnostic = e.what();
    channel.Close();
  }
  res.bytes_sent = channel.bytes_sent();
  res.bytes_received = channel.bytes_received();
  return res;
}

LocalSession RunMemorySession(const ArgParams& pp, std::shared_ptr<const Iop> iop, ArgumentProver& prover,
                              uint64_t session_seed) {
  auto [prover_end, verifier_end] = MakeMemoryChannelPair();
  LocalSession out;
  std::thread t([&, ch = prover_end.get()] {
    out.prover = RunProverSession(*ch, pp, *iop, prover);
    ch->Close();
  });
  out.verifier = RunVerifierSession(*verifier_end, pp, iop, session_seed);
  verifier_end->Close();
  t.join();
  return out;
}

LocalSession RunLoopbackTcpSession(const ArgParams& pp, std::shared_ptr<const Iop> iop, ArgumentProver& prover,
                                   uint64_t session_seed) {
  TcpListener listener("127.0.0.1", 0);
  LocalSession out;
  std::string prover_error;
  std::thread t([&] {
    try {
      auto ch = TcpConnect("127.0.0.1", listener.port());
      out.prover = RunProverSession(*ch, pp, *iop, prover);
      ch->Close();
    } catch (const std::exception& e) {
      out.prover.aborted = true;
      out.prover.diagnostic = e.what();
    }
  });
  try {
    auto ch = listener.Accept();
    out.verifier = RunVerifierSession(*ch, pp, iop, session_seed);
    ch->Close();
  } catch (const std::exception& e) {
    out.verifier.aborted = true;
    out.verifier.diagnostic = e.what();
  }
  t.join();
  return out;
}

ReplayResult VerifyTranscriptBytes(ByteSpan data) {
  ReplayResult out;
  try {
    const std::vector<Frame> frames = DecodeFrames(data);
    if (frames.size() < 2 || frames[0].tag != FrameTag::kParams || frames[1].tag != FrameTag::kInstance)
      throw ProtocolViolation("transcript must start with params and instance frames");
    const vc::VcParams vc = vc::VcParams::Parse(frames[0].payload);
    std::shared_ptr<const Iop> iop = DecodeInstance(frames[1].payload);
    out.iop = iop;
    const IopSpec& spec = iop->spec();
    if (vc.capacity != spec.l_max() || vc.symbol_bits != spec.symbol_bits)
      throw ProtocolViolation("parameters do not fit the instance's IOP");
    ArgParams pp{vc, frames[1].payload.size(), spec};
    out.params = pp;
    const size_t k = spec.rounds;
    if (frames.size() != 2 + (2 * k + 1) + 1) throw ProtocolViolation("transcript has the wrong number of frames");
    Transcript& t = out.transcript;
    t.instance = frames[1].payload;
    size_t at = 2;
    for (size_t i = 0; i < k; ++i) {
      if (frames[at].tag != FrameTag::kCommit) throw ProtocolViolation("expected commit frame");
      t.commitments.push_back(DecodeCommitMessage(frames[at++].payload));
      if (frames[at].tag != FrameTag::kChallenge) throw ProtocolViolation("expected challenge frame");
      t.challenges.push_back(DecodeChallengeMessage(frames[at++].payload, spec.challenge_bits[i]));
    }
    if (frames[at].tag != FrameTag::kFinalResponse) throw ProtocolViolation("expected final-response frame");
    t.response = DecodeFinalResponse(pp, frames[at++].payload);
    if (frames[at].tag != FrameTag::kDecision) throw ProtocolViolation("expected decision frame");
    const bool recorded = DecodeDecision(frames[at].payload);
    const bool recomputed = ArgVerify(pp, *iop, t, &out.diagnostic);
    if (recorded != recomputed) {
      out.diagnostic = "recorded decision " + std::to_string(recorded) + " disagrees with recomputed decision";
      out.accept = false;
    } else {
      out.accept = recomputed;
    }
  } catch (const std::exception& e) {
    out.accept = false;
    out.diagnostic = e.what();
  }
  return out;
}

}  // namespace ibcs
