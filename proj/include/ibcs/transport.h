#pragma once

// Wire protocol. Every message travels in a frame:
//
//   u32be payload length | u8 tag | payload
//
// A session is: params (0x11) and instance (0x10) from the prover, then the
// 2k+1 protocol frames (commit 0x01 / challenge 0x02 alternating, one final
// response 0x03), then the verifier's decision (0x04, one byte 0 or 1).
//
// Payloads:
//   commit          32-byte Merkle root
//   challenge       r_i bits, MSB-first, zero-padded to a byte
//   final response  for each round i: q_i entries of (position-1 in
//                   ceil(log2 l_i) bits, symbol in symbol_bits bits), then the
//                   multi-proof digests; all rounds bit-packed into one
//                   payload, zero-padded to a byte. Proof lengths are forced
//                   by the positions, so no counts are sent.
//
// Standalone serializations of VC objects:
//   Commitment      root (32) | u64be length
//   Opening         u32be count | count x u32be position | count x fixed-width
//                   big-endian symbol | u32be proof count | digests

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ibcs/compiler.h"

namespace ibcs {

enum class FrameTag : uint8_t {
  kCommit = 0x01,
  kChallenge = 0x02,
  kFinalResponse = 0x03,
  kDecision = 0x04,
  kInstance = 0x10,
  kParams = 0x11,
};

inline constexpr size_t kFrameHeaderSize = 5;
inline constexpr uint32_t kMaxFramePayload = uint32_t{1} << 26;

bool IsKnownFrameTag(uint8_t tag);
std::string FrameTagName(FrameTag tag);

struct Frame {
  FrameTag tag = FrameTag::kCommit;
  Bytes payload;

  size_t WireSize() const { return kFrameHeaderSize + payload.size(); }
  bool operator==(const Frame&) const = default;
};

void AppendFrame(Bytes& out, const Frame& frame);
Bytes EncodeFrame(const Frame& frame);
// Reads one frame. Truncation, unknown tags and oversized lengths raise
// DecodeError with the offending offset.
Frame DecodeFrame(ByteReader& in);
std::vector<Frame> DecodeFrames(ByteSpan data);
Bytes EncodeFrames(const std::vector<Frame>& frames);

Bytes EncodeCommitMessage(const Digest& root);
Digest DecodeCommitMessage(ByteSpan payload);

Bytes EncodeChallengeMessage(const Challenge& c);
Challenge DecodeChallengeMessage(ByteSpan payload, uint64_t bits);

struct EncodedResponse {
  Bytes payload;
  std::vector<uint64_t> answer_bits;  // per round
  std::vector<uint64_t> proof_bits;   // per round
  uint64_t content_bits = 0;
};

// Throws InvalidMessage if the response does not fit the spec's shape.
EncodedResponse EncodeFinalResponse(const ArgParams& pp, const FinalResponse& response);
FinalResponse DecodeFinalResponse(const ArgParams& pp, ByteSpan payload);

Bytes EncodeDecision(bool accept);
bool DecodeDecision(ByteSpan payload);

Bytes EncodeCommitment(const vc::Commitment& cm);
vc::Commitment DecodeCommitment(ByteSpan data);
Bytes EncodeOpening(const vc::VcParams& params, const vc::Opening& op);
vc::Opening DecodeOpening(const vc::VcParams& params, ByteSpan data);

// Duplex, ordered, frame-preserving endpoint. Byte counters include headers.
class Channel {
 public:
  virtual ~Channel() = default;

  void Send(const Frame& frame);
  Frame Receive();
  // Unblocks the peer; later Receive() calls on either side fail.
  virtual void Close() = 0;

  uint64_t bytes_sent() const { return bytes_sent_; }
  uint64_t bytes_received() const { return bytes_received_; }

 protected:
  virtual void SendBytes(Bytes frame) = 0;
  virtual Bytes ReceiveBytes() = 0;

 private:
  uint64_t bytes_sent_ = 0;
  uint64_t bytes_received_ = 0;
};

using ChannelPair = std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>>;

inline constexpr std::chrono::milliseconds kDefaultChannelTimeout{60000};

ChannelPair MakeMemoryChannelPair(std::chrono::milliseconds timeout = kDefaultChannelTimeout);

std::unique_ptr<Channel> TcpConnect(const std::string& host, uint16_t port,
                                    std::chrono::milliseconds timeout = kDefaultChannelTimeout);

class TcpListener {
 public:
  // Port 0 picks an ephemeral port.
  TcpListener(const std::string& host, uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  uint16_t port() const { return port_; }
  std::unique_ptr<Channel> Accept(std::chrono::milliseconds timeout = kDefaultChannelTimeout);

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

// Parses "host:port".
std::pair<std::string, uint16_t> ParseEndpoint(const std::string& text);

// Bits of the 2k+1 protocol frames. Content bits exclude the byte-alignment
// padding and frame headers, which are counted separately.
struct WireStats {
  std::vector<uint64_t> commitment_bits;
  std::vector<uint64_t> answer_bits;
  std::vector<uint64_t> proof_bits;
  std::vector<uint64_t> challenge_bits;
  uint64_t prover_to_verifier_bits = 0;
  uint64_t verifier_to_prover_bits = 0;
  uint64_t prover_padding_bits = 0;
  uint64_t verifier_padding_bits = 0;
  uint64_t protocol_frames = 0;
  uint64_t prover_protocol_bytes = 0;
  uint64_t verifier_protocol_bytes = 0;
};

struct SessionResult {
  bool accept = false;
  bool aborted = false;
  std::string diagnostic;
  Transcript transcript;
  // Every frame of the session in wire order, as seen by this endpoint.
  std::vector<Frame> frames;
  WireStats wire;
  uint64_t bytes_sent = 0;
  uint64_t bytes_received = 0;

  Bytes TranscriptBytes() const { return EncodeFrames(frames); }
};

SessionResult RunVerifierSession(Channel& channel, const ArgParams& pp, std::shared_ptr<const Iop> iop,
                                 uint64_t session_seed);
SessionResult RunProverSession(Channel& channel, const ArgParams& pp, const Iop& iop, ArgumentProver& prover);

struct LocalSession {
  SessionResult prover;
  SessionResult verifier;
};

// Both parties in-process over a memory channel; the prover runs on a
// second thread.
LocalSession RunMemorySession(const ArgParams& pp, std::shared_ptr<const Iop> iop, ArgumentProver& prover,
                              uint64_t session_seed);

// Both parties in-process over TCP loopback.
LocalSession RunLoopbackTcpSession(const ArgParams& pp, std::shared_ptr<const Iop> iop, ArgumentProver& prover,
                                   uint64_t session_seed);

struct ReplayResult {
  bool accept = false;
  std::string diagnostic;
  std::optional<ArgParams> params;
  std::shared_ptr<const Iop> iop;
  Transcript transcript;
};

// Offline verification of a transcript file (params, instance, 2k+1 protocol
// frames, decision). Any structural defect rejects; the recorded decision
// must match the recomputed one.
ReplayResult VerifyTranscriptBytes(ByteSpan data);

}  // namespace ibcs
