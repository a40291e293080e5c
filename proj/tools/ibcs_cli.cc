// ibcs: run compiled IOP arguments and the extraction lab from the shell.
//
// Exit status: 0 accept / pass, 1 reject / fail, 2 usage or runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ibcs/adversaries.h"
#include "ibcs/error.h"
#include "ibcs/experiments.h"
#include "ibcs/instance_io.h"
#include "ibcs/transport.h"

namespace {

using nlohmann::ordered_json;

struct Options {
  std::string instance;
  std::string spec = "gc";
  unsigned lambda = 128;
  double epsilon = 0.5;
  uint64_t trials = 1000;
  uint64_t seed = 1;
  std::vector<std::string> adversaries;
  std::string transport = "memory";
  std::string listen;
  std::string connect;
  std::string out;
  std::string transcript;
  std::string config;
  bool allow_satisfiable = false;
  bool transport_set = false;
};

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ibcs::InvalidParameter("cannot write " + path);
  f << text;
}

void Emit(const ordered_json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (!out.empty()) WriteText(out, text);
  std::cout << text;
}

ordered_json WireJson(const ibcs::ArgParams& pp, const ibcs::SessionResult& s) {
  ordered_json j;
  j["decision"] = s.accept ? "accept" : "reject";
  if (!s.diagnostic.empty()) j["diagnostic"] = s.diagnostic;
  j["rounds"] = pp.spec.rounds + 1;
  j["messages"] = s.wire.protocol_frames;
  if (s.transcript.response.size() == pp.spec.rounds) {
    const ibcs::CommStats f = ibcs::ComputeCommStats(pp, s.transcript);
    ordered_json fj;
    fj["prover_to_verifier_bits"] = f.prover_to_verifier_bits;
    fj["verifier_to_prover_bits"] = f.verifier_to_prover_bits;
    fj["commitment_bits"] = f.commitment_bits;
    fj["answer_bits"] = f.answer_bits;
    fj["proof_bits"] = f.proof_bits;
    fj["challenge_bits"] = f.challenge_bits;
    fj["generator_bits"] = f.generator_bits;
    j["formula"] = fj;
  }
  ordered_json mj;
  mj["prover_to_verifier_bits"] = s.wire.prover_to_verifier_bits;
  mj["verifier_to_prover_bits"] = s.wire.verifier_to_prover_bits;
  mj["prover_padding_bits"] = s.wire.prover_padding_bits;
  mj["verifier_padding_bits"] = s.wire.verifier_padding_bits;
  mj["prover_protocol_bytes"] = s.wire.prover_protocol_bytes;
  mj["verifier_protocol_bytes"] = s.wire.verifier_protocol_bytes;
  mj["bytes_sent"] = s.bytes_sent;
  mj["bytes_received"] = s.bytes_received;
  j["measured"] = mj;
  return j;
}

struct Setup {
  std::shared_ptr<const ibcs::Iop> iop;
  ibcs::ArgParams pp;
};

Setup Load(const Options& o) {
  if (o.instance.empty()) throw ibcs::InvalidParameter("--instance is required");
  Setup s;
  s.iop = ibcs::LoadInstanceFile(o.instance, ibcs::ParseIopKind(o.spec));
  s.pp = ibcs::ArgSetup(o.lambda, s.iop->EncodeInstance().size(), s.iop->spec());
  return s;
}

uint64_t SessionSeed(const Options& o) { return ibcs::DeriveSeed(o.seed, "session", 0); }

int Finish(const ibcs::ArgParams& pp, const ibcs::SessionResult& shown, const ibcs::SessionResult& record,
           const Options& o) {
  if (!o.out.empty()) ibcs::WriteBinaryFile(o.out, record.TranscriptBytes());
  std::cout << WireJson(pp, shown).dump(2) << "\n";
  return shown.accept ? 0 : 1;
}

int CmdProve(const Options& o) {
  const Setup s = Load(o);
  const std::string adv = o.adversaries.empty() ? "honest" : o.adversaries.front();
  auto prover = ibcs::MakeAdversary(ibcs::AdversarySpec::Parse(adv), s.pp, s.iop);
  if (!o.connect.empty() && o.transport == "memory" && o.transport_set)
    throw ibcs::InvalidParameter("--connect needs the tcp transport");
  if (o.transport == "memory" && o.connect.empty()) {
    const ibcs::LocalSession run = ibcs::RunMemorySession(s.pp, s.iop, *prover, SessionSeed(o));
    return Finish(s.pp, run.verifier, run.verifier, o);
  }
  if (o.connect.empty()) {
    const ibcs::LocalSession run = ibcs::RunLoopbackTcpSession(s.pp, s.iop, *prover, SessionSeed(o));
    return Finish(s.pp, run.verifier, run.verifier, o);
  }
  const auto [host, port] = ibcs::ParseEndpoint(o.connect);
  auto channel = ibcs::TcpConnect(host, port);
  const ibcs::SessionResult r = ibcs::RunProverSession(*channel, s.pp, *s.iop, *prover);
  channel->Close();
  return Finish(s.pp, r, r, o);
}

int CmdVerify(const Options& o) {
  if (!o.transcript.empty()) {
    const ibcs::ReplayResult r = ibcs::VerifyTranscriptBytes(ibcs::ReadBinaryFile(o.transcript));
    ordered_json j;
    j["decision"] = r.accept ? "accept" : "reject";
    if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
    if (r.iop) j["relation"] = r.iop->spec().relation;
    std::cout << j.dump(2) << "\n";
    return r.accept ? 0 : 1;
  }
  if (o.listen.empty()) throw ibcs::InvalidParameter("verify needs --listen or --transcript");
  const Setup s = Load(o);
  const auto [host, port] = ibcs::ParseEndpoint(o.listen);
  ibcs::TcpListener listener(host, port);
  std::cerr << "listening on " << host << ":" << listener.port() << std::endl;
  auto channel = listener.Accept();
  const ibcs::SessionResult r = ibcs::RunVerifierSession(*channel, s.pp, s.iop, SessionSeed(o));
  channel->Close();
  return Finish(s.pp, r, r, o);
}

ibcs::ExperimentConfig ConfigFrom(const Options& o, const std::string& experiment) {
  if (!o.config.empty()) {
    const nlohmann::json j = nlohmann::json::parse(ibcs::ReadFile(o.config));
    ibcs::ExperimentConfig c = ibcs::ExperimentConfig::FromJson(j.contains("config") ? j.at("config") : j);
    if (c.experiment != experiment)
      throw ibcs::InvalidParameter("config is for the " + c.experiment + " experiment");
    return c;
  }
  ibcs::ExperimentConfig c;
  c.experiment = experiment;
  c.instance_path = o.instance;
  c.kind = ibcs::ParseIopKind(o.spec);
  c.lambda = o.lambda;
  c.epsilon = o.epsilon;
  c.trials = o.trials;
  c.seed = o.seed;
  c.adversaries = o.adversaries;
  c.allow_satisfiable = o.allow_satisfiable;
  return c;
}

int CmdExperiment(const Options& o, const std::string& experiment) {
  const ordered_json report = ibcs::RunExperiment(ConfigFrom(o, experiment));
  Emit(report, o.out);
  return report["pass"].is_boolean() && report["pass"].get<bool>() ? 0 : 1;
}

void AddInstanceFlags(CLI::App* cmd, Options& o) {
  cmd->add_option("--instance", o.instance, "instance text file");
  cmd->add_option("--spec", o.spec, "IOP: gc or sumcheck")->check(CLI::IsMember({"gc", "sumcheck"}));
  cmd->add_option("--lambda", o.lambda, "security parameter")->check(CLI::IsMember({128, 256}));
  cmd->add_option("--seed", o.seed, "master seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive BCS arguments and a classical extraction lab"};
  app.set_version_flag("--version", ibcs::ArtifactVersion());
  app.require_subcommand(1);
  Options o;

  auto* prove = app.add_subcommand("prove", "run one session as (or with) the prover");
  AddInstanceFlags(prove, o);
  prove->add_option("--adversary", o.adversaries, "prover behavior (default honest)")->expected(1);
  auto* transport =
      prove->add_option("--transport", o.transport, "memory or tcp")->check(CLI::IsMember({"memory", "tcp"}));
  prove->add_option("--connect", o.connect, "verifier endpoint host:port");
  prove->add_option("--out", o.out, "transcript output file");

  auto* verify = app.add_subcommand("verify", "serve one session as verifier, or replay a transcript");
  AddInstanceFlags(verify, o);
  verify->add_option("--listen", o.listen, "listen endpoint host:port");
  verify->add_option("--transcript", o.transcript, "transcript file to verify offline");
  verify->add_option("--out", o.out, "transcript output file");

  auto* soundness = app.add_subcommand("soundness", "Monte-Carlo soundness against scripted adversaries");
  auto* extract = app.add_subcommand("extract", "hybrid chain, failure events and knowledge extraction");
  for (auto* cmd : {soundness, extract}) {
    AddInstanceFlags(cmd, o);
    cmd->add_option("--epsilon", o.epsilon, "error budget eps in (0, 1]");
    cmd->add_option("--trials", o.trials, "trials per estimate")->check(CLI::PositiveNumber);
    cmd->add_option("--adversary", o.adversaries, "adversary (repeatable)");
    cmd->add_option("--out", o.out, "JSON report file");
    cmd->add_option("--config", o.config, "rerun the config embedded in a JSON report");
  }
  soundness->add_flag("--allow-satisfiable", o.allow_satisfiable, "run on an instance in the language");

  CLI11_PARSE(app, argc, argv);
  o.transport_set = transport->count() > 0;
  try {
    if (*prove) return CmdProve(o);
    if (*verify) return CmdVerify(o);
    if (*soundness) return CmdExperiment(o, "soundness");
    if (*extract) return CmdExperiment(o, "extract");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
