#pragma once

#include <memory>
#include <string>

#include "swarm/featnet/checkpoint.hpp"
#include "swarm/harness/config.hpp"
#include "swarm/harness/models.hpp"

namespace swarm::harness {

// A trained policy together with the configuration it was built from.
struct LoadedModel {
  PolicyKind kind{PolicyKind::kPfsmDrl};
  ExperimentConfig config;
  std::shared_ptr<DrlModel> drl;
  std::shared_ptr<RlModel> rl;
  std::string digest;  // FNV-1a of the checkpoint bytes
};

inline featnet::Checkpoint make_checkpoint(const ExperimentConfig& cfg, const DrlModel& m) {
  featnet::Checkpoint c;
  c.meta = json{{"kind", std::string(name(PolicyKind::kPfsmDrl))}, {"config", to_json(cfg)}}.dump();
  featnet::append_parameters(c, m.net, "actor/");
  featnet::append_parameters(c, m.critic, "critic/");
  return c;
}

inline featnet::Checkpoint make_checkpoint(const ExperimentConfig& cfg, const RlModel& m) {
  featnet::Checkpoint c;
  c.meta = json{{"kind", std::string(name(PolicyKind::kPfsmRl))}, {"config", to_json(cfg)}}.dump();
  featnet::append_parameters(c, m.policy, "actor/");
  featnet::append_parameters(c, m.critic, "critic/");
  return c;
}

inline LoadedModel model_from_checkpoint(const featnet::Checkpoint& c) {
  LoadedModel out;
  json meta;
  try {
    meta = json::parse(c.meta);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("checkpoint metadata: ") + e.what());
  }
  out.kind = parse_policy(meta.at("kind").get<std::string>());
  out.config = config_from_json(meta.at("config"));
  if (out.kind == PolicyKind::kPfsmDrl) {
    out.drl = std::make_shared<DrlModel>(out.config);
    featnet::restore_parameters(c, out.drl->net, "actor/");
    featnet::restore_parameters(c, out.drl->critic, "critic/");
  } else if (out.kind == PolicyKind::kPfsmRl) {
    out.rl = std::make_shared<RlModel>(out.config);
    featnet::restore_parameters(c, out.rl->policy, "actor/");
    featnet::restore_parameters(c, out.rl->critic, "critic/");
  } else {
    fail(ErrorCode::kFormat, "checkpoint holds no learned policy");
  }
  return out;
}

inline LoadedModel load_model(const std::string& path) {
  const std::string bytes = featnet::read_file_bytes(path, ErrorCode::kMissingCheckpoint);
  LoadedModel m = model_from_checkpoint(featnet::decode_checkpoint(bytes));
  m.digest = featnet::hex64(featnet::fnv1a(bytes));
  return m;
}

}  // namespace swarm::harness
