#include "xtalbench/protocols.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>

namespace xtalbench {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Protocol protocol) {
  return protocol == Protocol::SpatialExclusion ? "SE" : "CE";
}

Protocol protocol_from_string(std::string_view text) {
  if (text == "SE" || text == "se") return Protocol::SpatialExclusion;
  if (text == "CE" || text == "ce") return Protocol::CompositionalExclusion;
  throw ArgumentError(fmt::format("unknown protocol '{}'", text));
}

std::string radius_label(double radius_nm) {
  auto s = fmt::format("{}", radius_nm);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

CorpusIndex::CorpusIndex(std::vector<SampleRef> entries) : entries_(entries.begin(), entries.end()) {}

CorpusIndex CorpusIndex::product(std::span<const std::string> materials, std::span<const double> radii,
                                 int pose_count) {
  std::vector<SampleRef> entries;
  for (const auto& m : materials) {
    for (double r : radii) {
      for (int k = 0; k < pose_count; ++k) entries.push_back({m, r, k});
    }
  }
  return CorpusIndex(std::move(entries));
}

std::vector<std::string> CorpusIndex::materials() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (out.empty() || out.back() != e.material) out.push_back(e.material);
  }
  return out;
}

std::vector<double> CorpusIndex::radii(std::string_view material) const {
  std::vector<double> out;
  for (const auto& e : entries_) {
    if (e.material == material && (out.empty() || out.back() != e.radius_nm)) out.push_back(e.radius_nm);
  }
  return out;
}

std::string instance_id(Protocol protocol, const SampleRef& target) {
  return fmt::format("{}/{}/R{}/p{}", to_string(protocol), target.material, radius_label(target.radius_nm),
                     target.pose);
}

namespace {

void require_complete(const CorpusIndex& corpus) {
  std::vector<std::string> gaps;
  for (const auto& m : corpus.materials()) {
    for (double r : corpus.radii(m)) {
      for (int k = 0; k < kProtocolPoses; ++k) {
        if (!corpus.contains({m, r, k})) gaps.push_back(fmt::format("{}/R{}/p{}", m, radius_label(r), k));
      }
    }
  }
  if (corpus.size() == 0) throw GenerationError("corpus is empty");
  if (!gaps.empty()) {
    throw GenerationError(fmt::format("corpus is missing {} protocol entries: {}", gaps.size(), fmt::join(gaps, ", ")));
  }
}

void append_poses(std::vector<SampleRef>& out, const std::string& material, double radius) {
  for (int k = 0; k < kProtocolPoses; ++k) out.push_back({material, radius, k});
}

}  // namespace

std::vector<BenchmarkInstance> build_se_instances(const CorpusIndex& corpus) {
  require_complete(corpus);
  std::vector<BenchmarkInstance> out;
  for (const auto& m : corpus.materials()) {
    const auto radii = corpus.radii(m);
    for (double held_out : radii) {
      std::vector<SampleRef> context;
      for (double r : radii) {
        if (r != held_out) append_poses(context, m, r);
      }
      for (int k = 0; k < kProtocolPoses; ++k) {
        BenchmarkInstance inst;
        inst.protocol = Protocol::SpatialExclusion;
        inst.target = {m, held_out, k};
        inst.id = instance_id(inst.protocol, inst.target);
        inst.context = context;
        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

std::vector<BenchmarkInstance> build_ce_instances(const CorpusIndex& corpus) {
  require_complete(corpus);
  const auto materials = corpus.materials();
  std::map<std::string, std::vector<SampleRef>> context_without;
  for (const auto& excluded : materials) {
    auto& ctx = context_without[excluded];
    for (const auto& m : materials) {
      if (m == excluded) continue;
      for (double r : corpus.radii(m)) append_poses(ctx, m, r);
    }
  }
  std::vector<BenchmarkInstance> out;
  for (const auto& m : materials) {
    for (double r : corpus.radii(m)) {
      for (int k = 0; k < kProtocolPoses; ++k) {
        BenchmarkInstance inst;
        inst.protocol = Protocol::CompositionalExclusion;
        inst.target = {m, r, k};
        inst.id = instance_id(inst.protocol, inst.target);
        inst.context = context_without[m];
        out.push_back(std::move(inst));
      }
    }
  }
  return out;
}

bool violates_exclusion(const BenchmarkInstance& inst) {
  if (inst.target.pose < 0 || inst.target.pose >= kProtocolPoses) return true;
  return std::any_of(inst.context.begin(), inst.context.end(), [&](const SampleRef& c) {
    if (c.pose < 0 || c.pose >= kProtocolPoses) return true;
    if (inst.protocol == Protocol::SpatialExclusion) {
      return c.material != inst.target.material || c.radius_nm == inst.target.radius_nm;
    }
    return c.material == inst.target.material;
  });
}

AggregateError aggregate(std::span<const InstanceLoss> losses, Protocol protocol) {
  if (losses.empty()) throw ArgumentError(fmt::format("no losses to aggregate for {}", to_string(protocol)));
  AggregateError out;
  out.protocol = protocol;
  out.n_instances = losses.size();
  out.losses.assign(losses.begin(), losses.end());
  double sum = 0;
  std::size_t scored = 0;
  for (const auto& l : losses) {
    if (l.loss) {
      sum += *l.loss;
      ++scored;
    } else {
      ++out.n_failed;
    }
  }
  if (scored > 0) out.mean = sum / static_cast<double>(scored);
  return out;
}

namespace {

ordered_json ref_json(const SampleRef& r) {
  return ordered_json{{"material", r.material}, {"radius_nm", r.radius_nm}, {"pose", r.pose}};
}

SampleRef ref_from_json(const ordered_json& j) {
  return {j.at("material").get<std::string>(), j.at("radius_nm").get<double>(), j.at("pose").get<int>()};
}

}  // namespace

std::string instance_to_json_line(const BenchmarkInstance& inst) {
  ordered_json j;
  j["id"] = inst.id;
  j["protocol"] = std::string(to_string(inst.protocol));
  j["target"] = ref_json(inst.target);
  auto ctx = ordered_json::array();
  for (const auto& c : inst.context) ctx.push_back(ref_json(c));
  j["context"] = std::move(ctx);
  return j.dump();
}

BenchmarkInstance instance_from_json_line(std::string_view line) {
  const auto j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded()) throw ParseError("instance manifest: malformed JSON line");
  try {
    BenchmarkInstance inst;
    inst.id = j.at("id").get<std::string>();
    inst.protocol = protocol_from_string(j.at("protocol").get<std::string>());
    inst.target = ref_from_json(j.at("target"));
    for (const auto& c : j.at("context")) inst.context.push_back(ref_from_json(c));
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("instance manifest: {}", e.what()));
  }
}

void write_instance_manifest(std::span<const BenchmarkInstance> instances, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  for (const auto& inst : instances) out << instance_to_json_line(inst) << '\n';
}

}  // namespace xtalbench
