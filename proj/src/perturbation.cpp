// SPDX-License-Identifier: Apache-2.0
#include "atkse/perturbation.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "atkse/errors.hpp"

namespace atkse {

std::string_view to_string(FlipAction a) { return a == FlipAction::add ? "add" : "delete"; }

std::string to_jsonl(const PerturbationLog& log) {
  std::string out;
  for (const auto& r : log.records) {
    nlohmann::ordered_json line;
    line["iter"] = r.iteration;
    line["u"] = r.u;
    line["v"] = r.v;
    line["action"] = std::string(to_string(r.action));
    line["g_int"] = r.integral_gradient;
    line["saliency"] = r.saliency;
    out += line.dump();
    out += '\n';
  }
  nlohmann::ordered_json trailer;
  trailer["trailer"] = true;
  trailer["method"] = log.method;
  trailer["config"] = log.config;
  out += trailer.dump();
  out += '\n';
  return out;
}

PerturbationLog parse_jsonl(std::string_view text) {
  PerturbationLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  bool trailer_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (trailer_seen) throw IoError("perturbation log has records after the trailer");
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
      if (obj.value("trailer", false)) {
        log.method = obj.at("method").get<std::string>();
        log.config = obj.at("config");
        trailer_seen = true;
        continue;
      }
      FlipRecord r;
      r.iteration = obj.at("iter").get<int>();
      r.u = obj.at("u").get<NodeId>();
      r.v = obj.at("v").get<NodeId>();
      const auto action = obj.at("action").get<std::string>();
      if (action == "add") {
        r.action = FlipAction::add;
      } else if (action == "delete") {
        r.action = FlipAction::remove;
      } else {
        throw IoError("unknown action '" + action + "'");
      }
      r.integral_gradient = obj.at("g_int").get<double>();
      r.saliency = obj.at("saliency").get<double>();
      log.records.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("malformed perturbation log line: ") + e.what());
    }
  }
  if (!trailer_seen) throw IoError("perturbation log has no trailer");
  return log;
}

void write_jsonl(const PerturbationLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_jsonl(log);
}

}  // namespace atkse
