#include "io.hpp"

#include <filesystem>

#include "ttp/error.hpp"

namespace ttp::cli {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

nlohmann::json read_json_file(const std::string& path) {
  auto in = open_input(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::vector<nlohmann::json> read_jsonl_objects(const std::string& path) {
  auto in = open_input(path);
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path + ":" + std::to_string(n) + ": " + e.what());
    }
    if (!out.back().is_object()) {
      throw SchemaError(path + ":" + std::to_string(n) + ": expected a JSON object");
    }
  }
  return out;
}

std::vector<trips::Trip> read_trips(const std::string& path) {
  std::vector<trips::Trip> out;
  for (const auto& j : read_jsonl_objects(path)) out.push_back(trips::trip_from_json(j));
  return out;
}

std::string road_of(const nlohmann::json& trip_json) {
  const auto it = trip_json.find("road_id");
  if (it == trip_json.end() || !it->is_string()) {
    throw SchemaError("trip " + trip_json.value("trip_id", std::string("?")) + " has no road_id");
  }
  return it->get<std::string>();
}

void Manifest::add_balance(const std::string& unit, std::size_t in, std::size_t out,
                           std::size_t discarded) {
  balance.push_back({{"unit", unit}, {"in", in}, {"out", out}, {"discarded", discarded}});
}

nlohmann::ordered_json Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["stage"] = stage;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["flags"] = flags;
  j["counts"] = counts;
  j["balance"] = balance;
  j["wall_time_s"] = wall_time_s;
  return j;
}

void append_run_log(const std::string& path, const Manifest& m) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to run log '" + path + "'");
  out << m.to_json().dump() << '\n';
}

}  // namespace ttp::cli
