#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ttp/trips.hpp"

namespace ttp::cli {

// Throw IoError when the file cannot be opened.
std::ifstream open_input(const std::string& path);
// Creates missing parent directories.
std::ofstream open_output(const std::string& path);
void write_text(const std::string& path, const std::string& text);
nlohmann::json read_json_file(const std::string& path);

// One JSON object per non-blank line; a malformed line raises SchemaError
// naming the line.
std::vector<nlohmann::json> read_jsonl_objects(const std::string& path);

std::vector<trips::Trip> read_trips(const std::string& path);
std::string road_of(const nlohmann::json& trip_json);

// Stage report appended to the run log as one JSON line.
struct Manifest {
  std::string stage;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  nlohmann::ordered_json flags = nlohmann::ordered_json::object();
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  // {unit, in, out, discarded}; in == out + discarded for every entry
  nlohmann::ordered_json balance = nlohmann::ordered_json::array();
  double wall_time_s = 0.0;

  void add_balance(const std::string& unit, std::size_t in, std::size_t out, std::size_t discarded);
  nlohmann::ordered_json to_json() const;
};

void append_run_log(const std::string& path, const Manifest& m);

}  // namespace ttp::cli
