#include "equiplan/run_io.hpp"

#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "equiplan/error.hpp"

namespace equiplan {

namespace {

nlohmann::json to_json_node(const toml::node& node, const std::string& where) {
  if (const auto* t = node.as_table()) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, value] : *t) j[std::string(key.str())] = to_json_node(value, where + "." + std::string(key.str()));
    return j;
  }
  if (const auto* a = node.as_array()) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& value : *a) j.push_back(to_json_node(value, where));
    return j;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  throw Error(ErrorCode::kConfig, "unsupported TOML value at '" + where + "'");
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::kConfig, "cannot write " + path.string());
}

}  // namespace

nlohmann::json parse_toml(const std::string& text, const std::string& source) {
  try {
    const toml::table table = toml::parse(text, source);
    nlohmann::json j = to_json_node(table, "");
    return j;
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ": " << e.description();
    throw Error(ErrorCode::kConfig, msg.str());
  }
}

nlohmann::json load_toml_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_toml(text.str(), path.string());
}

void write_run(const std::filesystem::path& dir, const std::string& command, const nlohmann::json& resolved,
               const ExperimentOutput& output, double wall_seconds) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kConfig, "cannot create " + dir.string() + ": " + ec.message());
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(resolved)));
  const nlohmann::json record = {{"command", command},
                                 {"config", resolved},
                                 {"config_hash", hash},
                                 {"version", kVersion},
                                 {"wall_time_s", wall_seconds},
                                 {"exit_code", output.exit_code},
                                 {"summary", output.summary}};
  for (const auto& [name, csv] : output.files) {
    write_file(dir / name, csv);
    write_file(dir / (std::filesystem::path(name).stem().string() + ".json"), record.dump(2) + "\n");
  }
  write_file(dir / "summary.json", record.dump(2) + "\n");
}

}  // namespace equiplan
