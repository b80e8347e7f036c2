#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ttpc/errors.hpp"
#include "ttpc/experiment.hpp"

namespace ttpc {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw ParseError(what); }

void check_keys(const json& obj, const char* where,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      bad(std::string("config: unknown key \"") + item.key() + "\" in " +
          where);
  }
}

double get_number(const json& obj, const char* where, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number())
    bad(std::string("config: ") + where + "." + key + " must be a number");
  return v.get<double>();
}

double get_number_or(const json& obj, const char* where, const char* key,
                     double fallback) {
  if (!obj.contains(key)) return fallback;
  return get_number(obj, where, key);
}

}  // namespace

double r_from_db(double db) {
  if (!std::isfinite(db) || db < 0.0)
    throw std::invalid_argument("r_from_db: db must be finite and >= 0");
  return db * std::numbers::ln10 / 20.0;
}

double db_from_r(double r) {
  if (!std::isfinite(r) || r < 0.0)
    throw std::invalid_argument("db_from_r: r must be finite and >= 0");
  return 20.0 * r / std::numbers::ln10;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) bad("config: top level must be an object");
  check_keys(root, "top level",
             {"squeezing", "r2", "bs_phase", "losses", "nopa_escape", "gains",
              "gain_tie", "v0", "mc", "outputs"});

  ExperimentConfig config;

  if (!root.contains("squeezing")) bad("config: missing \"squeezing\"");
  const json& squeezing = root.at("squeezing");
  if (!squeezing.is_object()) bad("config: \"squeezing\" must be an object");
  check_keys(squeezing, "squeezing", {"r", "db"});
  const bool has_r = squeezing.contains("r");
  const bool has_db = squeezing.contains("db");
  if (has_r == has_db)
    bad("config: \"squeezing\" takes exactly one of \"r\" or \"db\"");
  double r = 0.0;
  if (has_r) {
    r = get_number(squeezing, "squeezing", "r");
    if (!std::isfinite(r) || r < 0.0) bad("config: squeezing.r must be >= 0");
  } else {
    const double db = get_number(squeezing, "squeezing", "db");
    if (!std::isfinite(db) || db < 0.0)
      bad("config: squeezing.db must be >= 0");
    config.squeezing_db = db;
    r = r_from_db(db);
  }
  config.circuit.r1 = r;
  config.circuit.r2 = get_number_or(root, "top level", "r2", r);
  config.circuit.bs_phase =
      get_number_or(root, "top level", "bs_phase", std::numbers::pi / 2);

  if (root.contains("losses")) {
    const json& losses = root.at("losses");
    if (!losses.is_array() || losses.size() != 4)
      bad("config: \"losses\" must be an array of 4 numbers");
    for (std::size_t i = 0; i < 4; ++i) {
      if (!losses[i].is_number()) bad("config: losses entries must be numbers");
      config.circuit.losses[i] = losses[i].get<double>();
    }
  }
  if (root.contains("nopa_escape")) {
    const json& escape = root.at("nopa_escape");
    if (!escape.is_array() || escape.size() != 2)
      bad("config: \"nopa_escape\" must be an array of 2 numbers");
    for (std::size_t i = 0; i < 2; ++i) {
      if (!escape[i].is_number())
        bad("config: nopa_escape entries must be numbers");
      config.circuit.nopa_escape[i] = escape[i].get<double>();
    }
  }

  if (root.contains("gains")) {
    const json& gains = root.at("gains");
    if (gains.is_string()) {
      if (gains.get<std::string>() != "auto")
        bad("config: \"gains\" must be \"auto\" or an object");
    } else if (gains.is_object()) {
      check_keys(gains, "gains", {"gx1", "gx2", "gx3", "gy4"});
      for (const char* key : {"gx1", "gx2", "gx3", "gy4"})
        if (!gains.contains(key))
          bad(std::string("config: gains.") + key + " is required");
      Gains fixed;
      fixed.gx1 = get_number(gains, "gains", "gx1");
      fixed.gx2 = get_number(gains, "gains", "gx2");
      fixed.gx3 = get_number(gains, "gains", "gx3");
      fixed.gy4 = get_number(gains, "gains", "gy4");
      config.gains = fixed;
    } else {
      bad("config: \"gains\" must be \"auto\" or an object");
    }
  }

  if (root.contains("gain_tie")) {
    const json& tie = root.at("gain_tie");
    if (!tie.is_string()) bad("config: \"gain_tie\" must be a string");
    const std::string value = tie.get<std::string>();
    if (value == "independent") config.gain_tie = GainTie::independent;
    else if (value == "shared") config.gain_tie = GainTie::shared;
    else bad("config: \"gain_tie\" must be \"independent\" or \"shared\"");
  }

  config.v0 = get_number_or(root, "top level", "v0", 0.25);
  if (!(config.v0 > 0.0) || !std::isfinite(config.v0))
    bad("config: v0 must be > 0");

  if (root.contains("mc")) {
    const json& mc = root.at("mc");
    if (!mc.is_object()) bad("config: \"mc\" must be an object");
    check_keys(mc, "mc", {"enabled", "n", "seed"});
    if (mc.contains("enabled")) {
      if (!mc.at("enabled").is_boolean())
        bad("config: mc.enabled must be a boolean");
      config.mc.enabled = mc.at("enabled").get<bool>();
    }
    if (mc.contains("n")) {
      if (!mc.at("n").is_number_unsigned() || mc.at("n").get<std::uint64_t>() < 2)
        bad("config: mc.n must be an integer >= 2");
      config.mc.n = mc.at("n").get<std::size_t>();
    }
    if (mc.contains("seed")) {
      if (!mc.at("seed").is_number_unsigned())
        bad("config: mc.seed must be a non-negative integer");
      config.mc.seed = mc.at("seed").get<std::uint64_t>();
    }
  }

  if (root.contains("outputs")) {
    const json& outputs = root.at("outputs");
    if (!outputs.is_object()) bad("config: \"outputs\" must be an object");
    check_keys(outputs, "outputs", {"json", "csv"});
    if (outputs.contains("json")) {
      if (!outputs.at("json").is_string())
        bad("config: outputs.json must be a string");
      config.outputs.json_path = outputs.at("json").get<std::string>();
    }
    if (outputs.contains("csv")) {
      if (!outputs.at("csv").is_string())
        bad("config: outputs.csv must be a string");
      config.outputs.csv_path = outputs.at("csv").get<std::string>();
    }
  }

  try {
    config.circuit.check();
  } catch (const std::invalid_argument& e) {
    bad(std::string("config: ") + e.what());
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("config: cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string config_to_json(const ExperimentConfig& config) {
  json root;
  // Echo the resolved r; a dB input is preserved in the report's
  // "derived" block, and re-parsing this document reproduces the run.
  root["squeezing"] = {{"r", config.circuit.r1}};
  root["r2"] = config.circuit.r2;
  root["bs_phase"] = config.circuit.bs_phase;
  root["losses"] = config.circuit.losses;
  root["nopa_escape"] = config.circuit.nopa_escape;
  if (config.gains) {
    root["gains"] = {{"gx1", config.gains->gx1},
                     {"gx2", config.gains->gx2},
                     {"gx3", config.gains->gx3},
                     {"gy4", config.gains->gy4}};
  } else {
    root["gains"] = "auto";
  }
  root["gain_tie"] =
      config.gain_tie == GainTie::shared ? "shared" : "independent";
  root["v0"] = config.v0;
  json mc;
  mc["enabled"] = config.mc.enabled;
  mc["n"] = config.mc.n;
  if (config.mc.seed) mc["seed"] = *config.mc.seed;
  root["mc"] = mc;
  json outputs = json::object();
  if (config.outputs.json_path) outputs["json"] = *config.outputs.json_path;
  if (config.outputs.csv_path) outputs["csv"] = *config.outputs.csv_path;
  root["outputs"] = outputs;
  return root.dump(2);
}

std::vector<MeasurementRecord> parse_measurements_csv(std::istream& is) {
  std::vector<MeasurementRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != "combo_id,db_below_snl,uncertainty_db")
        bad("measurements: line 1 must be the header "
            "\"combo_id,db_below_snl,uncertainty_db\"");
      saw_header = true;
      continue;
    }
    std::array<std::string, 3> fields;
    std::size_t start = 0;
    for (int f = 0; f < 3; ++f) {
      const std::size_t comma = line.find(',', start);
      if (f < 2) {
        if (comma == std::string::npos)
          bad("measurements: line " + std::to_string(line_no) +
              ": expected 3 comma-separated fields");
        fields[static_cast<std::size_t>(f)] = line.substr(start, comma - start);
        start = comma + 1;
      } else {
        if (comma != std::string::npos)
          bad("measurements: line " + std::to_string(line_no) +
              ": expected 3 comma-separated fields");
        fields[2] = line.substr(start);
      }
    }
    const std::optional<ComboId> id = parse_combo_id(fields[0]);
    if (!id)
      bad("measurements: line " + std::to_string(line_no) +
          ": unknown combo_id \"" + fields[0] + "\"");
    MeasurementRecord rec;
    rec.combo_id = *id;
    for (int f = 1; f < 3; ++f) {
      const std::string& text = fields[static_cast<std::size_t>(f)];
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != text.size() || text.empty())
        bad("measurements: line " + std::to_string(line_no) +
            ": bad number \"" + text + "\"");
      (f == 1 ? rec.db_below_snl : rec.uncertainty_db) = value;
    }
    if (!std::isfinite(rec.db_below_snl) || !std::isfinite(rec.uncertainty_db))
      bad("measurements: line " + std::to_string(line_no) +
          ": non-finite value");
    if (rec.uncertainty_db < 0.0)
      bad("measurements: line " + std::to_string(line_no) +
          ": uncertainty_db must be >= 0");
    records.push_back(rec);
  }
  if (!saw_header) bad("measurements: empty input");
  return records;
}

std::vector<MeasurementRecord> load_measurements_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("measurements: cannot open " + path.string());
  return parse_measurements_csv(in);
}

void write_measurements_csv(std::ostream& os,
                            std::span<const MeasurementRecord> records) {
  os << "combo_id,db_below_snl,uncertainty_db\n";
  char buf[96];
  for (const MeasurementRecord& rec : records) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g",
                  to_string(rec.combo_id).c_str(), rec.db_below_snl,
                  rec.uncertainty_db);
    os << buf << '\n';
  }
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m) {
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      os << buf << (j + 1 < m.cols() ? "," : "");
    }
    os << '\n';
  }
}

}  // namespace ttpc
