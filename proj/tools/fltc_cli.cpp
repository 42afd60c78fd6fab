#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fltc/fltc.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum class Kind { text, integer, number, numbers, integers, flag, file_json };

struct Flag {
  std::string key;   // config key
  std::string name;  // command-line spelling
  Kind kind;
  std::string help;
};

const std::vector<Flag>& flags() {
  static const std::vector<Flag> all = {
      {"domain", "--domain", Kind::text, "rectangle | disk | sector | annulus"},
      {"beta", "--beta", Kind::numbers, "rectangle side lengths, comma separated"},
      {"R", "--R", Kind::number, "outer radius"},
      {"r0", "--r0", Kind::number, "inner radius of the annulus"},
      {"q", "--q", Kind::integer, "sector opening pi/q"},
      {"count", "--count", Kind::integer, "number of eigenpairs or zeros"},
      {"grid", "--grid", Kind::integer, "samples per axis"},
      {"tol", "--tol", Kind::number, "tolerance"},
      {"tail_tol", "--tail-tol", Kind::number, "spectral tail tolerance"},
      {"times", "--times", Kind::numbers, "times, comma separated"},
      {"seed", "--seed", Kind::integer, "random seed"},
      {"family", "--family", Kind::integer, "size of the trivializing family"},
      {"triples", "--triples", Kind::integer, "random triples for associativity"},
      {"horizon", "--horizon", Kind::number, "simulation horizon"},
      {"steps", "--steps", Kind::integer, "time steps per path"},
      {"paths", "--paths", Kind::integer, "number of exported paths"},
      {"x0", "--x0", Kind::numbers, "start point coordinates"},
      {"semigroup", "--semigroup", Kind::text, "heat | poisson"},
      {"marginal_paths", "--marginal-paths", Kind::integer, "paths for the chi-square marginal test"},
      {"counts", "--counts", Kind::integers, "expansion counts, comma separated"},
      {"sample", "--sample", Kind::integer, "sample grid per axis"},
      {"function", "--function", Kind::text, "bump | combination"},
      {"centre", "--centre", Kind::numbers, "bump centre"},
      {"radius", "--radius", Kind::number, "bump radius"},
      {"amplitude", "--amplitude", Kind::number, "bump amplitude"},
      {"kind", "--kind", Kind::text, "jprime | annulus_cross"},
      {"m", "--m", Kind::integer, "Bessel order"},
      {"m_max", "--m-max", Kind::integer, "largest Bessel order"},
      {"orders", "--orders", Kind::integers, "Bessel orders, comma separated"},
      {"ratio", "--ratio", Kind::number, "annulus radius ratio"},
      {"x", "--x", Kind::number, "first point of the product measure"},
      {"y", "--y", Kind::number, "second point of the product measure"},
      {"j_check", "--j-check", Kind::integer, "eigenvalues in the product-formula residual"},
      {"beta_sl", "--beta-sl", Kind::number, "interval length of the cosine problem"},
      {"problem", "--problem", Kind::file_json, "Sturm-Liouville problem JSON file"},
      {"mu", "--mu", Kind::numbers, "point mass location of the first factor"},
      {"nu", "--nu", Kind::numbers, "point mass location of the second factor"},
      {"write_table", "--write-table", Kind::flag, "also write the convolution table"},
  };
  return all;
}

// nested keys for the Monte Carlo checks of simulate
const std::vector<std::pair<std::string, Flag>>& nested_flags() {
  static const std::vector<std::pair<std::string, Flag>> all = {
      {"martingale", {"j_max", "--martingale-j-max", Kind::integer, "martingale check for j = 1..J"}},
      {"martingale", {"samples", "--martingale-samples", Kind::integer, "martingale samples"}},
      {"martingale", {"t", "--martingale-t", Kind::number, "martingale time"}},
      {"compensated", {"j_max", "--compensated-j-max", Kind::integer, "compensated check for j = 1..J"}},
      {"compensated", {"samples", "--compensated-samples", Kind::integer, "compensated samples"}},
      {"compensated", {"step", "--compensated-step", Kind::number, "compensated step"}},
      {"compensated", {"steps", "--compensated-steps", Kind::integer, "compensated steps"}},
  };
  return all;
}

struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFailure("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigFailure(path + ": " + e.what());
  }
}

json convert(const Flag& f, const std::string& raw) {
  auto split = [&](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
  };
  try {
    switch (f.kind) {
      case Kind::text: return raw;
      case Kind::integer: {
        std::size_t pos = 0;
        long long v = std::stoll(raw, &pos);
        if (pos != raw.size()) break;
        return v;
      }
      case Kind::number: {
        std::size_t pos = 0;
        double v = std::stod(raw, &pos);
        if (pos != raw.size()) break;
        return v;
      }
      case Kind::numbers: {
        json a = json::array();
        for (const auto& p : split(raw)) a.push_back(std::stod(p));
        return a;
      }
      case Kind::integers: {
        json a = json::array();
        for (const auto& p : split(raw)) a.push_back(std::stoll(p));
        return a;
      }
      case Kind::flag: return true;
      case Kind::file_json: return read_json_file(raw);
    }
  } catch (const std::logic_error&) {
  }
  throw ConfigFailure("cannot parse " + f.name + " value '" + raw + "'");
}

std::string timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral and measure-algebra experiments for diffusion semigroups"};
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"eigen", "Neumann eigenvalues and contour data"},
      {"kernel-scan", "scan the product-formula kernel for negative values"},
      {"maximizers", "common-maximizer check"},
      {"convolve", "convolve two point masses on a rectangle table"},
      {"axioms", "convolution axiom suite on a rectangle"},
      {"simulate", "simulate Levy paths and Monte Carlo checks"},
      {"expand-gradient", "eigenfunction expansion of values and gradients"},
      {"zeros", "Bessel derivative and annulus cross-product zeros"},
      {"product-measure", "Sturm-Liouville product measures"},
  };
  std::map<std::string, std::string> raw;
  std::map<std::string, std::string> raw_nested;
  std::string config_path, out_dir;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config with the same keys as the flags");
    sub->add_option("--out", out_dir, "output directory");
    for (const auto& f : flags()) {
      if (f.kind == Kind::flag)
        sub->add_flag_callback(f.name, [&raw, key = f.key] { raw[key] = "1"; }, f.help);
      else
        sub->add_option_function<std::string>(f.name, [&raw, key = f.key](const std::string& v) { raw[key] = v; },
                                              f.help);
    }
    for (const auto& [group, f] : nested_flags())
      sub->add_option_function<std::string>(
          f.name, [&raw_nested, id = group + "." + f.key](const std::string& v) { raw_nested[id] = v; }, f.help);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  json cfg = json::object();
  try {
    if (!config_path.empty()) {
      cfg = read_json_file(config_path);
      if (!cfg.is_object()) throw ConfigFailure("config file must hold a JSON object");
      if (cfg.contains("command") && cfg["command"] != command)
        throw ConfigFailure("config file is for command " + cfg["command"].dump());
      cfg.erase("command");
      if (cfg.contains("out")) {
        if (out_dir.empty()) out_dir = cfg["out"].get<std::string>();
        cfg.erase("out");
      }
    }
    for (const auto& f : flags())
      if (auto it = raw.find(f.key); it != raw.end()) cfg[f.key] = convert(f, it->second);
    for (const auto& [group, f] : nested_flags())
      if (auto it = raw_nested.find(group + "." + f.key); it != raw_nested.end())
        cfg[group][f.key] = convert(f, it->second);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  if (out_dir.empty()) {
    const char* root = std::getenv("FLTC_OUT_ROOT");
    out_dir = (fs::path(root && *root ? root : "fltc_out") / command).string();
  }

  char* result = nullptr;
  const fltc_status st = fltc_run(command.c_str(), cfg.dump().c_str(), &result);
  if (st != FLTC_OK) {
    std::cerr << command << ": " << fltc_status_name(st) << ": " << fltc_last_error() << '\n';
    return st == FLTC_ERR_CONFIG || st == FLTC_ERR_INVALID_ARGUMENT ? 2 : 1;
  }
  json doc = json::parse(result);
  fltc_string_free(result);

  try {
    fs::create_directories(out_dir);
    json listed = json::array();
    for (const auto& f : doc["files"]) {
      const std::string name = f["name"].get<std::string>();
      write_file(fs::path(out_dir) / name, f["content"].get<std::string>());
      listed.push_back(name);
    }
    write_file(fs::path(out_dir) / "report.json", doc["report"].dump(2) + "\n");
    listed.push_back("report.json");
    json manifest = {{"command", command}, {"timestamp", timestamp()}, {"version", fltc_version()}, {"files", listed}};
    write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return 1;
  }
  std::cout << out_dir << '\n';
  return 0;
}
