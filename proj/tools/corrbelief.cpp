//------------------------------------------------------------------------------
//
//   Copyright 2026 The corrbelief Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------
// Command-line front end. Links only the C interface.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 runtime failure.

#include "corrbelief/corrbelief.h"
#include "http_server.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Failure
{
  int code;
  std::string message;
};

int exit_code_for(cb_status status)
{
  switch (status)
  {
  case CB_INVALID_ARGUMENT:
  case CB_PARSE:
  case CB_NOT_FOUND:
    return kExitConfig;
  default:
    return kExitRuntime;
  }
}

void check(cb_status status, std::string const &what)
{
  if (status != CB_OK)
    throw Failure{exit_code_for(status), what + ": " + cb_last_error()};
}

/// Owns a string returned by the C interface.
class CString
{
public:
  CString() = default;
  ~CString() { cb_string_free(text_); }
  CString(CString const &) = delete;
  CString &operator=(CString const &) = delete;

  char **out() { return &text_; }
  std::string str() const { return text_ ? text_ : ""; }

private:
  char *text_ = nullptr;
};

std::string read_file(fs::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Failure{kExitConfig, "cannot read " + path.string()};
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

Json parse(std::string const &text, std::string const &what)
{
  try
  {
    return Json::parse(text);
  }
  catch (Json::exception const &e)
  {
    throw Failure{kExitConfig, what + ": " + e.what()};
  }
}

void write_file(fs::path const &path, std::string const &content)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.flush();
  if (!out)
    throw Failure{kExitRuntime, "cannot write " + path.string()};
}

void prepare_output(fs::path const &dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw Failure{kExitRuntime, "cannot create output directory " + dir.string()};
}

/// Writes the manifest first, then every file it lists.
void emit(fs::path const &out, Json manifest, Json const &files)
{
  prepare_output(out);
  Json outputs = Json::array();
  for (auto const &[name, content] : files.items())
    outputs.push_back(name);
  manifest["outputs"] = outputs;
  write_file(out / "manifest.json", manifest.dump(2) + "\n");
  for (auto const &[name, content] : files.items())
    write_file(out / name, content.get<std::string>());
}

Json base_manifest(std::string const &command, std::string const &config_path,
                   std::uint64_t seed, std::string const &out)
{
  char const *version = cb_version();
  return Json{{"tool", "corrbelief"},
              {"version", version},
              {"command", command},
              {"config_path", config_path},
              {"seed", seed},
              {"output_dir", out}};
}

struct Options
{
  std::string config;
  std::string fleet;
  std::string bundle;
  std::string out = "out";
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::optional<double> rho;
  std::size_t n = 100;
  std::string name = "dataset";
  std::size_t grid = 201;
  std::vector<std::string> studies;
  std::string listen = "127.0.0.1:8080";
  std::string data_dir;
  bool trust_client_time = false;
  bool seed_given = false;
};

int run_generate(Options const &o)
{
  Json files;
  std::string config_text;
  if (!o.config.empty())
  {
    config_text = read_file(o.config);
  }
  else if (o.rho)
  {
    config_text = Json{{"datasets", {{{"name", o.name}, {"rho_pop", *o.rho}, {"n", o.n}}}}}.dump();
  }
  else
  {
    throw Failure{kExitConfig, "generate needs --config or --rho"};
  }
  CString result;
  check(cb_generate_batch(config_text.c_str(), o.seed, result.out()), "generate");
  files = parse(result.str(), "generate result").at("files");

  Json manifest = base_manifest("generate", o.config, o.seed, o.out);
  manifest["summary"] = {{"datasets", files.size() / 2}};
  emit(o.out, std::move(manifest), files);
  std::cout << "wrote " << files.size() / 2 << " datasets to " << o.out << "\n";
  return 0;
}

int run_simulate(Options const &o)
{
  std::string const study = read_file(o.config);
  std::string const fleet = read_file(o.fleet);
  CString normalized_fleet;
  check(cb_validate_study(study.c_str(), nullptr), "study config " + o.config);
  check(cb_validate_fleet(fleet.c_str(), normalized_fleet.out()), "fleet " + o.fleet);

  CString result;
  check(cb_simulate(study.c_str(), fleet.c_str(), o.seed, o.jobs, result.out()), "simulate");
  Json const parsed = parse(result.str(), "simulation result");

  Json manifest = base_manifest("simulate", o.config, o.seed, o.out);
  manifest["fleet_path"] = o.fleet;
  manifest["agents"] = parse(normalized_fleet.str(), "fleet");
  manifest["summary"] = parsed.at("summary");
  emit(o.out, std::move(manifest), parsed.at("files"));
  auto const &s = parsed.at("summary");
  std::cout << "simulated " << s.at("sessions") << " sessions (" << s.at("trials")
            << " trials, " << s.at("excluded_sessions") << " flagged) into " << o.out << "\n";
  return 0;
}

Json read_bundle_info(fs::path const &bundle)
{
  return parse(read_file(bundle / "bundle.json"), (bundle / "bundle.json").string());
}

int run_densities(Options const &o)
{
  fs::path const bundle(o.bundle);
  Json const info = read_bundle_info(bundle);
  if (!info.value("sealed", false))
    throw Failure{kExitConfig, "bundle " + o.bundle + " contains unsealed sessions"};
  std::string const sessions = read_file(bundle / "sessions.jsonl");
  CString result;
  check(cb_densities(sessions.c_str(), o.grid, result.out()), "densities");
  Json const files = parse(result.str(), "density result").at("files");

  Json manifest = base_manifest("densities", o.bundle, o.seed, o.out);
  manifest["summary"] = {{"pairs", files.size() / 2}, {"grid_points", o.grid}};
  emit(o.out, std::move(manifest), files);
  std::cout << "wrote densities for " << files.size() / 2 << " pairs to " << o.out << "\n";
  return 0;
}

int run_score(Options const &o)
{
  std::string input;
  std::string source;
  if (!o.bundle.empty())
  {
    fs::path const bundle(o.bundle);
    Json const info = read_bundle_info(bundle);
    std::string const sessions = read_file(bundle / "sessions.jsonl");
    std::optional<std::string> mcmc;
    if (!o.config.empty())
      mcmc = parse(read_file(o.config), o.config).value("mcmc", Json::object()).dump();
    CString built;
    check(cb_scoring_input(sessions.c_str(), mcmc ? mcmc->c_str() : nullptr, built.out()),
          "reading bundle " + o.bundle);
    input = built.str();
    source = o.bundle;
  }
  else if (!o.config.empty())
  {
    input = read_file(o.config);
    source = o.config;
  }
  else
  {
    throw Failure{kExitConfig, "score needs --config or --bundle"};
  }
  CString csv;
  check(cb_score(input.c_str(), o.seed, csv.out()), "score");

  Json manifest = base_manifest("score", source, o.seed, o.out);
  std::string const table = csv.str();
  manifest["summary"] = {{"scores", std::count(table.begin(), table.end(), '\n') - 1}};
  emit(o.out, std::move(manifest), Json{{"scores.csv", table}});
  std::cout << "wrote " << o.out << "/scores.csv\n";
  return 0;
}

std::string env_or(char const *name, std::string const &fallback)
{
  char const *value = std::getenv(name);
  return value && *value ? value : fallback;
}

int run_serve(Options const &o)
{
  if (o.studies.empty())
    throw Failure{kExitConfig, "serve needs at least one --config"};
  std::string const listen = env_or("CORRBELIEF_LISTEN", o.listen);
  auto const colon = listen.rfind(':');
  int port = -1;
  try
  {
    if (colon != std::string::npos)
      port = std::stoi(listen.substr(colon + 1));
  }
  catch (std::exception const &)
  {}
  if (port < 0 || port > 65535)
    throw Failure{kExitConfig, "listen address must look like host:port, got '" + listen + "'"};
  std::string const host = listen.substr(0, colon);

  Json options{{"trust_client_time", o.trust_client_time}};
  std::string const data_dir = env_or("CORRBELIEF_DATA_DIR", o.data_dir);
  if (!data_dir.empty())
    options["data_dir"] = data_dir;

  cb_service *service = nullptr;
  check(cb_service_create(options.dump().c_str(), &service), "starting service");
  std::unique_ptr<cb_service, decltype(&cb_service_free)> owner(service, cb_service_free);
  for (auto const &path : o.studies)
  {
    Json study = parse(read_file(path), path);
    if (o.seed_given)
      study["seed"] = o.seed;
    check(cb_service_add_study(service, study.dump().c_str()), "study config " + path);
  }
  if (!data_dir.empty())
  {
    std::size_t restored = 0;
    check(cb_service_recover(service, &restored), "recovering sessions");
    std::cout << "restored " << restored << " sessions from " << data_dir << "\n";
  }

  corrbelief::tools::HttpServer server(service);
  int const bound = server.bind(host, port);
  if (bound < 0)
    throw Failure{kExitRuntime, "cannot listen on " + listen};
  std::cout << "listening on " << host << ":" << bound << std::endl;
  if (!server.serve())
    throw Failure{kExitRuntime, "server stopped unexpectedly"};
  return 0;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Correlation belief elicitation, updating models and simulated studies"};
  app.require_subcommand(1);
  Options o;

  auto *generate = app.add_subcommand("generate", "Generate bivariate datasets (CSV + JSON)");
  generate->add_option("--config", o.config, "Batch config or fixed-dataset study config");
  generate->add_option("--rho", o.rho, "Population correlation of a single dataset");
  generate->add_option("--n", o.n, "Points in a single dataset")->check(CLI::Range(3, 1000000));
  generate->add_option("--name", o.name, "File stem of a single dataset");

  auto *simulate = app.add_subcommand("simulate", "Run a study with a simulated fleet");
  simulate->add_option("--config", o.config, "Study config")->required();
  simulate->add_option("--fleet", o.fleet, "Fleet spec")->required();
  simulate->add_option("--jobs", o.jobs, "Sessions run concurrently")->check(CLI::Range(1, 1024));

  auto *densities = app.add_subcommand("densities", "Density summaries of an export bundle");
  densities->add_option("--bundle", o.bundle, "Export bundle directory")->required();
  densities->add_option("--grid", o.grid, "Grid points per density")->check(CLI::Range(2, 100000));

  auto *score = app.add_subcommand("score", "Score elicited posteriors against the models");
  score->add_option("--config", o.config, "Scoring input, or study config with --bundle");
  score->add_option("--bundle", o.bundle, "Rescore the sealed trials of an export bundle");

  auto *serve = app.add_subcommand("serve", "Serve the session API over HTTP");
  serve->add_option("--config", o.studies, "Study config (repeatable)")->required();
  serve->add_option("--listen", o.listen, "host:port (env CORRBELIEF_LISTEN)");
  serve->add_option("--data-dir", o.data_dir, "Event log directory (env CORRBELIEF_DATA_DIR)");
  serve->add_flag("--trust-client-time", o.trust_client_time,
                  "Take event times from request at_ms fields");

  for (auto *sub : {generate, simulate, densities, score})
  {
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--seed", o.seed, "Seed");
  }
  serve->add_option("--seed", o.seed, "Overrides the seed of every study (env CORRBELIEF_SEED)");

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::CallForHelp const &e)
  {
    return app.exit(e);
  }
  catch (CLI::ParseError const &e)
  {
    app.exit(e);
    return kExitConfig;
  }

  try
  {
    if (generate->parsed())
      return run_generate(o);
    if (simulate->parsed())
      return run_simulate(o);
    if (densities->parsed())
      return run_densities(o);
    if (score->parsed())
      return run_score(o);
    o.seed_given = serve->count("--seed") > 0;
    if (auto const env = env_or("CORRBELIEF_SEED", ""); !o.seed_given && !env.empty())
    {
      try
      {
        o.seed = std::stoull(env);
      }
      catch (std::exception const &)
      {
        throw Failure{kExitConfig, "CORRBELIEF_SEED must be an unsigned integer"};
      }
      o.seed_given = true;
    }
    return run_serve(o);
  }
  catch (Failure const &f)
  {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  }
  catch (std::exception const &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
