// Copyright 2026 The wiresec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end. `run` is the whole program minus main(), so tests
// can drive it with in-memory streams.
//
//   wiresec analyze     --network N --code C [--observer O] [--sink S]
//   wiresec oracle      --network N --code C [--observer O] [--sink S]
//   wiresec osrb        [--network N --code C --observer O] --rates R,.. --n 2,4
//   wiresec sw          --crossover e --rates R --n 4,8
//   wiresec chansim     --rates R --delta d --n 4,8
//   wiresec weak2strong --network N --code C --observer O --sink S --n 2,3
//
// Exit status is 0 on success and 2 on any validation error. Diagnostics go
// to the error stream and start with a fixed prefix per failure class
// ("unknown flag:", "missing file:", "budget exceeded:", ...).

#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wiresec/binninglab.hpp"
#include "wiresec/error.hpp"
#include "wiresec/lincode.hpp"
#include "wiresec/netmodel.hpp"
#include "wiresec/oracle.hpp"
#include "wiresec/secanalyzer.hpp"

namespace wiresec::cli {

inline constexpr const char* kBudgetEnv = "WIRESEC_BUDGET";

struct RunConfig {
  std::string subcommand;
  std::string network_path;
  std::string code_path;
  std::string observer;
  std::string sink;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t budget = kDefaultBudget;
  std::string out_path;
  std::string format = "json";
  unsigned threads = 1;

  std::vector<double> rates;
  std::vector<std::size_t> blocklengths;
  std::size_t trials = 64;
  std::size_t samples = 256;
  std::string kind = "general";
  std::uint32_t field = 2;
  std::uint64_t alphabet = 2;
  double crossover = 0.11;
  double delta = 0.25;
};

namespace detail {

struct MissingFile {
  std::string path;
};

inline std::string load(const std::string& flag, const std::string& path) {
  if (path.empty()) throw Error(ErrorKind::kInvalidArgument, flag + " is required");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile{path};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline CompiledCode load_code(const RunConfig& cfg) {
  std::string net = load("--network", cfg.network_path);
  std::string code = load("--code", cfg.code_path);
  return compile(parse_network(net), parse_code(code));
}

inline BinningKind parse_kind(const std::string& kind) {
  if (kind == "general") return BinningKind::kGeneral;
  if (kind == "linear") return BinningKind::kLinear;
  throw Error(ErrorKind::kInvalidArgument, "--kind must be general or linear");
}

inline void require_blocklengths(const RunConfig& cfg) {
  if (cfg.blocklengths.empty()) throw Error(ErrorKind::kInvalidArgument, "--n needs at least one blocklength");
}

inline std::string csv_rows(const ExperimentReport& r, const std::string& curve) {
  std::string csv = to_csv(r);
  std::string out;
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) out += curve + "," + line + "\n";
  return out;
}

struct Emitted {
  nlohmann::json json;
  std::optional<std::string> csv;  // set for subcommands with a CSV form
};

inline Emitted run_analyze(const RunConfig& cfg) {
  CompiledCode code = load_code(cfg);
  nlohmann::json leak = nlohmann::json::array();
  for (const auto& o : code.observers)
    if (cfg.observer.empty() || o.name == cfg.observer) leak.push_back(leakage(o));
  nlohmann::json dec = nlohmann::json::array();
  for (const auto& s : code.sinks)
    if (cfg.sink.empty() || s.sink == cfg.sink) dec.push_back(decodability(s));
  if (!cfg.observer.empty()) code.observer(cfg.observer);
  if (!cfg.sink.empty()) code.sink(cfg.sink);
  return {{{"command", "analyze"}, {"field", code.field.modulus()}, {"leakage", leak}, {"decodability", dec}},
          std::nullopt};
}

inline Emitted run_oracle(const RunConfig& cfg) {
  CompiledCode code = load_code(cfg);
  EnumerationOptions opts{cfg.budget, cfg.threads};
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& o : code.observers) {
    if (!cfg.observer.empty() && o.name != cfg.observer) continue;
    nlohmann::json j = oracle_report(o, opts);
    j["closed_form_leakage_bits"] = leakage(o).leakage_bits;
    obs.push_back(std::move(j));
  }
  nlohmann::json sinks = nlohmann::json::array();
  for (const auto& s : code.sinks) {
    if (!cfg.sink.empty() && s.sink != cfg.sink) continue;
    sinks.push_back({{"sink", s.sink},
                     {"map_error", exhaustive_decoder_error(code, s.sink, opts)},
                     {"bayes_error", bayes_error(code, s.sink, opts)},
                     {"ambiguity_dim", ambiguity_dimension(s)}});
  }
  if (!cfg.observer.empty()) code.observer(cfg.observer);
  if (!cfg.sink.empty()) code.sink(cfg.sink);
  return {{{"command", "oracle"}, {"field", code.field.modulus()}, {"observers", obs}, {"sinks", sinks}},
          std::nullopt};
}

inline Emitted run_osrb(const RunConfig& cfg) {
  require_blocklengths(cfg);
  OsrbExperiment ex;
  if (!cfg.network_path.empty() || !cfg.code_path.empty()) {
    CompiledCode code = load_code(cfg);
    if (cfg.observer.empty()) throw Error(ErrorKind::kInvalidArgument, "--observer is required with --network");
    JointPmf pmf = enumerate_joint(code, cfg.observer, {cfg.budget, cfg.threads});
    ex.source = source_from_joint(pmf, code.message_lengths);
    ex.p = code.field.modulus();
  } else {
    ex.source = uniform_source(cfg.alphabet);
    ex.p = cfg.field;
  }
  std::vector<double> rates = cfg.rates.empty() ? std::vector<double>{0.5} : cfg.rates;
  if (rates.size() != ex.source.alphabets.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "--rates needs one rate per message (" + std::to_string(ex.source.alphabets.size()) + ")");
  }
  for (std::size_t i = 0; i < rates.size(); ++i) ex.binnings.push_back({i, rates[i]});
  ex.kind = parse_kind(cfg.kind);
  ex.blocklengths = cfg.blocklengths;
  ex.trials = cfg.trials;
  ex.seed = cfg.seed;
  ex.budget = cfg.budget;
  ex.workers = cfg.threads;
  ExperimentReport r = osrb_tv(ex);
  nlohmann::json j = r;
  j["command"] = "osrb";
  j["seed"] = cfg.seed;
  j["rates"] = rates;
  return {j, to_csv(r)};
}

inline Emitted run_sw(const RunConfig& cfg) {
  require_blocklengths(cfg);
  if (cfg.rates.size() > 1) throw Error(ErrorKind::kInvalidArgument, "--rates takes a single rate for sw");
  SlepianWolfExperiment ex;
  ex.channel = binary_symmetric(cfg.crossover);
  ex.rate = cfg.rates.empty() ? 0.75 : cfg.rates.front();
  ex.kind = parse_kind(cfg.kind);
  ex.blocklengths = cfg.blocklengths;
  ex.trials = cfg.trials;
  ex.samples = cfg.samples;
  ex.seed = cfg.seed;
  ex.budget = cfg.budget;
  ex.workers = cfg.threads;
  ExperimentReport r = slepian_wolf_error(ex);
  nlohmann::json j = r;
  j["command"] = "sw";
  j["seed"] = cfg.seed;
  j["crossover"] = cfg.crossover;
  return {j, to_csv(r)};
}

inline Emitted run_chansim(const RunConfig& cfg) {
  require_blocklengths(cfg);
  if (cfg.rates.size() > 1) throw Error(ErrorKind::kInvalidArgument, "--rates takes a single rate for chansim");
  ChannelSimulationExperiment ex;
  ex.kind = parse_kind(cfg.kind);
  ex.alphabet = cfg.alphabet;
  ex.p = cfg.field;
  ex.rate = cfg.rates.empty() ? 0.5 : cfg.rates.front();
  ex.delta = cfg.delta;
  ex.blocklengths = cfg.blocklengths;
  ex.trials = cfg.trials;
  ex.seed = cfg.seed;
  ex.budget = cfg.budget;
  ex.workers = cfg.threads;
  ExperimentReport r = channel_simulation(ex);
  nlohmann::json j = r;
  j["command"] = "chansim";
  j["seed"] = cfg.seed;
  return {j, to_csv(r)};
}

inline Emitted run_weak2strong(const RunConfig& cfg) {
  require_blocklengths(cfg);
  if (cfg.observer.empty() || cfg.sink.empty())
    throw Error(ErrorKind::kInvalidArgument, "--observer and --sink are required");
  CompiledCode code = load_code(cfg);
  WeakToStrongOptions opt;
  opt.observer = cfg.observer;
  opt.sink = cfg.sink;
  opt.blocklengths = cfg.blocklengths;
  opt.trials = cfg.trials;
  opt.samples = cfg.samples;
  opt.seed = cfg.seed;
  opt.budget = cfg.budget;
  opt.workers = cfg.threads;
  WeakToStrongReport r = weak_to_strong_demo(code, opt);
  nlohmann::json j = r;
  j["command"] = "weak2strong";
  j["seed"] = cfg.seed;
  std::string csv = "curve,n,mean,stderr\n" + csv_rows(r.joint_tv, "joint_tv") +
                    csv_rows(r.sw_error, "sw_error") + csv_rows(r.simulation_tv, "simulation_tv");
  return {j, csv};
}

}  // namespace detail

inline std::uint64_t default_budget() {
  const char* env = std::getenv(kBudgetEnv);
  if (!env || !*env) return kDefaultBudget;
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size() || v == 0) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::kInvalidArgument, std::string(kBudgetEnv) + " must be a positive integer");
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Secrecy and reliability analysis of linear network codes", "wiresec"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all");

  auto common_files = [&](CLI::App* sub) {
    sub->add_option("--network", cfg.network_path, "network JSON");
    sub->add_option("--code", cfg.code_path, "linear code JSON");
    sub->add_option("--observer", cfg.observer, "eavesdropper set name");
  };
  auto common_run = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--budget", cfg.budget, "enumeration budget (states)");
    sub->add_option("--out", cfg.out_path, "write the report here instead of stdout");
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--threads", cfg.threads, "worker threads")->check(CLI::Range(1u, 1024u));
  };
  auto experiment = [&](CLI::App* sub) {
    sub->add_option("--rates", cfg.rates, "binning rates, bits per use")->delimiter(',');
    sub->add_option("--n", cfg.blocklengths, "blocklengths")->delimiter(',');
    sub->add_option("--trials", cfg.trials, "binning draws per blocklength")->check(CLI::PositiveNumber);
  };

  CLI::App* analyze = app.add_subcommand("analyze", "closed-form leakage and decodability");
  common_files(analyze);
  analyze->add_option("--sink", cfg.sink, "sink node");
  common_run(analyze);

  CLI::App* oracle = app.add_subcommand("oracle", "exact enumeration of leakage and decoder error");
  common_files(oracle);
  oracle->add_option("--sink", cfg.sink, "sink node");
  common_run(oracle);

  CLI::App* osrb = app.add_subcommand("osrb", "output statistics of random binning");
  common_files(osrb);
  experiment(osrb);
  osrb->add_option("--kind", cfg.kind, "general or linear");
  osrb->add_option("--field", cfg.field, "field size for linear binning");
  osrb->add_option("--alphabet", cfg.alphabet, "uniform source alphabet when no network is given");
  common_run(osrb);

  CLI::App* sw = app.add_subcommand("sw", "Slepian-Wolf decoding from a bin index");
  experiment(sw);
  sw->add_option("--crossover", cfg.crossover, "binary symmetric reconstruction noise");
  sw->add_option("--samples", cfg.samples, "sequences per binning")->check(CLI::PositiveNumber);
  sw->add_option("--kind", cfg.kind, "general or linear");
  common_run(sw);

  CLI::App* chansim = app.add_subcommand("chansim", "channel simulation from a bin index");
  experiment(chansim);
  chansim->add_option("--delta", cfg.delta, "randomness rate above log|X| - R");
  chansim->add_option("--kind", cfg.kind, "general or linear");
  chansim->add_option("--field", cfg.field, "field size for linear binning");
  chansim->add_option("--alphabet", cfg.alphabet, "source alphabet");
  common_run(chansim);

  CLI::App* w2s = app.add_subcommand("weak2strong", "weak to strong secrecy pipeline");
  common_files(w2s);
  w2s->add_option("--sink", cfg.sink, "sink node");
  w2s->add_option("--n", cfg.blocklengths, "blocklengths")->delimiter(',');
  w2s->add_option("--trials", cfg.trials, "binning draws per blocklength")->check(CLI::PositiveNumber);
  w2s->add_option("--samples", cfg.samples, "Slepian-Wolf samples per binning")->check(CLI::PositiveNumber);
  common_run(w2s);

  try {
    cfg.budget = default_budget();
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ExtrasError& e) {
    err << "unknown flag: " << e.what() << "\n";
    return 2;
  } catch (const CLI::ParseError& e) {
    err << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 2;
  }

  if (cfg.budget == 0) {
    err << "invalid argument: --budget must be positive\n";
    return 2;
  }

  try {
    detail::Emitted emitted;
    if (analyze->parsed()) emitted = detail::run_analyze(cfg);
    else if (oracle->parsed()) emitted = detail::run_oracle(cfg);
    else if (osrb->parsed()) emitted = detail::run_osrb(cfg);
    else if (sw->parsed()) emitted = detail::run_sw(cfg);
    else if (chansim->parsed()) emitted = detail::run_chansim(cfg);
    else emitted = detail::run_weak2strong(cfg);

    std::string text;
    if (cfg.format == "csv") {
      if (!emitted.csv) {
        throw Error(ErrorKind::kInvalidArgument,
                    "csv output is available for osrb, sw, chansim and weak2strong");
      }
      text = *emitted.csv;
    } else {
      text = emitted.json.dump(2) + "\n";
    }
    if (cfg.out_path.empty()) {
      out << text;
    } else {
      std::ofstream file(cfg.out_path, std::ios::binary);
      if (!file) throw Error(ErrorKind::kInvalidArgument, "cannot write " + cfg.out_path);
      file << text;
    }
  } catch (const detail::MissingFile& e) {
    err << "missing file: " << e.path << "\n";
    return 2;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace wiresec::cli
