// Command-line front end: demo sessions, the attack suite and the cost
// benchmark.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gka/gka.hpp"

namespace {

struct RunConfig {
  std::size_t n = 4;
  std::string prime;       // explicit decimal prime, wins over prime_bits
  unsigned prime_bits = 0; // 0 = default field
  std::uint64_t seed = 1;
  std::string abscissa_mode = "identity";
  std::string out;
  std::string scenario;
  std::string n_list = "2,4,8,16";
};

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::map<std::string, std::string> kv;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

gka::FieldParamsPtr resolve_params(const RunConfig& cfg) {
  if (!cfg.prime.empty()) return gka::field_params(mpz_class(cfg.prime));
  switch (cfg.prime_bits) {
    case 0:
    case 61:
      return gka::mersenne61_params();
    case 256:
      return gka::demo256_params();
    default: {
      // smallest prime of the requested width, deterministic
      mpz_class base = mpz_class(1) << (cfg.prime_bits - 1);
      mpz_class p;
      mpz_nextprime(p.get_mpz_t(), base.get_mpz_t());
      return gka::field_params(p);
    }
  }
}

gka::AbscissaMode resolve_mode(const RunConfig& cfg) {
  if (cfg.abscissa_mode == "identity") return gka::AbscissaMode::Identity;
  if (cfg.abscissa_mode == "hashed") return gka::AbscissaMode::Hashed;
  throw CLI::ValidationError("--abscissa-mode", "must be identity or hashed");
}

std::string key_digest(const gka::SessionKey& k) {
  return gka::to_hex(gka::BytesView(k.bytes.data(), 8));
}

int cmd_demo(const RunConfig& cfg) {
  auto params = resolve_params(cfg);
  std::cout << "demo: n=" << cfg.n << " p_bits=" << params->bits() << " seed=" << cfg.seed
            << " abscissa=" << cfg.abscissa_mode << "\n";
  try {
    gka::Simulation sim(cfg.n, params, cfg.seed, resolve_mode(cfg));
    gka::Transcript t;
    auto keys = sim.run_session(t);
    std::size_t unicasts = 0;
    for (const auto& e : t.events)
      if (e.receiver == 0) ++unicasts;
    std::cout << "  contributions accepted: " << unicasts << "\n";
    std::cout << "  polynomial coefficients: " << cfg.n + 1 << "\n";
    std::cout << "  rounds: " << t.rounds() << "\n";
    bool all_agree = true;
    for (std::size_t i = 1; i < keys.size(); ++i) {
      bool ok = keys[i] == keys[0];
      all_agree = all_agree && ok;
      std::cout << "  user " << i << ": " << (ok ? "accepted, key matches leader" : "KEY MISMATCH")
                << "\n";
    }
    std::cout << "  key digest: " << key_digest(keys[0]) << "\n";
    if (!all_agree) {
      std::cerr << "demo failed: key disagreement\n";
      return 1;
    }
    std::cout << "all " << cfg.n << " users accepted\n";
    return 0;
  } catch (const gka::Error& e) {
    std::cerr << "demo failed: " << e.what() << "\n";
    return 1;
  }
}

int cmd_attacks(const RunConfig& cfg) {
  auto params = resolve_params(cfg);
  try {
    auto results = gka::run_attack_corpus(params, cfg.seed, cfg.scenario);
    bool all_pass = true;
    for (const auto& r : results) {
      all_pass = all_pass && r.pass;
      std::cout << (r.pass ? "PASS" : "FAIL") << "  [" << r.family << "] " << r.name << " — "
                << r.detail << "\n";
    }
    return all_pass ? 0 : 1;
  } catch (const gka::Error& e) {
    std::cerr << "attacks failed: " << e.what() << "\n";
    return 1;
  }
}

int cmd_bench(const RunConfig& cfg) {
  auto params = resolve_params(cfg);
  std::vector<std::size_t> n_values;
  std::stringstream ss(cfg.n_list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) n_values.push_back(std::stoul(item));
  }
  if (n_values.empty()) {
    std::cerr << "bench: empty --n list\n";
    return 2;
  }
  auto reports = gka::measure_costs(n_values, params, cfg.seed);
  std::string csv = gka::cost_reports_to_csv(reports);
  if (!cfg.out.empty()) {
    std::ofstream f(cfg.out);
    if (!f) {
      std::cerr << "bench: cannot write " << cfg.out << "\n";
      return 1;
    }
    f << csv;
  }
  std::cout << "   n  leader_octets  user_octets  rounds  user_mults\n";
  for (const auto& r : reports) {
    std::printf("%4zu  %13zu  %11zu  %6d  %10llu\n", r.n, r.leader_octets, r.user_octets,
                r.rounds, static_cast<unsigned long long>(r.user_mults));
  }
  if (cfg.out.empty()) std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-round contributory group key agreement toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;

  // Pre-scan for --config so file values act as defaults; explicit flags win.
  for (int i = 1; i < argc - 1; ++i) {
    if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
  }
  if (!config_path.empty()) {
    try {
      auto kv = load_config_file(config_path);
      if (kv.count("n")) cfg.n = std::stoul(kv["n"]);
      if (kv.count("prime")) cfg.prime = kv["prime"];
      if (kv.count("prime_bits")) cfg.prime_bits = std::stoul(kv["prime_bits"]);
      if (kv.count("seed")) cfg.seed = std::stoull(kv["seed"]);
      if (kv.count("abscissa_mode")) cfg.abscissa_mode = kv["abscissa_mode"];
      if (kv.count("out")) cfg.out = kv["out"];
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return 2;
    }
  }

  bool seed_given = false;
  auto add_common = [&](CLI::App* sub, bool with_n_scalar) {
    if (with_n_scalar)
      sub->add_option("--n", cfg.n, "group size")->check(CLI::PositiveNumber);
    sub->add_option("--prime", cfg.prime, "explicit prime modulus (decimal)");
    sub->add_option("--prime-bits", cfg.prime_bits, "field size in bits (61 and 256 are published defaults)");
    sub->add_option("--seed", cfg.seed, "deterministic seed")->each([&](const std::string&) {
      seed_given = true;
    });
    sub->add_option("--abscissa-mode", cfg.abscissa_mode, "identity|hashed")
        ->check(CLI::IsMember({"identity", "hashed"}));
    sub->add_option("--config", config_path, "key=value config file (flags win)");
  };

  auto* demo = app.add_subcommand("demo", "run one honest session end to end");
  add_common(demo, true);

  auto* attacks = app.add_subcommand("attacks", "run the adversary-script corpus");
  add_common(attacks, true);
  attacks->add_option("--scenario", cfg.scenario,
                      "run one family: replay|tamper|forge|omission|drop|membership");

  auto* bench = app.add_subcommand("bench", "measure message sizes and op counts");
  add_common(bench, false);
  bench->add_option("--n", cfg.n_list, "comma-separated group sizes");
  bench->add_option("--out", cfg.out, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (!seed_given) {
    if (const char* env = std::getenv("GKA_SEED")) cfg.seed = std::strtoull(env, nullptr, 10);
  }

  try {
    if (demo->parsed()) return cmd_demo(cfg);
    if (attacks->parsed()) return cmd_attacks(cfg);
    if (bench->parsed()) return cmd_bench(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
