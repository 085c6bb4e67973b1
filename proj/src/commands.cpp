#include "acsc/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <charconv>
#include <filesystem>
#include <functional>
#include <map>

#include <json.hpp>

#include "acsc/error.hpp"
#include "acsc/io.hpp"

namespace acsc {

using json = nlohmann::json;

namespace {

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config key '" + key + "' has the wrong type");
  }
}

Index get_index(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw std::invalid_argument("config key '" + key + "' must be an integer");
  return v.get<Index>();
}

int get_int(const json& v, const std::string& key) {
  return static_cast<int>(get_index(v, key));
}

BenchSetting setting_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("each benchmark setting must be an object");
  BenchSetting s;
  for (const auto& [key, v] : j.items()) {
    if (key == "n_atoms") s.n_atoms = get_index(v, key);
    else if (key == "atom_len") s.atom_len = get_index(v, key);
    else if (key == "trial_len") s.trial_len = get_index(v, key);
    else if (key == "n_trials") s.n_trials = get_index(v, key);
    else if (key == "lambda") s.lambda = get_as<double>(v, key);
    else throw std::invalid_argument("unknown benchmark setting key '" + key + "'");
  }
  return s;
}

using Setter = std::function<void(RunConfig&, const json&, const std::string&)>;

const std::map<std::string, Setter>& config_keys() {
  static const std::map<std::string, Setter> keys = {
      {"alpha", [](RunConfig& c, const json& v, const std::string& k) { c.hp.alpha = get_as<double>(v, k); }},
      {"lambda", [](RunConfig& c, const json& v, const std::string& k) { c.hp.lambda = get_as<double>(v, k); }},
      {"n_atoms", [](RunConfig& c, const json& v, const std::string& k) { c.hp.n_atoms = get_index(v, k); }},
      {"atom_len", [](RunConfig& c, const json& v, const std::string& k) { c.hp.atom_len = get_index(v, k); }},
      {"em_iters", [](RunConfig& c, const json& v, const std::string& k) { c.hp.em_iters = get_int(v, k); }},
      {"mstep_iters", [](RunConfig& c, const json& v, const std::string& k) { c.hp.mstep_iters = get_int(v, k); }},
      {"mcmc_iters", [](RunConfig& c, const json& v, const std::string& k) { c.hp.mcmc_iters = get_int(v, k); }},
      {"burn_in", [](RunConfig& c, const json& v, const std::string& k) { c.hp.burn_in = get_int(v, k); }},
      {"seed", [](RunConfig& c, const json& v, const std::string& k) {
         if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
           throw std::invalid_argument("config key '" + k + "' must be a nonnegative integer");
         }
         c.hp.seed = v.get<std::uint64_t>();
       }},
      {"grad_tol", [](RunConfig& c, const json& v, const std::string& k) { c.hp.grad_tol = get_as<double>(v, k); }},
      {"max_inner_iters", [](RunConfig& c, const json& v, const std::string& k) { c.hp.max_inner_iters = get_int(v, k); }},
      {"restarts", [](RunConfig& c, const json& v, const std::string& k) { c.restarts = get_int(v, k); }},
      {"z_ftol", [](RunConfig& c, const json& v, const std::string& k) { c.z_ftol = get_as<double>(v, k); }},
      {"z_solver", [](RunConfig& c, const json& v, const std::string& k) { c.z_solver = parse_z_solver(get_as<std::string>(v, k)); }},
      {"d_solver", [](RunConfig& c, const json& v, const std::string& k) { c.d_solver = parse_d_solver(get_as<std::string>(v, k)); }},
      {"weight_init", [](RunConfig& c, const json& v, const std::string& k) { c.weight_init = parse_weight_init(get_as<std::string>(v, k)); }},
      {"jobs", [](RunConfig& c, const json& v, const std::string& k) { c.jobs = get_int(v, k); }},
      {"bcd_passes", [](RunConfig& c, const json& v, const std::string& k) { c.bcd_passes = get_int(v, k); }},
      {"persist_chains", [](RunConfig& c, const json& v, const std::string& k) { c.persist_chains = get_as<bool>(v, k); }},
      {"n_trials", [](RunConfig& c, const json& v, const std::string& k) { c.n_trials = get_index(v, k); }},
      {"trial_len", [](RunConfig& c, const json& v, const std::string& k) { c.trial_len = get_index(v, k); }},
      {"noise_std", [](RunConfig& c, const json& v, const std::string& k) { c.noise_std = get_as<double>(v, k); }},
      {"corrupt_fraction", [](RunConfig& c, const json& v, const std::string& k) { c.corrupt_fraction = get_as<double>(v, k); }},
      {"corrupt_noise_std", [](RunConfig& c, const json& v, const std::string& k) { c.corrupt_noise_std = get_as<double>(v, k); }},
      {"trials", [](RunConfig& c, const json& v, const std::string& k) { c.trials = get_as<std::string>(v, k); }},
      {"truth", [](RunConfig& c, const json& v, const std::string& k) { c.truth = get_as<std::string>(v, k); }},
      {"model", [](RunConfig& c, const json& v, const std::string& k) { c.model = get_as<std::string>(v, k); }},
      {"history", [](RunConfig& c, const json& v, const std::string& k) { c.history = get_as<std::string>(v, k); }},
      {"init", [](RunConfig& c, const json& v, const std::string& k) { c.init = get_as<std::string>(v, k); }},
      {"output", [](RunConfig& c, const json& v, const std::string& k) { c.output = get_as<std::string>(v, k); }},
      {"summary", [](RunConfig& c, const json& v, const std::string& k) { c.summary = get_as<std::string>(v, k); }},
      {"settings", [](RunConfig& c, const json& v, const std::string&) {
         if (!v.is_array()) throw std::invalid_argument("config key 'settings' must be an array");
         c.settings.clear();
         for (const json& s : v) c.settings.push_back(setting_from_json(s));
       }},
      {"solvers", [](RunConfig& c, const json& v, const std::string& k) { c.solvers = get_as<std::vector<std::string>>(v, k); }},
      {"n_seeds", [](RunConfig& c, const json& v, const std::string& k) { c.bench.n_seeds = get_int(v, k); }},
      {"target_precision", [](RunConfig& c, const json& v, const std::string& k) { c.bench.target_precision = get_as<double>(v, k); }},
      {"bench_mode", [](RunConfig& c, const json& v, const std::string& k) {
         const auto mode = get_as<std::string>(v, k);
         if (mode == "mstep") c.bench.mode = BenchMode::mstep;
         else if (mode == "z") c.bench.mode = BenchMode::z_subproblem;
         else throw std::invalid_argument("bench_mode must be 'mstep' or 'z'");
       }},
      {"max_iters", [](RunConfig& c, const json& v, const std::string& k) { c.bench.max_iters = get_int(v, k); }},
      {"stop_tol", [](RunConfig& c, const json& v, const std::string& k) { c.bench.stop_tol = get_as<double>(v, k); }},
      {"inner_tol", [](RunConfig& c, const json& v, const std::string& k) { c.bench.inner_tol = get_as<double>(v, k); }},
      {"inner_max_iter", [](RunConfig& c, const json& v, const std::string& k) { c.bench.inner_max_iter = get_int(v, k); }},
  };
  return keys;
}

void require_parent_dir(const std::string& path, const std::string& what) {
  require(!path.empty(), what + " path is required");
  namespace fs = std::filesystem;
  const fs::path parent = fs::path(path).parent_path();
  require(parent.empty() || fs::is_directory(parent),
          what + " path '" + path + "': directory does not exist");
  require(!fs::is_directory(path), what + " path '" + path + "' is a directory");
}

std::string trials_bytes(const std::string& path, const TrialSet& x) {
  // write_trials picks the binary layout; CSV output is plain text.
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    std::string out;
    std::array<char, 64> buf{};
    for (Index n = 0; n < x.n_trials(); ++n) {
      const auto row = x.trial(n);
      for (std::size_t t = 0; t < row.size(); ++t) {
        if (t) out += ',';
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), row[t]);
        out.append(buf.data(), res.ptr);
      }
      out += '\n';
    }
    return out;
  }
  return {};
}

// Writes all files or none: on failure, files already written are removed.
void write_all(const std::vector<std::pair<std::string, std::function<void(const std::string&)>>>& jobs) {
  std::vector<std::string> done;
  try {
    for (const auto& [path, write] : jobs) {
      write(path);
      done.push_back(path);
    }
  } catch (...) {
    for (const auto& p : done) std::filesystem::remove(p);
    throw;
  }
}

void validate_hp(const RunConfig& cfg) {
  cfg.hp.validate();
  require(cfg.jobs >= 1, "jobs must be >= 1");
  require(cfg.bcd_passes >= 1, "bcd_passes must be >= 1");
  require(cfg.restarts >= 1, "restarts must be >= 1");
  require(cfg.z_ftol >= 0.0, "z_ftol must be >= 0");
}

}  // namespace

RunConfig apply_config_json(const std::string& text, RunConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  const auto& keys = config_keys();
  for (const auto& [key, value] : j.items()) {
    const auto it = keys.find(key);
    if (it == keys.end()) throw std::invalid_argument("unknown config key '" + key + "'");
    it->second(base, value, key);
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const IoError& e) {
    throw std::invalid_argument(e.what());
  }
  return apply_config_json(text, std::move(base));
}

BenchSolver parse_bench_solver(const std::string& name) {
  const auto plus = name.find('+');
  BenchSolver s;
  s.name = name;
  s.z_solver = parse_z_solver(name.substr(0, plus));
  s.d_solver = plus == std::string::npos ? DSolver::joint : parse_d_solver(name.substr(plus + 1));
  return s;
}

std::string cmd_generate(const RunConfig& cfg) {
  require(cfg.n_trials >= 1 && cfg.trial_len >= 2, "n_trials and trial_len must be positive");
  require(cfg.hp.n_atoms >= 1 && cfg.hp.atom_len >= 2 && cfg.hp.atom_len <= cfg.trial_len,
          "need 1 <= n_atoms and 2 <= atom_len <= trial_len");
  require(cfg.noise_std >= 0.0 && cfg.corrupt_noise_std >= 0.0, "noise levels must be >= 0");
  require(cfg.corrupt_fraction >= 0.0 && cfg.corrupt_fraction <= 1.0,
          "corrupt_fraction must lie in [0, 1]");
  require_parent_dir(cfg.trials, "trials");
  require_parent_dir(cfg.truth, "truth");
  require(cfg.trials != cfg.truth, "trials and truth paths must differ");

  Rng rng = derive_stream(cfg.hp.seed, StreamTag::synthetic);
  SyntheticData data = generate_synthetic(cfg.n_trials, cfg.trial_len, cfg.hp.n_atoms,
                                          cfg.hp.atom_len, cfg.noise_std, rng);
  TrialSet trials = std::move(data.trials);
  std::vector<bool> mask(static_cast<std::size_t>(cfg.n_trials), false);
  if (cfg.corrupt_fraction > 0.0) {
    Rng crng = derive_stream(cfg.hp.seed, StreamTag::corruption);
    Corruption c = corrupt_trials(trials, cfg.corrupt_fraction, cfg.corrupt_noise_std, crng);
    trials = std::move(c.trials);
    mask = std::move(c.mask);
  }
  ModelFile truth{data.truth.dictionary, data.truth.activations, std::nullopt, mask,
                  cfg.noise_std};

  const std::string csv = trials_bytes(cfg.trials, trials);
  write_all({{cfg.trials,
              [&](const std::string& p) {
                if (csv.empty()) write_trials(p, trials);
                else write_text(p, csv);
              }},
             {cfg.truth, [&](const std::string& p) { write_model(p, truth); }}});

  const auto corrupted = std::count(mask.begin(), mask.end(), true);
  const json manifest = {{"command", "generate"},   {"seed", cfg.hp.seed},
                         {"n_trials", cfg.n_trials}, {"trial_len", cfg.trial_len},
                         {"n_atoms", cfg.hp.n_atoms}, {"atom_len", cfg.hp.atom_len},
                         {"noise_std", cfg.noise_std}, {"corrupted_trials", corrupted},
                         {"trials", cfg.trials},     {"truth", cfg.truth}};
  return manifest.dump() + "\n";
}

std::string cmd_fit(const RunConfig& cfg) {
  validate_hp(cfg);
  require(!cfg.trials.empty(), "trials path is required");
  require_parent_dir(cfg.model, "model");
  const std::string history_path = cfg.history.empty() ? cfg.model + ".history.jsonl" : cfg.history;
  require_parent_dir(history_path, "history");
  require(history_path != cfg.model, "model and history paths must differ");

  TrialSet x = read_trials(cfg.trials);
  require(cfg.hp.atom_len <= x.trial_len(), "atom_len exceeds the trial length");
  std::optional<FitInit> init;
  if (!cfg.init.empty()) {
    ModelFile m = read_model(cfg.init);
    require(m.dictionary.n_atoms() == cfg.hp.n_atoms && m.dictionary.atom_len() == cfg.hp.atom_len,
            "init model does not match n_atoms/atom_len");
    require(m.activations.n_trials() == x.n_trials() &&
                m.activations.n_shifts() == x.trial_len() - cfg.hp.atom_len + 1,
            "init model activations do not match the trials");
    if (m.weights) {
      require(m.weights->n_trials() == x.n_trials() && m.weights->trial_len() == x.trial_len(),
              "init model weights do not match the trials");
    }
    init = FitInit{std::move(m.dictionary), std::move(m.activations), std::move(m.weights)};
  }

  FitOptions fo;
  fo.mstep.z_solver = cfg.z_solver;
  fo.mstep.d_solver = cfg.d_solver;
  fo.mstep.bcd_passes = cfg.bcd_passes;
  fo.mstep.jobs = cfg.jobs;
  fo.mstep.z_ftol = cfg.z_ftol;
  fo.restarts = cfg.restarts;
  fo.estep.jobs = cfg.jobs;
  fo.estep.persist_chains = cfg.persist_chains;
  fo.weight_init = cfg.weight_init;
  FitResult r = fit(x, cfg.hp, init, fo);

  ModelFile out{r.dictionary, r.activations, r.weights, std::nullopt, std::nullopt};
  write_all({{cfg.model, [&](const std::string& p) { write_model(p, out); }},
             {history_path, [&](const std::string& p) { write_history(p, r.history); }}});

  const json report = {{"command", "fit"},
                       {"final_objective", r.final_objective},
                       {"restart", r.restart},
                       {"em_iters", cfg.hp.em_iters},
                       {"mstep_iters", cfg.hp.mstep_iters},
                       {"model", cfg.model},
                       {"history", history_path}};
  return report.dump() + "\n";
}

std::string cmd_bench(const RunConfig& cfg) {
  require(!cfg.solvers.empty(), "no solvers registered");
  require(cfg.jobs >= 1, "jobs must be >= 1");
  std::vector<BenchSolver> solvers;
  for (const auto& name : cfg.solvers) solvers.push_back(parse_bench_solver(name));
  std::vector<BenchSetting> settings = cfg.settings;
  if (settings.empty()) {
    settings.push_back({cfg.hp.n_atoms, cfg.hp.atom_len, cfg.trial_len, cfg.n_trials, cfg.hp.lambda});
  }
  for (const auto& s : settings) {
    require(s.n_atoms >= 1 && s.atom_len >= 2 && s.atom_len <= s.trial_len && s.n_trials >= 1 &&
                s.lambda > 0.0,
            "invalid benchmark setting");
  }
  require(cfg.bench.n_seeds >= 1, "n_seeds must be >= 1");
  require(cfg.bench.target_precision > 0.0, "target_precision must be positive");
  require(cfg.bench.max_iters >= 1 && cfg.bench.inner_max_iter >= 1, "iteration caps must be >= 1");
  require_parent_dir(cfg.output, "output");
  require_parent_dir(cfg.summary, "summary");
  require(cfg.output != cfg.summary, "output and summary paths must differ");

  BenchOptions bo = cfg.bench;
  bo.seed = cfg.hp.seed;
  bo.jobs = cfg.jobs;
  bo.noise_std = cfg.noise_std;
  const BenchReport rep = run_benchmark(settings, solvers, bo);
  write_all({{cfg.output, [&](const std::string& p) { write_text(p, bench_records_to_json(rep.records)); }},
             {cfg.summary, [&](const std::string& p) { write_text(p, bench_summary_to_csv(rep.summary)); }}});

  json rows = json::array();
  for (const auto& r : rep.summary) {
    rows.push_back({{"solver", r.solver}, {"runs", r.runs}, {"reached", r.reached},
                    {"time_to_target", std::isnan(r.time_to_target) ? json(nullptr) : json(r.time_to_target)},
                    {"note", r.note}});
  }
  return json({{"command", "bench"}, {"summary", rows}}).dump() + "\n";
}

std::string cmd_eval(const RunConfig& cfg) {
  require(!cfg.model.empty() && !cfg.truth.empty(), "model and truth paths are required");
  const ModelFile model = read_model(cfg.model);
  const ModelFile truth = read_model(cfg.truth);
  require(model.dictionary.n_atoms() == truth.dictionary.n_atoms() &&
              model.dictionary.atom_len() == truth.dictionary.atom_len(),
          "model and truth dictionaries have different shapes");
  const Alignment a = align_atoms(model.dictionary, truth.dictionary);
  const json report = {{"command", "eval"},
                       {"distance", a.distance},
                       {"per_atom", a.per_atom},
                       {"match", a.match},
                       {"sign", a.sign},
                       {"shift", a.shift}};
  return report.dump() + "\n";
}

}  // namespace acsc
