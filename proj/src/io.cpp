#include "acsc/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "acsc/error.hpp"

namespace acsc {

using json = nlohmann::json;

namespace {

constexpr std::array<char, 4> kMagic{'A', 'C', 'S', 'C'};
constexpr std::uint32_t kTrialsVersion = 1;
constexpr int kModelVersion = 1;

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
  }
}

template <typename U>
U get_le(const std::string& in, std::size_t offset) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return value;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(),
                    [](char a, char b) { return std::tolower(a) == std::tolower(b); });
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

TrialSet read_trials_csv(const std::string& path, const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t end = line.find(',', pos);
      if (end == std::string::npos) end = line.size();
      std::size_t a = pos, b = end;
      while (a < b && (line[a] == ' ' || line[a] == '\t')) ++a;
      while (b > a && (line[b - 1] == ' ' || line[b - 1] == '\t')) --b;
      double v = 0.0;
      const auto res = std::from_chars(line.data() + a, line.data() + b, v);
      if (a == b || res.ec != std::errc() || res.ptr != line.data() + b) {
        throw IoError(path + ":" + std::to_string(line_no) + ":" + std::to_string(a + 1) +
                      ": cannot parse '" + line.substr(a, b - a) + "' as a number");
      }
      row.push_back(v);
      pos = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(rows.front().size()) + " values, found " +
                    std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": no trials found");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t t = 0; t < rows[n].size(); ++t) {
      m(static_cast<Index>(n), static_cast<Index>(t)) = rows[n][t];
    }
  }
  try {
    return TrialSet(std::move(m));
  } catch (const std::invalid_argument& e) {
    throw IoError(path + ": " + e.what());
  }
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, Index rows, Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
    throw IoError(what + ": expected " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw IoError(what + ": row " + std::to_string(r) + " must have " + std::to_string(cols) +
                    " values");
    }
    for (Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw IoError(what + ": non-numeric entry in row " + std::to_string(r));
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Report line/column alongside the byte offset.
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw IoError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                  " (byte " + std::to_string(e.byte) + "): " + e.what());
  }
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError(path + ": write failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_trials(const std::string& path, const TrialSet& x) {
  std::string out;
  out.reserve(24 + static_cast<std::size_t>(x.data().size()) * 8);
  out.append(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kTrialsVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.n_trials()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.trial_len()));
  for (Index n = 0; n < x.n_trials(); ++n) {
    for (double v : x.trial(n)) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  write_text(path, out);
}

TrialSet read_trials(const std::string& path) {
  const std::string bytes = read_text(path);
  if (ends_with(path, ".csv")) return read_trials_csv(path, bytes);

  if (bytes.size() < 24 || std::memcmp(bytes.data(), kMagic.data(), 4) != 0) {
    throw IoError(path + ": not a trials file (bad magic at byte 0)");
  }
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kTrialsVersion) {
    throw IoError(path + ": unsupported trials format version " + std::to_string(version) +
                  " at byte 4");
  }
  const auto n = get_le<std::uint64_t>(bytes, 8);
  const auto t = get_le<std::uint64_t>(bytes, 16);
  if (n == 0 || t == 0 || n > (bytes.size() - 24) / 8 / t ||
      bytes.size() != 24 + n * t * 8) {
    throw IoError(path + ": header declares " + std::to_string(n) + "x" + std::to_string(t) +
                  " values but the payload has " + std::to_string(bytes.size() - 24) + " bytes");
  }
  Matrix m(static_cast<Index>(n), static_cast<Index>(t));
  std::size_t offset = 24;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      m(r, c) = std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset));
      offset += 8;
    }
  }
  try {
    return TrialSet(std::move(m));
  } catch (const std::invalid_argument& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::string model_to_json(const ModelFile& model) {
  const Dictionary& d = model.dictionary;
  const ActivationSet& z = model.activations;
  json j;
  j["format"] = "alphacsc-model";
  j["version"] = kModelVersion;
  j["n_atoms"] = d.n_atoms();
  j["atom_len"] = d.atom_len();
  j["atoms"] = matrix_to_json(d.atoms());
  json triplets = json::array();
  for (const Triplet& tr : to_triplets(z)) triplets.push_back({tr.trial, tr.atom, tr.time, tr.value});
  j["activations"] = {{"shape", {z.n_trials(), z.n_atoms(), z.n_shifts()}},
                      {"triplets", std::move(triplets)}};
  if (model.weights) {
    j["weights"] = {{"shape", {model.weights->n_trials(), model.weights->trial_len()}},
                    {"values", matrix_to_json(model.weights->values())}};
  }
  if (model.corrupted) j["corrupted"] = *model.corrupted;
  if (model.noise_std) j["noise_std"] = *model.noise_std;
  return j.dump(1) + "\n";
}

ModelFile model_from_json(const std::string& text, const std::string& origin) {
  const json j = parse_json(text, origin);
  try {
    if (!j.is_object() || j.value("format", "") != "alphacsc-model") {
      throw IoError(origin + ": not a model file");
    }
    if (j.at("version").get<int>() != kModelVersion) {
      throw IoError(origin + ": unsupported model version");
    }
    const auto K = j.at("n_atoms").get<Index>();
    const auto L = j.at("atom_len").get<Index>();
    ModelFile m;
    m.dictionary = Dictionary(matrix_from_json(j.at("atoms"), K, L, origin + ": atoms"));
    const json& act = j.at("activations");
    const auto shape = act.at("shape").get<std::vector<Index>>();
    if (shape.size() != 3 || shape[1] != K) {
      throw IoError(origin + ": activations shape must be [N, n_atoms, P]");
    }
    std::vector<Triplet> triplets;
    for (const json& t : act.at("triplets")) {
      if (!t.is_array() || t.size() != 4) throw IoError(origin + ": malformed activation triplet");
      triplets.push_back({t[0].get<Index>(), t[1].get<Index>(), t[2].get<Index>(), t[3].get<double>()});
    }
    m.activations = from_triplets(shape[0], shape[1], shape[2], triplets);
    if (j.contains("weights")) {
      const auto ws = j["weights"].at("shape").get<std::vector<Index>>();
      if (ws.size() != 2) throw IoError(origin + ": weights shape must be [N, T]");
      m.weights = WeightField(matrix_from_json(j["weights"].at("values"), ws[0], ws[1],
                                               origin + ": weights"));
    }
    if (j.contains("corrupted")) m.corrupted = j["corrupted"].get<std::vector<bool>>();
    if (j.contains("noise_std")) m.noise_std = j["noise_std"].get<double>();
    return m;
  } catch (const json::exception& e) {
    throw IoError(origin + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(origin + ": " + e.what());
  }
}

void write_model(const std::string& path, const ModelFile& model) {
  write_text(path, model_to_json(model));
}

ModelFile read_model(const std::string& path) { return model_from_json(read_text(path), path); }

std::string history_to_jsonl(const FitHistory& history) {
  std::string out;
  for (const FitRecord& r : history) {
    const json j = {{"em_iter", r.em_iter},
                    {"inner_iter", r.inner_iter},
                    {"objective", r.objective},
                    {"elapsed_seconds", r.elapsed_seconds},
                    {"acceptance_rate", r.mcmc_acceptance_rate}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_history(const std::string& path, const FitHistory& history) {
  write_text(path, history_to_jsonl(history));
}

FitHistory read_history(const std::string& path) {
  const std::string text = read_text(path);
  std::istringstream in(text);
  std::string line;
  FitHistory out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_json(line, path + " line " + std::to_string(line_no));
    try {
      out.push_back({j.at("em_iter").get<int>(), j.at("inner_iter").get<int>(),
                     j.at("objective").get<double>(), j.at("elapsed_seconds").get<double>(),
                     j.at("acceptance_rate").get<double>()});
    } catch (const json::exception& e) {
      throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string bench_records_to_json(const std::vector<BenchRecord>& records) {
  json arr = json::array();
  for (const BenchRecord& r : records) {
    arr.push_back({{"solver", r.solver},
                   {"setting",
                    {{"n_atoms", r.setting.n_atoms},
                     {"atom_len", r.setting.atom_len},
                     {"trial_len", r.setting.trial_len},
                     {"n_trials", r.setting.n_trials},
                     {"lambda", r.setting.lambda}}},
                   {"seed", r.seed},
                   {"converged", r.converged},
                   {"times", r.times},
                   {"objectives", r.objectives}});
  }
  return arr.dump(1) + "\n";
}

std::vector<BenchRecord> bench_records_from_json(const std::string& text) {
  const json arr = parse_json(text, "bench records");
  std::vector<BenchRecord> out;
  try {
    for (const json& j : arr) {
      BenchRecord r;
      r.solver = j.at("solver").get<std::string>();
      const json& s = j.at("setting");
      r.setting = {s.at("n_atoms").get<Index>(), s.at("atom_len").get<Index>(),
                   s.at("trial_len").get<Index>(), s.at("n_trials").get<Index>(),
                   s.at("lambda").get<double>()};
      r.seed = j.at("seed").get<std::uint64_t>();
      r.converged = j.at("converged").get<bool>();
      r.times = j.at("times").get<std::vector<double>>();
      r.objectives = j.at("objectives").get<std::vector<double>>();
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("bench records: ") + e.what());
  }
  return out;
}

std::string bench_summary_to_csv(const std::vector<BenchSummaryRow>& rows) {
  std::string out =
      "solver,n_atoms,atom_len,trial_len,n_trials,lambda,runs,reached,time_to_target,note\n";
  for (const BenchSummaryRow& r : rows) {
    out += r.solver + ',' + std::to_string(r.setting.n_atoms) + ',' +
           std::to_string(r.setting.atom_len) + ',' + std::to_string(r.setting.trial_len) + ',' +
           std::to_string(r.setting.n_trials) + ',' + format_double(r.setting.lambda) + ',' +
           std::to_string(r.runs) + ',' + std::to_string(r.reached) + ',' +
           format_double(r.time_to_target) + ',' + r.note + '\n';
  }
  return out;
}

}  // namespace acsc
