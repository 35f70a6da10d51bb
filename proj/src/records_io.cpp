#include "rss/serialization.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "rss/rng.hpp"

namespace rss {
namespace {

std::string kind_name(TwoQubitNoise k) {
  switch (k) {
    case TwoQubitNoise::none: return "none";
    case TwoQubitNoise::gue: return "gue";
    case TwoQubitNoise::pauli: return "pauli";
  }
  return "none";
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

Json to_json(const Circuit& c) {
  Json gates = Json::array();
  for (const auto& layer : c.layers) {
    Json jl = Json::array();
    for (const auto& g : layer) {
      Json m = Json::array();
      for (int r = 0; r < 2; ++r)
        for (int col = 0; col < 2; ++col) m.push_back({g(r, col).real(), g(r, col).imag()});
      jl.push_back(std::move(m));
    }
    gates.push_back(std::move(jl));
  }
  return Json{{"n", c.n},           {"depth", c.depth}, {"ensemble", to_string(c.ensemble)},
              {"topology_id", c.topology_id}, {"seed", c.seed}, {"gates", std::move(gates)}};
}

Circuit circuit_from_json(const Json& j) {
  Circuit c;
  c.n = j.at("n").get<int>();
  c.depth = j.at("depth").get<int>();
  c.ensemble = parse_ensemble(j.at("ensemble").get<std::string>());
  c.topology_id = j.at("topology_id").get<std::string>();
  c.seed = j.value("seed", std::uint64_t{0});
  for (const auto& jl : j.at("gates")) {
    std::vector<Eigen::Matrix2cd> layer;
    for (const auto& m : jl) {
      if (m.size() != 4) throw std::invalid_argument("circuit JSON: gate needs 4 entries");
      Eigen::Matrix2cd g;
      for (int e = 0; e < 4; ++e) g(e / 2, e % 2) = Complex(m[static_cast<std::size_t>(e)][0].get<double>(), m[static_cast<std::size_t>(e)][1].get<double>());
      layer.push_back(g);
    }
    c.layers.push_back(std::move(layer));
  }
  if (c.depth > 0) {
    const Topology topo = Topology::from_id(c.n, c.topology_id);
    for (int layer = 1; layer <= c.depth; ++layer) c.entanglers.push_back(topo.pattern(topo.pattern_index_for_layer(layer)));
  }
  c.validate();
  c.identify_cliffords();
  if (c.ensemble == Ensemble::haar)
    for (auto& row : c.clifford_index) std::fill(row.begin(), row.end(), -1);
  return c;
}

Json to_json(const NoiseModel& m) {
  Json two{{"kind", kind_name(m.two_qubit)}};
  if (m.two_qubit == TwoQubitNoise::gue) two["gamma"] = m.gamma;
  if (m.two_qubit == TwoQubitNoise::pauli) two["probs"] = m.two_qubit_channel.probs;
  Json single = Json::array();
  for (const auto& c : m.single_qubit_channels) single.push_back(c.probs);
  Json readout = Json::array();
  for (const auto& r : m.readout) readout.push_back({r.p10, r.p01});
  return Json{{"two_qubit", two}, {"single_qubit_channels", single}, {"readout", readout}, {"first_layer_ideal", m.first_layer_ideal}};
}

NoiseModel noise_from_json(const Json& j) {
  NoiseModel m;
  if (j.contains("two_qubit")) {
    const Json& t = j.at("two_qubit");
    const std::string kind = t.value("kind", std::string("none"));
    if (kind == "gue") {
      m.two_qubit = TwoQubitNoise::gue;
      m.gamma = t.at("gamma").get<double>();
    } else if (kind == "pauli") {
      m.two_qubit = TwoQubitNoise::pauli;
      m.two_qubit_channel.arity = 2;
      m.two_qubit_channel.probs = t.at("probs").get<std::vector<double>>();
    } else if (kind != "none") {
      throw std::invalid_argument("noise config: unknown two-qubit kind '" + kind + "'");
    }
  }
  if (j.contains("single_qubit_channels"))
    for (const auto& c : j.at("single_qubit_channels")) {
      PauliChannel ch;
      ch.arity = 1;
      ch.probs = c.get<std::vector<double>>();
      m.single_qubit_channels.push_back(std::move(ch));
    }
  if (j.contains("readout"))
    for (const auto& r : j.at("readout")) m.readout.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
  m.first_layer_ideal = j.value("first_layer_ideal", true);
  if (m.two_qubit == TwoQubitNoise::pauli) m.two_qubit_channel.validate();
  for (const auto& c : m.single_qubit_channels) c.validate();
  return m;
}

Json to_json(const RecordHeader& h) {
  return Json{{"n", h.n},
              {"depth", h.depth},
              {"ensemble", to_string(h.ensemble)},
              {"topology_id", h.topology_id},
              {"input_state", h.input_state},
              {"noise_digest", h.noise_digest},
              {"master_seed", h.master_seed},
              {"shots", h.shots}};
}

RecordHeader header_from_json(const Json& j) {
  RecordHeader h;
  h.n = j.at("n").get<int>();
  h.depth = j.at("depth").get<int>();
  h.ensemble = parse_ensemble(j.at("ensemble").get<std::string>());
  h.topology_id = j.at("topology_id").get<std::string>();
  h.input_state = j.at("input_state").get<std::string>();
  h.noise_digest = j.value("noise_digest", std::string());
  h.master_seed = j.at("master_seed").get<std::uint64_t>();
  h.shots = j.at("shots").get<std::uint64_t>();
  return h;
}

Json to_json(const ShadowRecord& r) {
  return Json{{"circuit", to_json(r.circuit)}, {"z", bitstring(r.z, r.circuit.n)}, {"shot_seed", r.shot_seed}};
}

ShadowRecord record_from_json(const Json& j) {
  ShadowRecord r;
  r.circuit = circuit_from_json(j.at("circuit"));
  const std::string z = j.at("z").get<std::string>();
  if (static_cast<int>(z.size()) != r.circuit.n) throw std::invalid_argument("record: bitstring length mismatch");
  r.z = parse_bitstring(z);
  r.shot_seed = j.at("shot_seed").get<std::uint64_t>();
  return r;
}

Json to_json(const TensorTrain& t) {
  Json cores = Json::array();
  for (const auto& c : t.cores()) cores.push_back(Json{{"shape", {c.left, 2, c.right}}, {"data", c.data}});
  return Json{{"n", t.num_sites()}, {"ranks", t.ranks()}, {"index_order", "left,bit,right row-major"}, {"cores", cores}};
}

TensorTrain tt_from_json(const Json& j) {
  std::vector<TtCore> cores;
  for (const auto& jc : j.at("cores")) {
    const auto shape = jc.at("shape").get<std::vector<int>>();
    if (shape.size() != 3 || shape[1] != 2) throw std::invalid_argument("TT JSON: bad core shape");
    TtCore c(shape[0], shape[2]);
    c.data = jc.at("data").get<std::vector<double>>();
    cores.push_back(std::move(c));
  }
  TensorTrain t(std::move(cores));
  if (j.contains("n") && j.at("n").get<int>() != t.num_sites()) throw std::invalid_argument("TT JSON: site count mismatch");
  return t;
}

void write_record_header(std::ostream& out, const RecordHeader& h) { out << to_json(h).dump() << '\n'; }
void write_record(std::ostream& out, const ShadowRecord& r) { out << to_json(r).dump() << '\n'; }

void write_records(const std::string& path, const RecordSet& set) {
  std::ofstream out = open_out(path);
  write_record_header(out, set.header);
  for (const auto& r : set.records) write_record(out, r);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

RecordHeader read_record_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("record file: missing header line");
  return header_from_json(Json::parse(line));
}

void read_records(std::istream& in, const RecordHeader& h, std::size_t chunk,
                  const std::function<void(std::span<const ShadowRecord>, std::uint64_t first)>& sink) {
  std::vector<ShadowRecord> buf;
  std::uint64_t first = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ShadowRecord r = record_from_json(Json::parse(line));
    if (r.circuit.n != h.n || r.circuit.depth != h.depth) throw std::runtime_error("record file: record does not match header");
    buf.push_back(std::move(r));
    if (buf.size() == chunk) {
      sink(buf, first);
      first += buf.size();
      buf.clear();
    }
  }
  if (!buf.empty()) sink(buf, first);
}

RecordSet read_records(const std::string& path) {
  std::ifstream in = open_in(path);
  RecordSet set;
  set.header = read_record_header(in);
  read_records(in, set.header, 4096, [&](std::span<const ShadowRecord> recs, std::uint64_t) {
    set.records.insert(set.records.end(), recs.begin(), recs.end());
  });
  return set;
}

void write_frame_csv(const std::string& path, const FrameSpectrum& f) {
  std::ofstream out = open_out(path);
  out << "# provenance=" << to_string(f.provenance) << " samples=" << f.samples << '\n';
  out << "k,f_hat,stderr,support\n";
  const Eigen::VectorXd v = f.values();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const auto kk = static_cast<std::uint64_t>(k);
    out << bitstring(kk, f.n) << ',' << v[k] << ',' << f.stderr_at(kk) << ',' << pauli_weight(kk) << '\n';
  }
}

void write_frame_tt_json(const std::string& path, const FrameSpectrum& f) {
  if (!f.tt) throw std::invalid_argument("write_frame_tt_json: spectrum has no TT form");
  std::ofstream out = open_out(path);
  Json j{{"kind", "frame_spectrum"}, {"provenance", to_string(f.provenance)}, {"samples", f.samples}, {"tt", to_json(*f.tt)}};
  out << j.dump() << '\n';
}

FrameSpectrum read_frame(const std::string& path) {
  std::ifstream in = open_in(path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    const Json j = Json::parse(in);
    FrameSpectrum f = FrameSpectrum::from_tt(tt_from_json(j.at("tt")), parse_provenance(j.value("provenance", std::string("tt_fit"))));
    f.samples = j.value("samples", std::uint64_t{0});
    return f;
  }
  std::string line;
  std::vector<double> vals, errs;
  FrameProvenance prov = FrameProvenance::empirical;
  std::uint64_t samples = 0;
  std::uint64_t expect = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        if (tok.starts_with("provenance=")) prov = parse_provenance(tok.substr(11));
        if (tok.starts_with("samples=")) samples = std::stoull(tok.substr(8));
      }
      continue;
    }
    if (line.starts_with("k,")) continue;
    const auto cells = split_csv(line);
    if (cells.size() < 3) throw std::runtime_error("frame CSV: malformed row");
    if (parse_bitstring(cells[0]) != expect++) throw std::runtime_error("frame CSV: rows must be in k order");
    vals.push_back(std::stod(cells[1]));
    errs.push_back(std::stod(cells[2]));
  }
  FrameSpectrum f = FrameSpectrum::dense(Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())), prov,
                                         Eigen::Map<Eigen::VectorXd>(errs.data(), static_cast<Eigen::Index>(errs.size())));
  f.samples = samples;
  return f;
}

void write_estimates_csv(const std::string& path, std::span<const Estimate> rows) {
  std::ofstream out = open_out(path);
  out << "observable,value,stderr,shots,frame\n";
  for (const auto& e : rows) out << e.observable << ',' << e.value << ',' << e.se << ',' << e.shots << ',' << e.frame << '\n';
}

std::string digest(const std::string& bytes) { return hex64(fnv1a64(bytes)); }

}  // namespace rss
