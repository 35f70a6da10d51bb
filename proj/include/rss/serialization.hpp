#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rss/calibration.hpp"
#include "rss/circuit.hpp"
#include "rss/estimation.hpp"
#include "rss/noise.hpp"
#include "rss/simulator.hpp"
#include "rss/tensor_train.hpp"

namespace rss {

using Json = nlohmann::json;

// Circuit: {"n","depth","ensemble","topology_id","seed","gates"}; gates holds
// one list per layer, one [[re,im] x 4] row-major matrix per gate.
Json to_json(const Circuit& c);
Circuit circuit_from_json(const Json& j);

// Noise: {"two_qubit": {"kind": "none"|"gue"|"pauli", "gamma"|"probs"},
// "single_qubit_channels": [[4]...], "readout": [[p10, p01]...],
// "first_layer_ideal": bool}
Json to_json(const NoiseModel& m);
NoiseModel noise_from_json(const Json& j);

Json to_json(const RecordHeader& h);
RecordHeader header_from_json(const Json& j);

/// {"circuit": ..., "z": "0101", "shot_seed": s}
Json to_json(const ShadowRecord& r);
ShadowRecord record_from_json(const Json& j);

/// {"n", "ranks", "cores": [{"shape": [l, 2, r], "data": [...]}]}; data is
/// row-major in (left, bit, right).
Json to_json(const TensorTrain& t);
TensorTrain tt_from_json(const Json& j);

/// JSONL: header line, then one record per line.
void write_record_header(std::ostream& out, const RecordHeader& h);
void write_record(std::ostream& out, const ShadowRecord& r);
void write_records(const std::string& path, const RecordSet& set);
RecordHeader read_record_header(std::istream& in);
/// Calls `sink` once per chunk of up to `chunk` records.
void read_records(std::istream& in, const RecordHeader& h, std::size_t chunk,
                  const std::function<void(std::span<const ShadowRecord>, std::uint64_t first)>& sink);
RecordSet read_records(const std::string& path);

/// CSV with columns k,f_hat,stderr,support (dense spectra). TT spectra are
/// written as TT JSON with a metadata header.
void write_frame_csv(const std::string& path, const FrameSpectrum& f);
void write_frame_tt_json(const std::string& path, const FrameSpectrum& f);
/// Reads either format (chosen by extension .csv / .json).
FrameSpectrum read_frame(const std::string& path);

void write_estimates_csv(const std::string& path, std::span<const Estimate> rows);

/// FNV-1a hex digest used in headers and tables.
std::string digest(const std::string& bytes);

}  // namespace rss
