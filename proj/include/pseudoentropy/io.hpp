#pragma once

// File formats.
//
// Distributions
//   JSON (sparse): {"n": 3, "entries": [{"x": "0x5", "p": 0.25}, ...]}
//   binary (dense): "PEDL", version byte 0x01, n as uint32 little-endian,
//                   then 2^n IEEE-754 doubles, little-endian, indexed by point.
//
// Hash coefficients: {"c3": "0x...", "c2": ..., "c1": ..., "c0": ...} with
// 16 lowercase hex digits each.

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "attack.hpp"
#include "ballsbins.hpp"
#include "distribution.hpp"
#include "errors.hpp"
#include "hashing.hpp"
#include "moments.hpp"

namespace pe {

using json = nlohmann::json;

inline constexpr std::string_view kLibraryVersion = "1.0.0";
inline constexpr int kCsvSchemaVersion = 1;

inline std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string hex_point(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::uint64_t parse_hex(const std::string& s) {
  std::string_view digits = s;
  if (digits.starts_with("0x") || digits.starts_with("0X")) digits.remove_prefix(2);
  if (digits.empty() || digits.size() > 16) throw ValidationError("bad hex value '" + s + "'");
  std::uint64_t v = 0;
  for (char c : digits) {
    v <<= 4;
    if (c >= '0' && c <= '9') {
      v |= static_cast<std::uint64_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      v |= static_cast<std::uint64_t>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      v |= static_cast<std::uint64_t>(c - 'A' + 10);
    } else {
      throw ValidationError("bad hex value '" + s + "'");
    }
  }
  return v;
}

// Shortest round-trip decimal form, for CSV cells.
inline std::string format_double(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// ---------------------------------------------------------------------------
// Distributions

inline json distribution_to_json(const Distribution& d) {
  json entries = json::array();
  d.for_each_nonzero([&](std::uint64_t x, double p) { entries.push_back({{"x", hex_point(x)}, {"p", p}}); });
  return json{{"n", d.bits()}, {"entries", std::move(entries)}};
}

inline Distribution distribution_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("entries")) {
    throw ValidationError("distribution JSON needs \"n\" and \"entries\"");
  }
  const unsigned n = j.at("n").get<unsigned>();
  std::vector<Entry> entries;
  for (const json& e : j.at("entries")) {
    entries.push_back({parse_hex(e.at("x").get<std::string>()), e.at("p").get<double>()});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.point < b.point; });
  return Distribution::from_sparse(n, std::move(entries));
}

inline constexpr std::array<char, 4> kBinaryMagic = {'P', 'E', 'D', 'L'};
inline constexpr std::uint8_t kBinaryVersion = 0x01;

namespace detail {

inline void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint64_t get_le(const std::string& in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= std::uint64_t{static_cast<unsigned char>(in[at + i])} << (8 * i);
  return v;
}

}  // namespace detail

inline std::string distribution_to_binary(const Distribution& d) {
  std::string out(kBinaryMagic.begin(), kBinaryMagic.end());
  out.push_back(static_cast<char>(kBinaryVersion));
  detail::put_le(out, d.bits(), 4);
  const std::vector<double> probs = d.to_dense();
  out.reserve(out.size() + probs.size() * 8);
  for (double p : probs) detail::put_le(out, std::bit_cast<std::uint64_t>(p), 8);
  return out;
}

inline Distribution distribution_from_binary(const std::string& bytes) {
  if (bytes.size() < 9 || !std::equal(kBinaryMagic.begin(), kBinaryMagic.end(), bytes.begin())) {
    throw ValidationError("not a PEDL distribution file");
  }
  if (static_cast<std::uint8_t>(bytes[4]) != kBinaryVersion) {
    throw ValidationError("unsupported PEDL version " + std::to_string(static_cast<unsigned char>(bytes[4])));
  }
  const std::uint64_t n = detail::get_le(bytes, 5, 4);
  if (n < 1 || n > kMaxDomainBits) throw ValidationError("PEDL file has n = " + std::to_string(n));
  const std::uint64_t count = std::uint64_t{1} << n;
  if (bytes.size() != 9 + count * 8) throw ValidationError("PEDL payload length does not match 2^n doubles");
  std::vector<double> probs(count);
  for (std::uint64_t i = 0; i < count; ++i) probs[i] = std::bit_cast<double>(detail::get_le(bytes, 9 + i * 8, 8));
  return Distribution::from_dense(static_cast<unsigned>(n), std::move(probs));
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << contents;
}

// Sniffs the PEDL magic; anything else is parsed as JSON.
inline Distribution load_distribution(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 4 && std::equal(kBinaryMagic.begin(), kBinaryMagic.end(), bytes.begin())) {
    return distribution_from_binary(bytes);
  }
  try {
    return distribution_from_json(json::parse(bytes));
  } catch (const json::exception& e) {
    throw ValidationError("'" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Hashes and reports

inline json polyhash_to_json(const PolyHash& h) {
  return json{{"c3", hex64(h.c3())}, {"c2", hex64(h.c2())}, {"c1", hex64(h.c1())}, {"c0", hex64(h.c0())}};
}

inline PolyHash polyhash_from_json(const json& j) {
  return make_polyhash(parse_hex(j.at("c3").get<std::string>()), parse_hex(j.at("c2").get<std::string>()),
                       parse_hex(j.at("c1").get<std::string>()), parse_hex(j.at("c0").get<std::string>()));
}

inline json attack_report_to_json(const AttackReport& r) {
  return json{
      {"advantage", r.advantage},
      {"bound", r.bound},
      {"success", r.success},
      {"guaranteed", r.guaranteed},
      {"size_units", r.size_units},
      {"per_slice", r.per_slice},
      {"seeds",
       {{"trial", hex64(r.trial_seed)}, {"sign", polyhash_to_json(r.sign_hash)}, {"slice", polyhash_to_json(r.slice_hash)}}},
  };
}

inline constexpr std::string_view kTrialCsvHeader =
    "trial,trial_seed,n,k,delta,T,advantage,bound,success,guaranteed,size_units";

inline std::string attack_report_csv_row(std::uint64_t index, const AttackReport& r) {
  std::ostringstream row;
  row << index << ',' << hex64(r.trial_seed) << ',' << r.params.n << ',' << format_double(r.params.k) << ','
      << format_double(r.params.delta) << ',' << r.params.slices << ',' << format_double(r.advantage) << ','
      << format_double(r.bound) << ',' << (r.success ? 1 : 0) << ',' << (r.guaranteed ? 1 : 0) << ','
      << format_double(r.size_units);
  return row.str();
}

inline json moment_report_to_json(const MomentReport& r) {
  return json{
      {"m1", r.m1},
      {"m2", r.m2},
      {"m4", r.m4},
      {"sigma2", r.sigma2},
      {"samples", r.samples},
      {"exact", r.exact},
      {"slices", r.slices},
      {"standard_errors", {{"m1", r.se_m1}, {"m2", r.se_m2}, {"m4", r.se_m4}}},
      {"tail_prob", r.tail_prob()},
      {"bounds_ok",
       {{"m1_lower", r.bounds_ok.m1_lower},
        {"m1_upper", r.bounds_ok.m1_upper},
        {"m2_equal", r.bounds_ok.m2_equal},
        {"m4_lower", r.bounds_ok.m4_lower},
        {"m4_upper", r.bounds_ok.m4_upper}}},
  };
}

inline json balls_bins_to_json(const BallsBinsResult& r) {
  return json{{"k", r.k},
              {"trials", r.trials},
              {"average_max_load", r.average_max_load},
              {"predicted", r.predicted},
              {"offset_relative_error", r.offset_relative_error()}};
}

inline json entropy_report_to_json(const EntropyReport& r) {
  return json{{"min_entropy", r.min_entropy},       {"smooth_min_entropy", r.smooth_min_entropy},
              {"delta", r.delta},                   {"k", r.k},
              {"mass_above_threshold", r.mass_above}, {"biased_set_size", r.biased_set_size}};
}

}  // namespace pe
