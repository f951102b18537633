#include "qpair/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qpair {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void parse_fail(const std::string& path, int line, int col, const std::string& why) {
  raise(Err::Parse, path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + why);
}

[[noreturn]] void schema_fail(const std::string& path, int line, const std::string& why) {
  raise(Err::Schema, path + ":" + std::to_string(line) + ": " + why);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& path, int line, int col, const std::string& field) {
  std::string t = trim(field);
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size())
    parse_fail(path, line, col, "expected a number, got '" + field + "'");
  return v;
}

long long parse_count(const std::string& path, int line, int col, const std::string& field) {
  std::string t = trim(field);
  long long v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size())
    parse_fail(path, line, col, "expected an integer count, got '" + field + "'");
  return v;
}

constexpr const char* kCountsHeader =
    "theta_a_deg,qwp_a_deg,theta_b_deg,qwp_b_deg,coinc,singles_a,singles_b,duration_s";

void check_record_values(const std::string& path, int line, const CoincidenceRecord& r) {
  if (r.coincidences < 0 || r.singles_a < 0 || r.singles_b < 0)
    schema_fail(path, line, "counts must be nonnegative");
  if (!(r.duration_s > 0.0)) schema_fail(path, line, "duration_s must be positive");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Err::Io, "cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    raise(Err::Parse, path + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) raise(Err::Io, "cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) raise(Err::Io, "write to '" + path + "' failed");
}

CoincidenceRecord record_from_json(const std::string& path, const json& j, int index) {
  auto need = [&](const char* key) -> const json& {
    if (!j.contains(key))
      raise(Err::Schema, path + ": record " + std::to_string(index) + " missing '" + key + "'");
    return j.at(key);
  };
  CoincidenceRecord r;
  r.setting_a.pol_deg = need("theta_a_deg").get<double>();
  r.setting_b.pol_deg = need("theta_b_deg").get<double>();
  const json& qa = need("qwp_a_deg");
  const json& qb = need("qwp_b_deg");
  if (!qa.is_null()) r.setting_a.qwp_deg = qa.get<double>();
  if (!qb.is_null()) r.setting_b.qwp_deg = qb.get<double>();
  r.coincidences = need("coinc").get<long long>();
  r.singles_a = need("singles_a").get<long long>();
  r.singles_b = need("singles_b").get<long long>();
  r.duration_s = need("duration_s").get<double>();
  check_record_values(path, index, r);
  return r;
}

ordered_json record_to_json(const CoincidenceRecord& r) {
  ordered_json j;
  j["theta_a_deg"] = r.setting_a.pol_deg;
  j["qwp_a_deg"] = r.setting_a.qwp_deg ? ordered_json(*r.setting_a.qwp_deg) : ordered_json(nullptr);
  j["theta_b_deg"] = r.setting_b.pol_deg;
  j["qwp_b_deg"] = r.setting_b.qwp_deg ? ordered_json(*r.setting_b.qwp_deg) : ordered_json(nullptr);
  j["coinc"] = r.coincidences;
  j["singles_a"] = r.singles_a;
  j["singles_b"] = r.singles_b;
  j["duration_s"] = r.duration_s;
  return j;
}

}  // namespace

std::vector<CoincidenceRecord> read_counts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Err::Io, "cannot open '" + path + "'");

  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) parse_fail(path, 1, 1, "empty file");
  ++lineno;
  {
    auto fields = split_csv_line(line);
    auto expect = split_csv_line(kCountsHeader);
    if (fields.size() != expect.size()) parse_fail(path, 1, 1, "bad header (expected 8 columns)");
    for (std::size_t i = 0; i < expect.size(); ++i) {
      if (trim(fields[i]) != expect[i])
        parse_fail(path, 1, static_cast<int>(i + 1),
                   "bad header column '" + fields[i] + "' (expected '" + expect[i] + "')");
    }
  }

  std::vector<CoincidenceRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 8)
      parse_fail(path, lineno, 1, "expected 8 fields, got " + std::to_string(fields.size()));
    CoincidenceRecord r;
    r.setting_a.pol_deg = parse_double(path, lineno, 1, fields[0]);
    if (!trim(fields[1]).empty()) r.setting_a.qwp_deg = parse_double(path, lineno, 2, fields[1]);
    r.setting_b.pol_deg = parse_double(path, lineno, 3, fields[2]);
    if (!trim(fields[3]).empty()) r.setting_b.qwp_deg = parse_double(path, lineno, 4, fields[3]);
    r.coincidences = parse_count(path, lineno, 5, fields[4]);
    r.singles_a = parse_count(path, lineno, 6, fields[5]);
    r.singles_b = parse_count(path, lineno, 7, fields[6]);
    r.duration_s = parse_double(path, lineno, 8, fields[7]);
    check_record_values(path, lineno, r);
    out.push_back(r);
  }
  return out;
}

void write_counts_csv(std::span<const CoincidenceRecord> records, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(Err::Io, "cannot open '" + path + "' for writing");
  out << kCountsHeader << '\n';
  for (const auto& r : records) {
    out << format_double(r.setting_a.pol_deg) << ',';
    if (r.setting_a.qwp_deg) out << format_double(*r.setting_a.qwp_deg);
    out << ',' << format_double(r.setting_b.pol_deg) << ',';
    if (r.setting_b.qwp_deg) out << format_double(*r.setting_b.qwp_deg);
    out << ',' << r.coincidences << ',' << r.singles_a << ',' << r.singles_b << ','
        << format_double(r.duration_s) << '\n';
  }
  if (!out) raise(Err::Io, "write to '" + path + "' failed");
}

std::vector<CoincidenceRecord> read_counts_json(const std::string& path) {
  json j = read_json_file(path);
  if (!j.contains("records") || !j["records"].is_array())
    raise(Err::Schema, path + ": missing 'records' array");
  std::vector<CoincidenceRecord> out;
  int i = 0;
  for (const auto& rec : j["records"]) out.push_back(record_from_json(path, rec, i++));
  return out;
}

void write_counts_json(std::span<const CoincidenceRecord> records, const std::string& path) {
  ordered_json j;
  j["records"] = ordered_json::array();
  for (const auto& r : records) j["records"].push_back(record_to_json(r));
  write_json_file(path, j);
}

CorrelationCurve read_curve_json(const std::string& path) {
  json j = read_json_file(path);
  if (!j.contains("fixed_arm") || !j["fixed_arm"].is_string())
    raise(Err::Schema, path + ": missing 'fixed_arm'");
  std::string arm = j["fixed_arm"].get<std::string>();
  if (arm != "A" && arm != "B") raise(Err::Schema, path + ": fixed_arm must be \"A\" or \"B\"");
  if (!j.contains("records") || !j["records"].is_array())
    raise(Err::Schema, path + ": missing 'records' array");
  std::vector<CoincidenceRecord> records;
  int i = 0;
  for (const auto& rec : j["records"]) records.push_back(record_from_json(path, rec, i++));
  return curve_from_records(records, arm[0]);
}

void write_curve_json(std::span<const CoincidenceRecord> records, char fixed_arm,
                      const std::string& path) {
  // validates that the records actually form a curve around that arm
  (void)curve_from_records(records, fixed_arm);
  ordered_json j;
  j["fixed_arm"] = std::string(1, fixed_arm);
  j["records"] = ordered_json::array();
  for (const auto& r : records) j["records"].push_back(record_to_json(r));
  write_json_file(path, j);
}

void write_curve_csv(const CorrelationCurve& curve, const std::string& path) {
  if (curve.samples.empty()) raise(Err::InvalidArgument, "refusing to write an empty curve");
  std::ofstream out(path);
  if (!out) raise(Err::Io, "cannot open '" + path + "' for writing");
  out << "theta_deg,rate_hz,rate_err_hz\n";
  for (const auto& s : curve.samples) {
    if (!(s.duration_s > 0.0)) raise(Err::Schema, "curve sample with non-positive duration");
    double err = std::sqrt(std::max<double>(s.coincidences, 1)) / s.duration_s;
    out << format_double(s.theta_deg) << ',' << format_double(s.rate_hz()) << ','
        << format_double(err) << '\n';
  }
  if (!out) raise(Err::Io, "write to '" + path + "' failed");
}

Mat4 read_density_json(const std::string& path) {
  json j = read_json_file(path);
  if (!j.contains("dim") || j["dim"].get<int>() != 4)
    raise(Err::Schema, path + ": expected \"dim\": 4");
  if (!j.contains("basis") || j["basis"].get<std::string>() != "HH,HV,VH,VV")
    raise(Err::Schema, path + ": expected \"basis\": \"HH,HV,VH,VV\"");
  auto grab = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 4)
      raise(Err::Schema, path + ": '" + key + "' must be a 4x4 array");
    return j[key];
  };
  json re = grab("re"), im = grab("im");
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    if (!re[r].is_array() || re[r].size() != 4 || !im[r].is_array() || im[r].size() != 4)
      raise(Err::Schema, path + ": 're'/'im' rows must have 4 entries");
    for (int c = 0; c < 4; ++c) m(r, c) = Cplx(re[r][c].get<double>(), im[r][c].get<double>());
  }
  return m;
}

void write_density_json(const Mat4& rho, const std::string& path) {
  ordered_json j;
  j["dim"] = 4;
  auto rows = [&](auto pick) {
    ordered_json rs = ordered_json::array();
    for (int r = 0; r < 4; ++r) {
      ordered_json row = ordered_json::array();
      for (int c = 0; c < 4; ++c) row.push_back(pick(rho(r, c)));
      rs.push_back(row);
    }
    return rs;
  };
  j["re"] = rows([](Cplx v) { return v.real(); });
  j["im"] = rows([](Cplx v) { return v.imag(); });
  j["basis"] = "HH,HV,VH,VV";
  write_json_file(path, j);
}

SourceParams read_source_json(const std::string& path) {
  json j = read_json_file(path);
  SourceParams p;
  struct Field {
    const char* key;
    double* slot;
  };
  const Field fields[] = {
      {"theta_pump_deg", &p.theta_pump_deg},
      {"phi_deg", &p.phi_deg},
      {"lambda_white", &p.lambda_white},
      {"lambda_dephase", &p.lambda_dephase},
      {"pair_rate_hz", &p.pair_rate_hz},
      {"eta_couple", &p.eta_couple},
      {"eta_detect", &p.eta_detect},
      {"dark_rate_hz", &p.dark_rate_hz},
      {"coinc_window_s", &p.coinc_window_s},
      {"pump_power_mw", &p.pump_power_mw},
      {"crystal_length_m", &p.crystal_length_m},
  };
  for (const auto& f : fields) {
    if (!j.contains(f.key)) raise(Err::Schema, path + ": missing '" + f.key + "'");
    if (!j[f.key].is_number()) raise(Err::Schema, path + ": '" + f.key + "' must be a number");
    *f.slot = j[f.key].get<double>();
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "meta") continue;
    bool known = false;
    for (const auto& f : fields) known = known || it.key() == f.key;
    if (!known) raise(Err::Schema, path + ": unknown key '" + it.key() + "'");
  }
  try {
    p.validate();
  } catch (const Error& e) {
    raise(Err::Schema, path + ": " + e.what());
  }
  return p;
}

void write_source_json(const SourceParams& p, const std::string& path) {
  ordered_json j;
  j["theta_pump_deg"] = p.theta_pump_deg;
  j["phi_deg"] = p.phi_deg;
  j["lambda_white"] = p.lambda_white;
  j["lambda_dephase"] = p.lambda_dephase;
  j["pair_rate_hz"] = p.pair_rate_hz;
  j["eta_couple"] = p.eta_couple;
  j["eta_detect"] = p.eta_detect;
  j["dark_rate_hz"] = p.dark_rate_hz;
  j["coinc_window_s"] = p.coinc_window_s;
  j["pump_power_mw"] = p.pump_power_mw;
  j["crystal_length_m"] = p.crystal_length_m;
  write_json_file(path, j);
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Err::Io, "cannot open '" + path + "'");
  std::uint64_t h = 1469598103934665603ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return std::string(hex);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Err::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Err::Io, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) raise(Err::Io, "write to '" + path + "' failed");
}

}  // namespace qpair
