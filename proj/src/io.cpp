#include "sackit/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "sackit/error.hpp"

namespace sackit {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, std::size_t line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &used);
  } catch (const std::exception&) {
    throw ParseError("malformed number '" + field + "'", line);
  }
  if (used != field.size()) throw ParseError("malformed number '" + field + "'", line);
  return value;
}

bool parse_flag(const std::string& field, std::size_t line) {
  if (field == "1" || field == "true" || field == "True" || field == "TRUE") return true;
  if (field == "0" || field == "false" || field == "False" || field == "FALSE") return false;
  throw ParseError("malformed validity flag '" + field + "'", line);
}

GazeSample parse_jsonl_row(const std::string& text, std::size_t line) {
  nlohmann::json row;
  try {
    row = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON (") + e.what() + ")", line);
  }
  if (!row.is_object()) throw ParseError("expected a JSON object", line);
  auto number = [&](const char* key) {
    if (!row.contains(key) || !row[key].is_number()) {
      throw ParseError(std::string("missing or non-numeric field '") + key + "'", line);
    }
    return row[key].get<double>();
  };
  GazeSample s;
  s.t = number("t");
  s.valid = true;
  if (row.contains("valid")) {
    const auto& v = row["valid"];
    if (v.is_boolean()) {
      s.valid = v.get<bool>();
    } else if (v.is_number_integer()) {
      s.valid = v.get<int>() != 0;
    } else {
      throw ParseError("field 'valid' must be boolean", line);
    }
  }
  // Invalid rows may carry null angles.
  auto angle = [&](const char* key) {
    if (!s.valid && (!row.contains(key) || row[key].is_null())) return 0.0;
    return number(key);
  };
  s.x = angle("x");
  s.y = angle("y");
  return s;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> fields;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!text.empty() && text.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::vector<GazeSample> read_gaze_stream(std::istream& in, StreamFormat format) {
  if (format == StreamFormat::Auto) throw StructuralError("stream format must be resolved");
  std::vector<GazeSample> samples;
  std::string text;
  std::size_t line = 0;
  bool header_seen = false;
  std::vector<int> column = {0, 1, 2, 3};  // t, x, y, valid
  while (std::getline(in, text)) {
    ++line;
    const std::string row = trim(text);
    if (row.empty()) continue;
    GazeSample s;
    if (format == StreamFormat::Jsonl) {
      s = parse_jsonl_row(row, line);
    } else {
      const auto fields = split_csv(row);
      if (!header_seen) {
        header_seen = true;
        const std::vector<std::string> names = {"t", "x", "y", "valid"};
        for (std::size_t k = 0; k < names.size(); ++k) {
          const auto it = std::find(fields.begin(), fields.end(), names[k]);
          if (it == fields.end()) {
            if (names[k] == "valid") {
              column[k] = -1;
              continue;
            }
            throw ParseError("CSV header lacks column '" + names[k] + "'", line);
          }
          column[k] = static_cast<int>(it - fields.begin());
        }
        continue;
      }
      auto field = [&](int k) -> const std::string& {
        if (column[k] >= static_cast<int>(fields.size())) {
          throw ParseError("row has " + std::to_string(fields.size()) + " fields", line);
        }
        return fields[column[k]];
      };
      s.t = parse_number(field(0), line);
      s.valid = column[3] < 0 ? true : parse_flag(field(3), line);
      if (s.valid || (!field(1).empty() && !field(2).empty())) {
        s.x = parse_number(field(1), line);
        s.y = parse_number(field(2), line);
      }
    }
    if (!std::isfinite(s.t) || s.t < 0.0) {
      throw StructuralError("time must be finite and non-negative at line " + std::to_string(line));
    }
    if (s.valid && (!std::isfinite(s.x) || !std::isfinite(s.y))) {
      throw ParseError("non-finite gaze angle", line);
    }
    if (!samples.empty() && s.t < samples.back().t) {
      throw StructuralError("non-monotonic time at line " + std::to_string(line));
    }
    samples.push_back(s);
  }
  return samples;
}

std::vector<GazeSample> read_gaze_stream(const std::filesystem::path& path, StreamFormat format) {
  if (format == StreamFormat::Auto) {
    format = path.extension() == ".csv" ? StreamFormat::Csv : StreamFormat::Jsonl;
  }
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_gaze_stream(in, format);
}

void write_gaze_stream(const std::filesystem::path& path, const std::vector<GazeSample>& samples) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& s : samples) {
    nlohmann::json row = {{"t", s.t}, {"x", s.x}, {"y", s.y}, {"valid", s.valid}};
    out << row.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Container. Layout (all integers and floats little-endian):
//   "SACKIT"  u32 version  { char[4] tag  u64 length  payload[length] }*
// See docs/container-format.md.

namespace {

class Writer {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_arithmetic_v<T>);
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
      value = byteswap(value);
    }
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    buffer_.append(raw, sizeof(T));
  }
  void put_string(const std::string& s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    buffer_.append(s);
  }
  void put_vector(const Eigen::VectorXd& v) {
    put<std::uint64_t>(static_cast<std::uint64_t>(v.size()));
    for (double x : v) put(x);
  }
  const std::string& bytes() const { return buffer_; }

  template <typename T>
  static T byteswap(T value) {
    char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    std::reverse(raw, raw + sizeof(T));
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

 private:
  std::string buffer_;
};

class Reader {
 public:
  Reader(const std::string& bytes, std::string section) : bytes_(bytes), section_(std::move(section)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
      value = Writer::byteswap(value);
    }
    return value;
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Eigen::VectorXd get_vector() {
    const auto n = count(sizeof(double));
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = get<double>();
    return v;
  }
  std::uint64_t count(std::size_t element_size) {
    const auto n = get<std::uint64_t>();
    if (element_size > 0 && n > (bytes_.size() - pos_) / element_size) {
      throw FormatError("section " + section_ + ": element count exceeds payload");
    }
    return n;
  }
  void finish() const {
    if (pos_ != bytes_.size()) throw FormatError("section " + section_ + ": trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("section " + section_ + " is truncated");
  }
  const std::string& bytes_;
  std::string section_;
  std::size_t pos_ = 0;
};

void put_label(Writer& w, const CategoryLabel& label) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(label.factor()));
  w.put_string(label.value());
}

CategoryLabel get_label(Reader& r) {
  const auto factor = r.get<std::uint32_t>();
  std::string value = r.get_string();
  if (factor > static_cast<std::uint32_t>(Factor::Amplitude)) {
    throw FormatError("unknown factor code " + std::to_string(factor));
  }
  return CategoryLabel(static_cast<Factor>(factor), std::move(value));
}

std::string encode_profiles(const SaccadeDataset& dataset) {
  Writer w;
  w.put<std::uint64_t>(dataset.size());
  for (const auto& p : dataset.profiles()) {
    w.put(p.dt);
    put_label(w, p.category);
    w.put<std::uint8_t>(p.outlier ? 1 : 0);
    w.put_vector(p.d);
    w.put_vector(p.lead);
  }
  return w.bytes();
}

std::string encode_means(const std::vector<MeanProfile>& means) {
  Writer w;
  w.put<std::uint64_t>(means.size());
  for (const auto& m : means) {
    w.put(m.dt);
    put_label(w, m.category);
    w.put(m.center);
    w.put<std::uint64_t>(m.source_count);
    w.put_vector(m.mean);
    w.put_vector(m.stddev);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(m.count.size()));
    for (int c : m.count) w.put<std::int32_t>(c);
  }
  return w.bytes();
}

std::string encode_model(const PredictionModel& m) {
  Writer w;
  w.put(m.dt);
  w.put(m.alpha_min);
  w.put(m.alpha_step);
  w.put<std::uint64_t>(static_cast<std::uint64_t>(m.rows.rows()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(m.rows.cols()));
  for (Eigen::Index i = 0; i < m.rows.rows(); ++i) {
    for (Eigen::Index l = 0; l < m.rows.cols(); ++l) w.put(m.rows(i, l));
  }
  for (double d : m.durations) w.put(d);
  return w.bytes();
}

std::string encode_traces(const std::vector<SaccadeTrace>& traces) {
  Writer w;
  w.put<std::uint64_t>(traces.size());
  for (const auto& tr : traces) {
    w.put<std::uint64_t>(tr.anchor_index);
    w.put<std::uint64_t>(tr.detection_index);
    w.put(tr.direction.x());
    w.put(tr.direction.y());
    w.put<std::uint64_t>(tr.samples.size());
    for (const auto& s : tr.samples) {
      w.put(s.t);
      w.put(s.x);
      w.put(s.y);
      w.put<std::uint8_t>(s.valid ? 1 : 0);
    }
  }
  return w.bytes();
}

SaccadeDataset decode_profiles(const std::string& bytes, DatasetMetadata metadata) {
  Reader r(bytes, "PROF");
  SaccadeDataset dataset(std::move(metadata));
  const auto n = r.count(8);
  dataset.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    SaccadeProfile p;
    p.dt = r.get<double>();
    p.category = get_label(r);
    p.outlier = r.get<std::uint8_t>() != 0;
    p.d = r.get_vector();
    p.lead = r.get_vector();
    dataset.add(std::move(p));
  }
  r.finish();
  return dataset;
}

std::vector<MeanProfile> decode_means(const std::string& bytes) {
  Reader r(bytes, "MEAN");
  std::vector<MeanProfile> means;
  const auto n = r.count(8);
  for (std::uint64_t k = 0; k < n; ++k) {
    MeanProfile m;
    m.dt = r.get<double>();
    m.category = get_label(r);
    m.center = r.get<double>();
    m.source_count = r.get<std::uint64_t>();
    m.mean = r.get_vector();
    m.stddev = r.get_vector();
    const auto c = r.count(4);
    m.count.resize(static_cast<Eigen::Index>(c));
    for (auto& x : m.count) x = r.get<std::int32_t>();
    validate(m);
    means.push_back(std::move(m));
  }
  r.finish();
  return means;
}

PredictionModel decode_model(const std::string& bytes) {
  Reader r(bytes, "MODL");
  PredictionModel m;
  m.dt = r.get<double>();
  m.alpha_min = r.get<double>();
  m.alpha_step = r.get<double>();
  const auto rows = r.get<std::uint64_t>();
  const auto cols = r.get<std::uint64_t>();
  if (rows == 0 || cols == 0 || rows > bytes.size() || cols > bytes.size() ||
      rows * cols > bytes.size() / 8) {
    throw FormatError("section MODL: bad table shape");
  }
  m.rows.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows.rows(); ++i) {
    for (Eigen::Index l = 0; l < m.rows.cols(); ++l) m.rows(i, l) = r.get<double>();
  }
  m.durations.resize(static_cast<Eigen::Index>(rows));
  for (auto& d : m.durations) d = r.get<double>();
  r.finish();
  if (!(m.dt > 0.0) || !(m.alpha_step > 0.0)) throw FormatError("section MODL: bad grid");
  return m;
}

std::vector<SaccadeTrace> decode_traces(const std::string& bytes) {
  Reader r(bytes, "TRAC");
  std::vector<SaccadeTrace> traces;
  const auto n = r.count(8);
  for (std::uint64_t k = 0; k < n; ++k) {
    SaccadeTrace tr;
    tr.anchor_index = r.get<std::uint64_t>();
    tr.detection_index = r.get<std::uint64_t>();
    tr.direction.x() = r.get<double>();
    tr.direction.y() = r.get<double>();
    const auto m = r.count(25);
    tr.samples.resize(m);
    for (auto& s : tr.samples) {
      s.t = r.get<double>();
      s.x = r.get<double>();
      s.y = r.get<double>();
      s.valid = r.get<std::uint8_t>() != 0;
    }
    if (tr.anchor_index >= tr.samples.size() || tr.detection_index >= tr.samples.size()) {
      throw FormatError("section TRAC: index out of range");
    }
    traces.push_back(std::move(tr));
  }
  r.finish();
  return traces;
}

void put_section(std::ostream& out, const char (&tag)[5], const std::string& payload) {
  out.write(tag, 4);
  Writer w;
  w.put<std::uint64_t>(payload.size());
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

}  // namespace

void write_container(std::ostream& out, const Container& c) {
  out.write(kContainerMagic, 6);
  Writer header;
  header.put<std::uint32_t>(kContainerVersion);
  out.write(header.bytes().data(), 4);

  nlohmann::json meta = c.metadata;
  if (c.dataset) {
    meta["source"] = c.dataset->metadata().source;
    meta["tracker_rate_hz"] = c.dataset->metadata().tracker_rate_hz;
    meta["units"] = c.dataset->metadata().units;
  }
  put_section(out, "META", meta.dump());
  if (c.dataset) put_section(out, "PROF", encode_profiles(*c.dataset));
  if (!c.means.empty()) put_section(out, "MEAN", encode_means(c.means));
  if (c.model) put_section(out, "MODL", encode_model(*c.model));
  if (!c.traces.empty()) put_section(out, "TRAC", encode_traces(c.traces));
  if (!out) throw Error("container write failed");
}

Container read_container(std::istream& in) {
  char magic[6];
  if (!in.read(magic, 6) || std::memcmp(magic, kContainerMagic, 6) != 0) {
    throw FormatError("not a SACKIT container (bad magic)");
  }
  char raw[4];
  if (!in.read(raw, 4)) throw FormatError("container header truncated");
  const std::string version_bytes(raw, 4);
  const auto version = Reader(version_bytes, "header").get<std::uint32_t>();
  if (version != kContainerVersion) {
    throw FormatError("unsupported container version " + std::to_string(version) +
                      " (expected " + std::to_string(kContainerVersion) + ")");
  }

  Container c;
  std::string prof_payload;
  bool has_prof = false;
  char tag[4];
  while (in.read(tag, 4)) {
    char len_raw[8];
    if (!in.read(len_raw, 8)) throw FormatError("section header truncated");
    const std::string len_bytes(len_raw, 8);
    const auto length = Reader(len_bytes, "header").get<std::uint64_t>();
    std::string payload(length, '\0');
    if (length > 0 && !in.read(payload.data(), static_cast<std::streamsize>(length))) {
      throw FormatError("section payload truncated");
    }
    const std::string name(tag, 4);
    if (name == "META") {
      try {
        c.metadata = nlohmann::json::parse(payload);
      } catch (const nlohmann::json::parse_error&) {
        throw FormatError("section META is not valid JSON");
      }
    } else if (name == "PROF") {
      prof_payload = std::move(payload);
      has_prof = true;
    } else if (name == "MEAN") {
      c.means = decode_means(payload);
    } else if (name == "MODL") {
      c.model = decode_model(payload);
    } else if (name == "TRAC") {
      c.traces = decode_traces(payload);
    }
    // Unknown sections are skipped.
  }
  if (has_prof) {
    DatasetMetadata meta;
    meta.source = c.metadata.value("source", std::string{});
    meta.tracker_rate_hz = c.metadata.value("tracker_rate_hz", 0.0);
    meta.units = c.metadata.value("units", std::string("deg,ms"));
    c.dataset = decode_profiles(prof_payload, std::move(meta));
  }
  return c;
}

void write_container(const std::filesystem::path& path, const Container& container) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_container(out, container);
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return read_container(in);
}

void write_dataset(const std::filesystem::path& path, const SaccadeDataset& dataset) {
  Container c;
  c.dataset = dataset;
  write_container(path, c);
}

SaccadeDataset read_dataset(const std::filesystem::path& path) {
  Container c = read_container(path);
  if (!c.dataset) throw FormatError(path.string() + " holds no profile section");
  return std::move(*c.dataset);
}

void write_model(const std::filesystem::path& path, const PredictionModel& model) {
  Container c;
  c.model = model;
  write_container(path, c);
}

PredictionModel read_model(const std::filesystem::path& path) {
  Container c = read_container(path);
  if (!c.model) throw FormatError(path.string() + " holds no model section");
  return std::move(*c.model);
}

void write_means(const std::filesystem::path& path, const std::vector<MeanProfile>& means) {
  Container c;
  c.means = means;
  write_container(path, c);
}

std::vector<MeanProfile> read_means(const std::filesystem::path& path) {
  Container c = read_container(path);
  if (c.means.empty()) throw FormatError(path.string() + " holds no mean-profile section");
  return std::move(c.means);
}

}  // namespace sackit
