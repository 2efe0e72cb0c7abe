#include "exogait/c3d_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>

#include "exogait/error.hpp"

namespace exogait {
namespace {

constexpr std::size_t kBlock = 512;
constexpr std::uint8_t kMagic = 0x50;
constexpr std::uint8_t kIntelProcessor = 84;
constexpr std::size_t kMaxArrayColumns = 255;

[[noreturn]] void truncated(const char* what) {
  throw Error(ErrorCode::TruncatedData, std::string("C3D data truncated while reading ") + what);
}

std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string rtrim(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.pop_back();
  return s;
}

// ---------------------------------------------------------------------------
// Little-endian cursor over an immutable byte span. Every read is bounds checked.

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t size() const { return bytes_.size(); }

  void require(std::size_t pos, std::size_t n, const char* what) const {
    if (pos > bytes_.size() || n > bytes_.size() - pos) truncated(what);
  }

  std::uint8_t u8(std::size_t pos) const {
    require(pos, 1, "byte");
    return bytes_[pos];
  }
  std::int8_t i8(std::size_t pos) const { return static_cast<std::int8_t>(u8(pos)); }
  std::uint16_t u16(std::size_t pos) const {
    require(pos, 2, "word");
    return static_cast<std::uint16_t>(bytes_[pos] | (bytes_[pos + 1] << 8));
  }
  std::int16_t i16(std::size_t pos) const { return static_cast<std::int16_t>(u16(pos)); }
  float f32(std::size_t pos) const {
    require(pos, 4, "float");
    const std::uint32_t v = static_cast<std::uint32_t>(bytes_[pos]) |
                            (static_cast<std::uint32_t>(bytes_[pos + 1]) << 8) |
                            (static_cast<std::uint32_t>(bytes_[pos + 2]) << 16) |
                            (static_cast<std::uint32_t>(bytes_[pos + 3]) << 24);
    return std::bit_cast<float>(v);
  }
  std::string str(std::size_t pos, std::size_t n) const {
    require(pos, n, "string");
    return std::string(reinterpret_cast<const char*>(bytes_.data() + pos), n);
  }

 private:
  std::span<const std::uint8_t> bytes_;
};

class ByteWriter {
 public:
  std::vector<std::uint8_t>& bytes() { return out_; }
  std::size_t size() const { return out_.size(); }

  void u8(std::uint8_t v) { out_.push_back(v); }
  void i8(std::int8_t v) { out_.push_back(static_cast<std::uint8_t>(v)); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }
  void f32(float f) {
    const auto v = std::bit_cast<std::uint32_t>(f);
    for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<std::uint8_t>((v >> s) & 0xFF));
  }
  void str(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  void pad_to_block() {
    const std::size_t rem = out_.size() % kBlock;
    if (rem != 0) out_.resize(out_.size() + (kBlock - rem), 0);
  }
  void put_u16_at(std::size_t pos, std::uint16_t v) {
    out_[pos] = static_cast<std::uint8_t>(v & 0xFF);
    out_[pos + 1] = static_cast<std::uint8_t>(v >> 8);
  }

 private:
  std::vector<std::uint8_t> out_;
};

// ---------------------------------------------------------------------------
// Parameter section model.

struct Parameter {
  std::int8_t type = 0;  // -1 char, 1 byte, 2 int16, 4 float
  std::vector<std::size_t> dims;
  std::vector<std::uint8_t> data;

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
  }

  double number(std::size_t i = 0) const {
    const ByteReader r(data);
    switch (type) {
      case 1: return r.u8(i);
      case 2: return r.i16(2 * i);
      case 4: return r.f32(4 * i);
      default: throw Error(ErrorCode::MalformedHeader, "numeric parameter has character type");
    }
  }
  // C3D counts stored in int16 slots are conventionally read as unsigned.
  std::size_t count(std::size_t i = 0) const {
    if (type == 2) return ByteReader(data).u16(2 * i);
    return static_cast<std::size_t>(std::max(0.0, number(i)));
  }
  std::vector<double> numbers() const {
    std::vector<double> out(element_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = number(i);
    return out;
  }
  std::vector<std::string> strings() const {
    if (type != -1) throw Error(ErrorCode::MalformedHeader, "text parameter has numeric type");
    if (dims.empty()) return {std::string(data.begin(), data.end())};
    const std::size_t len = dims[0];
    std::size_t count = 1;
    for (std::size_t i = 1; i < dims.size(); ++i) count *= dims[i];
    std::vector<std::string> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      out.push_back(rtrim(std::string(data.begin() + static_cast<std::ptrdiff_t>(i * len),
                                      data.begin() + static_cast<std::ptrdiff_t>((i + 1) * len))));
    }
    return out;
  }
};

using ParameterTable = std::map<std::string, Parameter>;  // key "GROUP:NAME"

std::string key(std::string_view group, std::string_view name) {
  return upper(std::string(group)) + ":" + upper(std::string(name));
}

ParameterTable parse_parameters(const ByteReader& r, std::size_t start, std::size_t limit) {
  std::map<int, std::string> groups;
  struct Pending {
    int group;
    std::string name;
    Parameter param;
  };
  std::vector<Pending> pending;

  std::size_t pos = start + 4;
  while (pos + 2 <= limit) {
    const int nchars = std::abs(static_cast<int>(r.i8(pos)));
    if (nchars == 0) break;
    const int id = r.i8(pos + 1);
    const std::string name = upper(r.str(pos + 2, static_cast<std::size_t>(nchars)));
    const std::size_t offset_pos = pos + 2 + static_cast<std::size_t>(nchars);
    const auto offset = r.u16(offset_pos);
    std::size_t cur = offset_pos + 2;
    if (id < 0) {
      groups[-id] = name;
    } else if (id > 0) {
      Parameter p;
      p.type = r.i8(cur);
      const std::size_t ndims = r.u8(cur + 1);
      cur += 2;
      for (std::size_t d = 0; d < ndims; ++d) p.dims.push_back(r.u8(cur + d));
      cur += ndims;
      const std::size_t elem = static_cast<std::size_t>(std::abs(p.type));
      if (elem != 1 && elem != 2 && elem != 4) {
        throw Error(ErrorCode::MalformedHeader, "parameter '" + name + "' has invalid data type");
      }
      const std::size_t nbytes = p.element_count() * elem;
      r.require(cur, nbytes, "parameter data");
      const std::string raw = r.str(cur, nbytes);
      p.data.assign(raw.begin(), raw.end());
      pending.push_back({id, name, std::move(p)});
    }
    if (offset == 0) break;
    pos = offset_pos + offset;
  }

  ParameterTable table;
  for (auto& p : pending) {
    auto g = groups.find(p.group);
    const std::string gname = g != groups.end() ? g->second : "GROUP" + std::to_string(p.group);
    table[gname + ":" + p.name] = std::move(p.param);
  }
  return table;
}

const Parameter* find(const ParameterTable& t, std::string_view group, std::string_view name) {
  auto it = t.find(key(group, name));
  return it == t.end() ? nullptr : &it->second;
}

const Parameter& require_param(const ParameterTable& t, std::string_view group, std::string_view name) {
  const Parameter* p = find(t, group, name);
  if (p == nullptr) {
    throw Error(ErrorCode::MissingRequiredParameter,
                "required C3D parameter " + key(group, name) + " is missing");
  }
  return *p;
}

// LABELS, LABELS2, LABELS3, ... concatenated up to `count` entries.
std::vector<std::string> chunked_strings(const ParameterTable& t, std::string_view group,
                                         std::string_view base, std::size_t count, bool required) {
  std::vector<std::string> out;
  for (int chunk = 1; out.size() < count; ++chunk) {
    const std::string name = chunk == 1 ? std::string(base) : std::string(base) + std::to_string(chunk);
    const Parameter* p = find(t, group, name);
    if (p == nullptr) break;
    for (auto& s : p->strings()) out.push_back(std::move(s));
  }
  if (out.size() < count) {
    if (required) {
      throw Error(ErrorCode::MissingRequiredParameter,
                  key(group, base) + " has fewer entries than declared");
    }
    out.resize(count);
  }
  out.resize(count);
  return out;
}

double unit_to_mm(std::string units) {
  units = upper(rtrim(std::move(units)));
  if (units == "M") return 1000.0;
  if (units == "CM") return 10.0;
  return 1.0;
}

}  // namespace

// ---------------------------------------------------------------------------

Trial read_c3d(std::span<const std::uint8_t> bytes) {
  const ByteReader r(bytes);
  if (bytes.size() < kBlock) truncated("header block");
  if (r.u8(1) != kMagic) {
    throw Error(ErrorCode::MalformedHeader, "C3D header byte 2 is not 0x50");
  }
  const std::size_t param_block = r.u8(0);
  if (param_block < 2) throw Error(ErrorCode::MalformedHeader, "C3D parameter block pointer is invalid");
  const std::size_t pstart = (param_block - 1) * kBlock;
  r.require(pstart, 4, "parameter section header");
  const std::uint8_t processor = r.u8(pstart + 3);
  if (processor != kIntelProcessor) {
    throw Error(ErrorCode::UnsupportedProcessor,
                "C3D processor type " + std::to_string(processor) + " is not supported (only 84, Intel)");
  }

  const std::size_t hdr_points = r.u16(2);
  const std::size_t hdr_first = r.u16(6);
  const std::size_t hdr_last = r.u16(8);
  const float hdr_scale = r.f32(12);
  const std::size_t hdr_data_start = r.u16(16);
  const std::size_t hdr_ratio = r.u16(18);
  const float hdr_rate = r.f32(20);

  std::size_t limit = bytes.size();
  if (hdr_data_start > param_block) limit = std::min(limit, (hdr_data_start - 1) * kBlock);
  const ParameterTable params = parse_parameters(r, pstart, limit);

  Trial trial;
  const std::size_t n_points = require_param(params, "POINT", "USED").count();
  (void)hdr_points;
  const Parameter* p_scale = find(params, "POINT", "SCALE");
  const double scale = p_scale ? p_scale->number() : hdr_scale;
  const Parameter* p_rate = find(params, "POINT", "RATE");
  trial.point_rate = p_rate ? p_rate->number() : hdr_rate;
  if (!(trial.point_rate > 0.0)) throw Error(ErrorCode::MalformedHeader, "C3D point rate is not positive");
  const Parameter* p_start = find(params, "POINT", "DATA_START");
  const std::size_t data_start = p_start ? p_start->count() : hdr_data_start;
  if (data_start < 2) throw Error(ErrorCode::MalformedHeader, "C3D data start block is invalid");

  std::size_t first = hdr_first;
  std::size_t last = hdr_last;
  if (const Parameter* s = find(params, "TRIAL", "ACTUAL_START_FIELD"); s && s->element_count() >= 2) {
    first = s->count(0) + (s->count(1) << 16);
  }
  if (const Parameter* e = find(params, "TRIAL", "ACTUAL_END_FIELD"); e && e->element_count() >= 2) {
    last = e->count(0) + (e->count(1) << 16);
  }
  trial.first_frame = static_cast<std::int64_t>(first);
  trial.last_frame = static_cast<std::int64_t>(last);
  const std::size_t frames = trial.frame_count();

  const Parameter* p_aused = find(params, "ANALOG", "USED");
  const std::size_t n_analog = p_aused ? p_aused->count() : 0;
  std::size_t ratio = hdr_ratio;
  if (const Parameter* ar = find(params, "ANALOG", "RATE"); ar && ar->number() > 0.0) {
    trial.analog_rate = ar->number();
    ratio = static_cast<std::size_t>(std::llround(trial.analog_rate / trial.point_rate));
  } else {
    trial.analog_rate = trial.point_rate * static_cast<double>(std::max<std::size_t>(ratio, 1));
  }
  if (n_analog > 0 && ratio == 0) throw Error(ErrorCode::MalformedHeader, "C3D analog ratio is zero");
  if (n_analog == 0) ratio = std::max<std::size_t>(ratio, 1);

  // Labels and metadata.
  const auto labels = chunked_strings(params, "POINT", "LABELS", n_points, n_points > 0);
  std::string point_units = "mm";
  if (const Parameter* u = find(params, "POINT", "UNITS"); u && u->type == -1) point_units = u->strings().front();
  const double to_mm = unit_to_mm(point_units);

  const auto alabels = chunked_strings(params, "ANALOG", "LABELS", n_analog, n_analog > 0);
  const auto aunits = chunked_strings(params, "ANALOG", "UNITS", n_analog, false);
  std::vector<double> ascale(n_analog, 1.0), aoffset(n_analog, 0.0);
  if (const Parameter* s = find(params, "ANALOG", "SCALE")) {
    auto v = s->numbers();
    for (std::size_t i = 0; i < std::min(v.size(), n_analog); ++i) ascale[i] = v[i];
  }
  if (const Parameter* o = find(params, "ANALOG", "OFFSET")) {
    auto v = o->numbers();
    for (std::size_t i = 0; i < std::min(v.size(), n_analog); ++i) aoffset[i] = v[i];
  }
  double gen_scale = 1.0;
  if (const Parameter* g = find(params, "ANALOG", "GEN_SCALE")) gen_scale = g->number();
  bool unsigned_analog = false;
  if (const Parameter* f = find(params, "ANALOG", "FORMAT"); f && f->type == -1) {
    unsigned_analog = upper(f->strings().front()) == "UNSIGNED";
  }

  // Data section.
  const bool is_float = scale < 0.0;
  const double abs_scale = std::abs(scale);
  const std::size_t elem = is_float ? 4 : 2;
  const std::size_t per_frame = (n_points * 4 + n_analog * ratio) * elem;
  const std::size_t dstart = (data_start - 1) * kBlock;
  r.require(dstart, per_frame * frames, "data section");

  trial.markers.resize(n_points);
  for (std::size_t m = 0; m < n_points; ++m) {
    trial.markers[m].label = labels[m];
    trial.markers[m].frames.resize(frames);
  }
  trial.analogs.resize(n_analog);
  for (std::size_t a = 0; a < n_analog; ++a) {
    trial.analogs[a].label = alabels[a];
    trial.analogs[a].units = aunits[a];
    trial.analogs[a].rate = trial.analog_rate;
    trial.analogs[a].samples.resize(frames * ratio);
  }

  std::size_t pos = dstart;
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t m = 0; m < n_points; ++m) {
      PointFrame& pf = trial.markers[m].frames[f];
      if (is_float) {
        for (std::size_t c = 0; c < 3; ++c) pf.xyz[c] = static_cast<double>(r.f32(pos + 4 * c)) * to_mm;
        pf.residual = r.f32(pos + 12);
        pos += 16;
      } else {
        for (std::size_t c = 0; c < 3; ++c) pf.xyz[c] = r.i16(pos + 2 * c) * abs_scale * to_mm;
        pf.residual = static_cast<float>(r.i16(pos + 6));
        pos += 8;
      }
      pf.valid = pf.residual >= 0.0f;
      if (!pf.valid) pf.xyz = {0.0, 0.0, 0.0};
    }
    for (std::size_t s = 0; s < ratio && n_analog > 0; ++s) {
      for (std::size_t a = 0; a < n_analog; ++a) {
        double raw;
        if (is_float) {
          raw = r.f32(pos);
          pos += 4;
        } else {
          raw = unsigned_analog ? static_cast<double>(r.u16(pos)) : static_cast<double>(r.i16(pos));
          pos += 2;
        }
        trial.analogs[a].samples[f * ratio + s] = (raw - aoffset[a]) * ascale[a] * gen_scale;
      }
    }
  }

  // Events.
  if (const Parameter* eu = find(params, "EVENT", "USED"); eu && eu->count() > 0) {
    const std::size_t n_events = eu->count();
    const Parameter& times = require_param(params, "EVENT", "TIMES");
    if (times.element_count() < 2 * n_events) {
      throw Error(ErrorCode::MissingRequiredParameter, "EVENT:TIMES has fewer entries than EVENT:USED");
    }
    const auto contexts = chunked_strings(params, "EVENT", "CONTEXTS", n_events, false);
    const auto elabels = chunked_strings(params, "EVENT", "LABELS", n_events, true);
    for (std::size_t i = 0; i < n_events; ++i) {
      const double minutes = times.number(2 * i);
      const double seconds = times.number(2 * i + 1);
      trial.events.push_back({contexts[i], elabels[i], minutes * 60.0 + seconds});
    }
  }

  if (const Parameter* k = find(params, "METADATA", "KEYS")) {
    const auto keys = k->strings();
    std::vector<std::string> values(keys.size());
    if (const Parameter* v = find(params, "METADATA", "VALUES")) {
      auto vs = v->strings();
      for (std::size_t i = 0; i < std::min(vs.size(), values.size()); ++i) values[i] = vs[i];
    }
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (!keys[i].empty()) trial.subject_meta[keys[i]] = values[i];
    }
  }
  return trial;
}

Trial read_c3d_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return read_c3d(bytes);
}

// ---------------------------------------------------------------------------

namespace {

class ParameterWriter {
 public:
  void group(std::int8_t id, std::string_view name) {
    finish_record();
    w_.i8(static_cast<std::int8_t>(name.size()));
    w_.i8(static_cast<std::int8_t>(-id));
    w_.str(name);
    offset_pos_ = w_.size();
    w_.u16(0);
    w_.u8(0);  // empty description
  }

  void scalar_i16(std::int8_t gid, std::string_view name, std::uint16_t v) {
    begin(gid, name, 2, {});
    w_.u16(v);
    end();
  }
  void scalar_f32(std::int8_t gid, std::string_view name, float v) {
    begin(gid, name, 4, {});
    w_.f32(v);
    end();
  }
  void array_i16(std::int8_t gid, std::string_view name, const std::vector<std::uint16_t>& v) {
    begin(gid, name, 2, {v.size()});
    for (auto x : v) w_.u16(x);
    end();
  }
  void array_f32(std::int8_t gid, std::string_view name, const std::vector<float>& v,
                 std::vector<std::size_t> dims) {
    begin(gid, name, 4, std::move(dims));
    for (auto x : v) w_.f32(x);
    end();
  }
  void text(std::int8_t gid, std::string_view name, std::string_view s) {
    begin(gid, name, -1, {std::max<std::size_t>(s.size(), 1)});
    w_.str(s);
    if (s.empty()) w_.u8(' ');
    end();
  }
  void strings(std::int8_t gid, std::string_view name, const std::vector<std::string>& v) {
    std::size_t len = 1;
    for (const auto& s : v) len = std::max(len, s.size());
    if (len > 255) {
      throw Error(ErrorCode::InvalidArgument, "C3D text entries are limited to 255 characters");
    }
    begin(gid, name, -1, {len, v.size()});
    for (const auto& s : v) {
      w_.str(s);
      for (std::size_t i = s.size(); i < len; ++i) w_.u8(' ');
    }
    end();
  }
  // LABELS, LABELS2, ... in chunks of 255 entries.
  void chunked(std::int8_t gid, std::string_view base, const std::vector<std::string>& v) {
    if (v.empty()) {
      strings(gid, base, v);
      return;
    }
    for (std::size_t i = 0, chunk = 1; i < v.size(); i += kMaxArrayColumns, ++chunk) {
      const std::string name = chunk == 1 ? std::string(base) : std::string(base) + std::to_string(chunk);
      const auto last = std::min(v.size(), i + kMaxArrayColumns);
      strings(gid, name, std::vector<std::string>(v.begin() + static_cast<std::ptrdiff_t>(i),
                                                   v.begin() + static_cast<std::ptrdiff_t>(last)));
    }
  }

  std::vector<std::uint8_t> finish() {
    // The last record's offset stays 0, which terminates the section.
    w_.u8(0);
    w_.u8(0);
    return std::move(w_.bytes());
  }

 private:
  void begin(std::int8_t gid, std::string_view name, std::int8_t type, std::vector<std::size_t> dims) {
    finish_record();
    for (auto d : dims) {
      if (d > 255) throw Error(ErrorCode::InvalidArgument, "C3D parameter dimension exceeds 255");
    }
    w_.i8(static_cast<std::int8_t>(name.size()));
    w_.i8(gid);
    w_.str(name);
    offset_pos_ = w_.size();
    w_.u16(0);
    w_.i8(type);
    w_.u8(static_cast<std::uint8_t>(dims.size()));
    for (auto d : dims) w_.u8(static_cast<std::uint8_t>(d));
  }
  void end() { w_.u8(0); }

  void finish_record() {
    if (!offset_pos_) return;
    const std::size_t next = w_.size() - *offset_pos_;
    if (next > 0xFFFF) throw Error(ErrorCode::InvalidArgument, "C3D parameter record too large");
    w_.put_u16_at(*offset_pos_, static_cast<std::uint16_t>(next));
    offset_pos_.reset();
  }

  ByteWriter w_;
  std::optional<std::size_t> offset_pos_;
};

std::vector<std::uint16_t> split_u32(std::uint32_t v) {
  return {static_cast<std::uint16_t>(v & 0xFFFF), static_cast<std::uint16_t>(v >> 16)};
}

}  // namespace

std::vector<std::uint8_t> write_c3d(const Trial& trial) {
  if (trial.markers.size() > kMaxC3dMarkers) {
    throw Error(ErrorCode::TooManyMarkers,
                "C3D files hold at most 65535 markers, got " + std::to_string(trial.markers.size()));
  }
  if (trial.analogs.size() > kMaxC3dMarkers) {
    throw Error(ErrorCode::InvalidArgument, "C3D files hold at most 65535 analog channels");
  }
  if ((trial.markers.empty() && trial.analogs.empty()) || trial.frame_count() == 0) {
    throw Error(ErrorCode::EmptyTrial, "trial has no markers, analog channels, or frames");
  }
  trial.validate();
  if (trial.events.size() > kMaxArrayColumns) {
    throw Error(ErrorCode::InvalidArgument, "at most 255 events can be written");
  }
  if (trial.first_frame < 0 || trial.last_frame > 0xFFFFFFFFLL) {
    throw Error(ErrorCode::InvalidArgument, "frame numbers out of C3D range");
  }

  const std::size_t frames = trial.frame_count();
  const std::size_t n_points = trial.markers.size();
  const std::size_t n_analog = trial.analogs.size();
  const std::size_t ratio = n_analog > 0 ? trial.analog_ratio() : 1;
  const double analog_rate = n_analog > 0 ? trial.analog_rate : trial.point_rate;

  constexpr std::int8_t kPoint = 1, kAnalog = 2, kEvent = 3, kTrialGroup = 4, kMeta = 5;

  // Parameter section is laid out twice: once to learn its size (and so
  // DATA_START), then for real with the final block number.
  auto build = [&](std::uint16_t data_start) {
    ParameterWriter pw;
    pw.group(kPoint, "POINT");
    pw.scalar_i16(kPoint, "USED", static_cast<std::uint16_t>(n_points));
    pw.scalar_f32(kPoint, "SCALE", -1.0f);
    pw.scalar_f32(kPoint, "RATE", static_cast<float>(trial.point_rate));
    pw.scalar_i16(kPoint, "DATA_START", data_start);
    pw.scalar_i16(kPoint, "FRAMES", static_cast<std::uint16_t>(std::min<std::size_t>(frames, 0xFFFF)));
    pw.text(kPoint, "UNITS", "mm");
    std::vector<std::string> labels;
    for (const auto& m : trial.markers) labels.push_back(m.label);
    pw.chunked(kPoint, "LABELS", labels);

    pw.group(kAnalog, "ANALOG");
    pw.scalar_i16(kAnalog, "USED", static_cast<std::uint16_t>(n_analog));
    pw.scalar_f32(kAnalog, "RATE", static_cast<float>(analog_rate));
    pw.scalar_f32(kAnalog, "GEN_SCALE", 1.0f);
    std::vector<std::string> alabels, aunits;
    for (const auto& a : trial.analogs) {
      alabels.push_back(a.label);
      aunits.push_back(a.units);
    }
    pw.chunked(kAnalog, "LABELS", alabels);
    pw.chunked(kAnalog, "UNITS", aunits);
    for (std::size_t i = 0, chunk = 1; i < std::max<std::size_t>(n_analog, 1); i += kMaxArrayColumns, ++chunk) {
      const std::size_t n = std::min(kMaxArrayColumns, n_analog - std::min(n_analog, i));
      const std::string suffix = chunk == 1 ? "" : std::to_string(chunk);
      pw.array_f32(kAnalog, "SCALE" + suffix, std::vector<float>(n, 1.0f), {n});
      pw.array_i16(kAnalog, "OFFSET" + suffix, std::vector<std::uint16_t>(n, 0));
    }

    pw.group(kEvent, "EVENT");
    pw.scalar_i16(kEvent, "USED", static_cast<std::uint16_t>(trial.events.size()));
    std::vector<std::string> contexts, elabels;
    std::vector<float> times;
    for (const auto& e : trial.events) {
      contexts.push_back(e.context);
      elabels.push_back(e.label);
      const double minutes = std::floor(e.time / 60.0);
      times.push_back(static_cast<float>(minutes));
      times.push_back(static_cast<float>(e.time - minutes * 60.0));
    }
    pw.strings(kEvent, "CONTEXTS", contexts);
    pw.strings(kEvent, "LABELS", elabels);
    pw.array_f32(kEvent, "TIMES", times, {2, trial.events.size()});

    pw.group(kTrialGroup, "TRIAL");
    pw.array_i16(kTrialGroup, "ACTUAL_START_FIELD", split_u32(static_cast<std::uint32_t>(trial.first_frame)));
    pw.array_i16(kTrialGroup, "ACTUAL_END_FIELD", split_u32(static_cast<std::uint32_t>(trial.last_frame)));
    pw.scalar_f32(kTrialGroup, "CAMERA_RATE", static_cast<float>(trial.point_rate));

    pw.group(kMeta, "METADATA");
    std::vector<std::string> keys, values;
    for (const auto& [k, v] : trial.subject_meta) {
      keys.push_back(k);
      values.push_back(v);
    }
    if (keys.size() > kMaxArrayColumns) {
      throw Error(ErrorCode::InvalidArgument, "at most 255 metadata entries can be written");
    }
    pw.strings(kMeta, "KEYS", keys);
    pw.strings(kMeta, "VALUES", values);
    return pw.finish();
  };

  const std::size_t param_bytes = build(0).size() + 4;
  const std::size_t param_blocks = (param_bytes + kBlock - 1) / kBlock;
  const std::size_t data_start = 2 + param_blocks;
  if (data_start > 0x7FFF) throw Error(ErrorCode::InvalidArgument, "C3D parameter section too large");
  const auto param_body = build(static_cast<std::uint16_t>(data_start));

  ByteWriter w;
  // Header block.
  w.u8(2);
  w.u8(kMagic);
  w.u16(static_cast<std::uint16_t>(n_points));
  w.u16(static_cast<std::uint16_t>(n_analog * ratio));
  w.u16(static_cast<std::uint16_t>(std::min<std::int64_t>(trial.first_frame, 0xFFFF)));
  w.u16(static_cast<std::uint16_t>(std::min<std::int64_t>(trial.last_frame, 0xFFFF)));
  w.u16(0);  // max interpolation gap
  w.f32(-1.0f);
  w.u16(static_cast<std::uint16_t>(data_start));
  w.u16(static_cast<std::uint16_t>(ratio));
  w.f32(static_cast<float>(trial.point_rate));
  w.pad_to_block();

  // Parameter section.
  w.u8(1);
  w.u8(kMagic);
  w.u8(static_cast<std::uint8_t>(std::min<std::size_t>(param_blocks, 255)));
  w.u8(kIntelProcessor);
  w.bytes().insert(w.bytes().end(), param_body.begin(), param_body.end());
  w.pad_to_block();

  // Data section.
  w.bytes().reserve(w.size() + frames * (n_points * 16 + n_analog * ratio * 4));
  for (std::size_t f = 0; f < frames; ++f) {
    for (const auto& m : trial.markers) {
      const PointFrame& pf = m.frames[f];
      if (pf.valid) {
        for (double c : pf.xyz) w.f32(static_cast<float>(c));
        w.f32(0.0f);
      } else {
        for (int c = 0; c < 3; ++c) w.f32(0.0f);
        w.f32(-1.0f);
      }
    }
    for (std::size_t s = 0; s < ratio && n_analog > 0; ++s) {
      for (const auto& a : trial.analogs) w.f32(static_cast<float>(a.samples[f * ratio + s]));
    }
  }
  w.pad_to_block();
  return std::move(w.bytes());
}

void write_c3d_file(const Trial& trial, const std::filesystem::path& path) {
  const auto bytes = write_c3d(trial);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace exogait
