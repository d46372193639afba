#include "hdapprox/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <zlib.h>

#include "hdapprox/errors.hpp"

namespace hdapprox {
namespace {

constexpr char kMagic[8] = {'H', 'D', 'A', 'P', 'P', 'R', 'O', 'X'};
constexpr std::size_t kHeaderBytes = sizeof kMagic + 4 + 8;
constexpr std::size_t kTrailerBytes = 4;

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  void words(const Hypervector& v) {
    for (const std::uint64_t w : v.words()) u64(w);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  Hypervector words(std::size_t dim) {
    std::vector<std::uint64_t> w(dim / kWordBits);
    for (auto& x : w) x = u64();
    return Hypervector::from_words(dim, std::move(w));
  }
  [[nodiscard]] bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::corrupt_file, "model payload ends early");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large models.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1U << 30));
    crc = crc32(crc, bytes.data() + offset, n);
    offset += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::uint32_t narrow(std::size_t v, const char* what) {
  if (v > 0xffffffffU) throw Error(ErrorCode::invalid_argument, std::string(what) + " too large for the model format");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& m) {
  const std::size_t dim = m.dim();
  if (dim == 0 || m.classes.dim() != dim || m.classes.classes() != m.label_names.size()) {
    throw Error(ErrorCode::invalid_argument, "model is incomplete or inconsistent");
  }
  Writer p;
  p.u64(m.master_seed);
  p.u32(narrow(dim, "dimension"));
  p.u32(narrow(m.levels.levels(), "level count"));
  p.u32(narrow(m.features(), "feature count"));
  p.u32(narrow(m.classes.classes(), "class count"));
  p.u8(static_cast<std::uint8_t>(m.encoder.spec.scheme));
  p.u32(m.encoder.spec.trunc_stages);
  p.f64(m.alpha);
  for (const auto& row : m.levels.rows()) p.words(row);
  p.words(m.ids.seed());
  for (const Hypervector* tie : {&m.encoder.tie_stage1, &m.encoder.tie_stage2}) {
    p.u8(tie->empty() ? 0 : 1);
    if (!tie->empty()) p.words(*tie);
  }
  p.u32(narrow(m.quantizer.levels(), "quantizer levels"));
  if (m.quantizer.features() != m.features()) throw Error(ErrorCode::invalid_argument, "quantizer feature count mismatch");
  for (std::size_t f = 0; f < m.quantizer.features(); ++f) {
    const auto edges = m.quantizer.edges(f);
    p.u32(narrow(edges.size(), "edge count"));
    for (const double e : edges) p.f64(e);
  }
  for (const auto& name : m.label_names) {
    p.u32(narrow(name.size(), "label"));
    p.raw(name.data(), name.size());
  }
  for (const double v : m.classes.data()) p.f64(v);

  std::vector<std::uint8_t>& payload = p.bytes();
  Writer file;
  file.raw(kMagic, sizeof kMagic);
  file.u32(kModelFormatVersion);
  file.u64(payload.size());
  file.raw(payload.data(), payload.size());
  file.u32(checksum(payload));
  return std::move(file.bytes());
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes + kTrailerBytes || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorCode::corrupt_file, "not a model file");
  }
  Reader header(bytes.subspan(sizeof kMagic, 12));
  const std::uint32_t version = header.u32();
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::version_mismatch, "model format version " + std::to_string(version) + ", expected " +
                                                 std::to_string(kModelFormatVersion));
  }
  const std::uint64_t length = header.u64();
  if (length != bytes.size() - kHeaderBytes - kTrailerBytes) throw Error(ErrorCode::corrupt_file, "model file is truncated");
  const auto payload = bytes.subspan(kHeaderBytes, static_cast<std::size_t>(length));
  Reader trailer(bytes.subspan(kHeaderBytes + payload.size()));
  if (trailer.u32() != checksum(payload)) throw Error(ErrorCode::corrupt_file, "model checksum mismatch");

  try {
    Reader r(payload);
    Model m;
    m.master_seed = r.u64();
    const std::size_t dim = r.u32();
    const std::size_t levels = r.u32();
    const std::size_t features = r.u32();
    const std::size_t classes = r.u32();
    const std::uint8_t scheme = r.u8();
    if (scheme > static_cast<std::uint8_t>(Scheme::trunc)) throw Error(ErrorCode::corrupt_file, "unknown encoder scheme");
    m.encoder.spec.scheme = static_cast<Scheme>(scheme);
    m.encoder.spec.trunc_stages = r.u32();
    m.alpha = r.f64();
    require_valid_dim(dim);

    std::vector<Hypervector> rows;
    for (std::size_t l = 0; l < levels; ++l) rows.push_back(r.words(dim));
    m.levels = LevelTable::from_rows(std::move(rows));
    m.ids = IdTable(r.words(dim), features);
    for (Hypervector* tie : {&m.encoder.tie_stage1, &m.encoder.tie_stage2}) {
      if (r.u8() != 0) *tie = r.words(dim);
    }

    const std::size_t quant_levels = r.u32();
    std::vector<std::vector<double>> edges(features);
    for (auto& e : edges) {
      const std::size_t n = r.u32();
      if (n >= quant_levels) throw Error(ErrorCode::corrupt_file, "quantizer edge count out of range");
      e.resize(n);
      for (auto& x : e) x = r.f64();
    }
    m.quantizer = Quantizer(quant_levels, std::move(edges));

    for (std::size_t k = 0; k < classes; ++k) m.label_names.push_back(r.str(r.u32()));
    m.classes = ClassMatrix(classes, dim);
    for (std::size_t k = 0; k < classes; ++k) {
      for (double& v : m.classes.row(k)) v = r.f64();
    }
    if (!r.done()) throw Error(ErrorCode::corrupt_file, "trailing bytes in model payload");
    validate(m.encoder, features, dim);
    return m;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::corrupt_file) throw;
    throw Error(ErrorCode::corrupt_file, std::string("inconsistent model payload: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = serialize_model(model);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out.flush()) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCode::io_error, "failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::io_error, "cannot move model into place at " + path.string());
  }
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open model " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace hdapprox
