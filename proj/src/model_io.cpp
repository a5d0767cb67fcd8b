#include "locec/model_io.hpp"

#include <bit>
#include <cstring>
#include <limits>

#include "locec/errors.hpp"
#include "locec/text_io.hpp"

namespace locec {

namespace {

constexpr char kMagic[8] = {'L', 'O', 'C', 'E', 'C', 'M', 'D', 'L'};

class Writer {
 public:
  void u32(std::uint32_t x) { put_le(x, 4); }
  void u64(std::uint64_t x) { put_le(x, 8); }
  void f64(double x) { put_le(std::bit_cast<std::uint64_t>(x), 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  void put_le(std::uint64_t x, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
  }
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  double f64() { return std::bit_cast<double>(get_le(8)); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw DataError(source_ + ": " + what + " at byte " + std::to_string(pos_));
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail("truncated model file");
  }
  std::uint64_t get_le(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t x = 0;
    for (int i = 0; i < bytes; ++i) {
      x |= std::uint64_t{static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)])} << (8 * i);
    }
    pos_ += static_cast<std::size_t>(bytes);
    return x;
  }
  const std::string& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::size_t to_size(const std::string& value, const std::string& key) {
  std::size_t x = 0;
  if (!text::parse_number(value, x)) throw DataError("hyperparameter '" + key + "' is not an integer: " + value);
  return x;
}

}  // namespace

const std::string& ModelFile::hyper_value(const std::string& key) const {
  for (const auto& [k, v] : hyper) {
    if (k == key) return v;
  }
  throw DataError("model file lacks hyperparameter '" + key + "'");
}

std::string encode_model(const ModelFile& m) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kModelFormatVersion);
  w.str(m.kind);
  w.u32(static_cast<std::uint32_t>(m.labels.size()));
  for (const auto& l : m.labels) w.str(l);
  w.u32(static_cast<std::uint32_t>(m.hyper.size()));
  for (const auto& [k, v] : m.hyper) {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<std::uint32_t>(m.tensors.size()));
  for (const auto& t : m.tensors) {
    if (t.data.size() != Tensor::element_count(t.shape)) throw ShapeError("tensor '" + t.name + "' size mismatch");
    w.str(t.name);
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) w.u64(d);
    for (auto x : t.data) w.f64(x);
  }
  return w.take();
}

ModelFile decode_model(const std::string& bytes, const std::string& source) {
  Reader r(bytes, source);
  if (r.raw(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) r.fail("not a model file (bad magic)");
  if (const auto v = r.u32(); v != kModelFormatVersion) r.fail("unsupported model format version " + std::to_string(v));
  ModelFile m;
  m.kind = r.str();
  for (std::uint32_t n = r.u32(), i = 0; i < n; ++i) m.labels.push_back(r.str());
  for (std::uint32_t n = r.u32(), i = 0; i < n; ++i) {
    auto key = r.str();
    m.hyper.emplace_back(std::move(key), r.str());
  }
  for (std::uint32_t n = r.u32(), i = 0; i < n; ++i) {
    Tensor t;
    t.name = r.str();
    const std::uint32_t rank = r.u32();
    std::uint64_t count = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const std::uint64_t dim = r.u64();
      if (dim != 0 && count > bytes.size() / dim) r.fail("tensor '" + t.name + "' is larger than the file");
      count *= dim;
      t.shape.push_back(static_cast<std::size_t>(dim));
    }
    if (count > bytes.size() / 8) r.fail("tensor '" + t.name + "' is larger than the file");
    t.data.resize(static_cast<std::size_t>(count));
    for (auto& x : t.data) x = r.f64();
    m.tensors.push_back(std::move(t));
  }
  if (!r.done()) r.fail("trailing bytes after model");
  return m;
}

void write_model_file(const std::filesystem::path& path, const ModelFile& m) {
  auto out = text::open_output(path.string());
  const auto bytes = encode_model(m);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

ModelFile read_model_file(const std::filesystem::path& path) {
  return decode_model(text::read_file(path.string()), path.string());
}

void save_community_classifier(const std::filesystem::path& path, const CommunityClassifier& c) {
  ModelFile m;
  m.kind = std::string(to_string(c.kind()));
  m.labels = c.labels().names();
  if (const auto* cnn = std::get_if<CommCnn>(&c.model())) {
    const auto& s = cnn->shape();
    m.hyper = {{"k", std::to_string(s.k)},
               {"width", std::to_string(s.width)},
               {"channels", std::to_string(s.channels)},
               {"hidden", std::to_string(s.hidden)}};
    m.tensors = cnn->params();
  } else {
    const auto& lr = std::get<SoftmaxRegression>(c.model());
    m.hyper = {{"dim", std::to_string(lr.dim())}};
    m.tensors = lr.to_tensors();
  }
  write_model_file(path, m);
}

CommunityClassifier load_community_classifier(const std::filesystem::path& path) {
  auto m = read_model_file(path);
  LabelSet labels = [&] {
    try {
      return LabelSet(m.labels);
    } catch (const std::invalid_argument& e) {
      throw DataError(path.string() + ": " + e.what());
    }
  }();
  try {
    if (m.kind == "commcnn") {
      CommCnnShape s;
      s.k = to_size(m.hyper_value("k"), "k");
      s.width = to_size(m.hyper_value("width"), "width");
      s.channels = to_size(m.hyper_value("channels"), "channels");
      s.hidden = to_size(m.hyper_value("hidden"), "hidden");
      s.classes = labels.size();
      return CommunityClassifier(std::move(labels), CommCnn::from_tensors(s, std::move(m.tensors)));
    }
    if (m.kind == "baseline") {
      return CommunityClassifier(std::move(labels), SoftmaxRegression::from_tensors(m.tensors));
    }
  } catch (const ShapeError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  throw DataError(path.string() + ": not a community classifier (kind '" + m.kind + "')");
}

}  // namespace locec
