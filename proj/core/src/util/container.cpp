#include "ilmlab/util/container.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "ilmlab/util/error.hpp"
#include "ilmlab/util/hash.hpp"

namespace ilmlab::util {

namespace {

constexpr char kMagic[4] = {'I', 'L', 'M', 'C'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  std::uint64_t uint(int width, const char* what) {
    need(static_cast<std::size_t>(width), what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i)
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(uint(4, what)); }
  std::uint64_t u64(const char* what) { return uint(8, what); }
  std::string str(const char* what) {
    const std::uint32_t n = u32(what);
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw FormatError(std::string("truncated container while reading ") + what, pos_);
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string Container::encode() const {
  std::string out(kMagic, 4);
  put_u32(out, kFormatVersion);
  put_str(out, kind);
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  for (const auto& [k, v] : meta) {
    put_str(out, k);
    put_str(out, v);
  }
  put_u32(out, static_cast<std::uint32_t>(vocab.size()));
  for (const auto& t : vocab) put_str(out, t);
  put_u32(out, static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    put_str(out, a.name);
    put_u32(out, static_cast<std::uint32_t>(a.shape.size()));
    std::size_t count = 1;
    for (auto d : a.shape) {
      put_u64(out, d);
      count *= d;
    }
    if (count != a.values.size()) throw InvariantError("array '" + a.name + "' value count does not match its shape");
    for (double v : a.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

Container Container::decode(const std::string& bytes) {
  Reader r(bytes);
  r.need(4, "magic");
  if (bytes.compare(0, 4, kMagic, 4) != 0) throw FormatError("not an ilmlab container (bad magic)", 0);
  r.uint(4, "magic");
  const std::size_t version_at = r.pos();
  const std::uint32_t version = r.u32("format version");
  if (version != kFormatVersion)
    throw FormatError("unsupported container version " + std::to_string(version), version_at);
  Container c;
  c.kind = r.str("kind");
  const std::uint32_t n_meta = r.u32("meta count");
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.str("meta key");
    std::string v = r.str("meta value");
    c.meta.emplace_back(std::move(k), std::move(v));
  }
  const std::uint32_t n_vocab = r.u32("vocabulary size");
  for (std::uint32_t i = 0; i < n_vocab; ++i) c.vocab.push_back(r.str("vocabulary token"));
  const std::uint32_t n_arrays = r.u32("array count");
  for (std::uint32_t i = 0; i < n_arrays; ++i) {
    NamedArray a;
    a.name = r.str("array name");
    const std::uint32_t rank = r.u32("array rank");
    std::size_t count = 1;
    for (std::uint32_t d = 0; d < rank; ++d) {
      const std::size_t at = r.pos();
      const std::uint64_t extent = r.u64("array extent");
      if (extent == 0 || extent > (1ULL << 32)) throw FormatError("invalid extent in array '" + a.name + "'", at);
      a.shape.push_back(static_cast<std::size_t>(extent));
      count *= static_cast<std::size_t>(extent);
    }
    r.need(count * 8, "array values");
    a.values.resize(count);
    for (std::size_t k = 0; k < count; ++k) a.values[k] = std::bit_cast<double>(r.u64("array value"));
    c.arrays.push_back(std::move(a));
  }
  if (!r.done()) throw FormatError("trailing bytes after container payload", r.pos());
  return c;
}

void Container::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  const std::string bytes = encode();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Container Container::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

std::string Container::content_hash() const { return hex64(hash_bytes(encode())); }

bool Container::has_meta(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return true;
  return false;
}

const std::string& Container::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  throw FormatError("container is missing header key '" + key + "'", 0);
}

const NamedArray& Container::array(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return a;
  throw FormatError("container is missing tensor '" + name + "'", 0);
}

}  // namespace ilmlab::util
