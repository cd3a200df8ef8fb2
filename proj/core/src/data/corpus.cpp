#include "ilmlab/data/corpus.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <iterator>

#include "ilmlab/data/vocabulary.hpp"
#include "ilmlab/util/error.hpp"
#include "ilmlab/util/random.hpp"

namespace ilmlab::data {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

void append_hex_double(std::string& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    const auto byte = static_cast<std::uint8_t>(bits >> (8 * i));
    out.push_back(kHexDigits[byte >> 4]);
    out.push_back(kHexDigits[byte & 0xf]);
  }
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

/// Cursor over a line-oriented buffer that reports absolute byte offsets.
class LineReader {
 public:
  explicit LineReader(const std::string& bytes) : bytes_(bytes) {}

  bool next(std::string_view& line, std::size_t& offset) {
    if (pos_ >= bytes_.size()) return false;
    const auto nl = bytes_.find('\n', pos_);
    if (nl == std::string::npos) throw FormatError("missing newline at end of record", bytes_.size());
    offset = pos_;
    line = std::string_view(bytes_).substr(pos_, nl - pos_);
    pos_ = nl + 1;
    return true;
  }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto at = line.find(sep, start);
    if (at == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, at - start));
    start = at + 1;
  }
}

std::size_t parse_count(std::string_view text, std::size_t offset, const char* what) {
  std::size_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
    throw FormatError(std::string("invalid ") + what + " '" + std::string(text) + "'", offset);
  return v;
}

std::vector<std::size_t> parse_labels(std::string_view text, std::size_t offset) {
  std::vector<std::size_t> labels;
  if (text.empty()) return labels;
  std::size_t local = 0;
  for (auto part : split(text, ' ')) {
    labels.push_back(parse_count(part, offset + local, "label id"));
    local += part.size() + 1;
  }
  return labels;
}

std::string render_labels(const std::vector<std::size_t>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(labels[i]);
  }
  return out;
}

/// Parses "key=value" fields of a header line.
std::size_t header_field(const std::vector<std::string_view>& fields, std::string_view key, std::size_t offset) {
  for (auto f : fields) {
    if (f.size() > key.size() && f.substr(0, key.size()) == key && f[key.size()] == '=')
      return parse_count(f.substr(key.size() + 1), offset, "header field");
  }
  throw FormatError("header is missing '" + std::string(key) + "'", offset);
}

}  // namespace

void Corpus::validate(std::size_t vocab_size) const {
  for (const auto& u : utterances) {
    if (u.features.cols() != feature_dim)
      throw DimensionError("utterance '" + u.id + "' has feature width " + std::to_string(u.features.cols()) +
                           ", corpus expects " + std::to_string(feature_dim));
    if (u.frames() < u.labels.size())
      throw InputError("utterance '" + u.id + "' has fewer frames than labels");
    for (auto id : u.labels)
      if (id < kFirstLabel || id >= vocab_size)
        throw IndexError("utterance '" + u.id + "' holds label id " + std::to_string(id) +
                         " outside the label range of a vocabulary of size " + std::to_string(vocab_size));
  }
}

TextCorpus TextCorpus::from_corpus(const Corpus& corpus) {
  TextCorpus text;
  text.sentences.reserve(corpus.size());
  for (const auto& u : corpus.utterances) text.sentences.push_back({u.id, u.labels});
  return text;
}

std::string encode_corpus(const Corpus& corpus) {
  std::string out = "#ilmlab-corpus v1 dim=" + std::to_string(corpus.feature_dim) +
                    " count=" + std::to_string(corpus.size()) + "\n";
  for (const auto& u : corpus.utterances) {
    out += u.id;
    out += '\t';
    out += std::to_string(u.frames());
    out += '\t';
    out += render_labels(u.labels);
    out += '\t';
    for (double v : u.features.values()) append_hex_double(out, v);
    out += '\n';
  }
  return out;
}

Corpus decode_corpus(const std::string& bytes) {
  LineReader reader(bytes);
  std::string_view line;
  std::size_t offset = 0;
  if (!reader.next(line, offset)) throw FormatError("empty corpus file", 0);
  auto header = split(line, ' ');
  if (header.size() < 4 || header[0] != "#ilmlab-corpus" || header[1] != "v1")
    throw FormatError("not an ilmlab corpus file (bad header)", 0);
  Corpus corpus;
  corpus.feature_dim = header_field(header, "dim", 0);
  const std::size_t count = header_field(header, "count", 0);
  if (corpus.feature_dim == 0) throw FormatError("feature dimension must be positive", 0);
  while (reader.next(line, offset)) {
    auto fields = split(line, '\t');
    if (fields.size() != 4) throw FormatError("expected 4 tab-separated fields", offset);
    Utterance u;
    u.id = std::string(fields[0]);
    if (u.id.empty()) throw FormatError("empty utterance id", offset);
    const std::size_t field1 = offset + fields[0].size() + 1;
    const std::size_t frames = parse_count(fields[1], field1, "frame count");
    const std::size_t field2 = field1 + fields[1].size() + 1;
    u.labels = parse_labels(fields[2], field2);
    const std::size_t field3 = field2 + fields[2].size() + 1;
    const std::size_t n_values = frames * corpus.feature_dim;
    if (frames == 0 || fields[3].size() != 16 * n_values)
      throw FormatError("feature payload length does not match frame count", field3);
    std::vector<double> values(n_values);
    for (std::size_t k = 0; k < n_values; ++k) {
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) {
        const std::size_t at = 16 * k + 2 * static_cast<std::size_t>(b);
        const int hi = hex_value(fields[3][at]);
        const int lo = hex_value(fields[3][at + 1]);
        if (hi < 0 || lo < 0) throw FormatError("invalid hex digit in features", field3 + at);
        bits |= static_cast<std::uint64_t>(hi * 16 + lo) << (8 * b);
      }
      values[k] = std::bit_cast<double>(bits);
    }
    try {
      u.features = num::Tensor({frames, corpus.feature_dim}, std::move(values));
    } catch (const Error& e) {
      throw FormatError(e.what(), field3);
    }
    corpus.utterances.push_back(std::move(u));
  }
  if (corpus.size() != count)
    throw FormatError("header promises " + std::to_string(count) + " utterances, found " +
                          std::to_string(corpus.size()),
                      bytes.size());
  return corpus;
}

std::string encode_text(const TextCorpus& text) {
  std::string out = "#ilmlab-text v1 count=" + std::to_string(text.size()) + "\n";
  for (const auto& s : text.sentences) out += s.id + "\t" + render_labels(s.labels) + "\n";
  return out;
}

TextCorpus decode_text(const std::string& bytes) {
  LineReader reader(bytes);
  std::string_view line;
  std::size_t offset = 0;
  if (!reader.next(line, offset)) throw FormatError("empty text file", 0);
  auto header = split(line, ' ');
  if (header.size() < 3 || header[0] != "#ilmlab-text" || header[1] != "v1")
    throw FormatError("not an ilmlab text file (bad header)", 0);
  const std::size_t count = header_field(header, "count", 0);
  TextCorpus text;
  while (reader.next(line, offset)) {
    auto fields = split(line, '\t');
    if (fields.size() != 2 || fields[0].empty()) throw FormatError("expected 'id<TAB>labels'", offset);
    text.sentences.push_back({std::string(fields[0]), parse_labels(fields[1], offset + fields[0].size() + 1)});
  }
  if (text.size() != count)
    throw FormatError("header promises " + std::to_string(count) + " sentences, found " + std::to_string(text.size()),
                      bytes.size());
  return text;
}

void save_corpus(const Corpus& corpus, const std::string& path) { write_file(path, encode_corpus(corpus)); }
Corpus load_corpus(const std::string& path) { return decode_corpus(read_file(path)); }
void save_text(const TextCorpus& text, const std::string& path) { write_file(path, encode_text(text)); }
TextCorpus load_text(const std::string& path) { return decode_text(read_file(path)); }

BatchIterator::BatchIterator(std::size_t corpus_size, std::size_t batch_size, std::uint64_t seed)
    : corpus_size_(corpus_size), batch_size_(batch_size), seed_(seed) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
}

std::vector<std::vector<std::size_t>> BatchIterator::epoch(std::size_t epoch_index) const {
  std::vector<std::size_t> order(corpus_size_);
  for (std::size_t i = 0; i < corpus_size_; ++i) order[i] = i;
  util::Rng rng(util::derive_seed(seed_, epoch_index));
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size_) {
    const std::size_t end = std::min(order.size(), start + batch_size_);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace ilmlab::data
