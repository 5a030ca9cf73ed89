#include "skillspace/model.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "skillspace/atomic_file.hpp"

namespace skillspace::model {

namespace {

using embed::TagKind;
using embed::TagSpace;
using embed::Vocabulary;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { put_le(v); }
  void u64(std::uint64_t v) { put_le(v); }
  void i64(std::int64_t v) { put_le(static_cast<std::uint64_t>(v)); }
  void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  void floats(std::span<const float> values) {
    for (float v : values) f32(v);
  }
  std::string take() { return std::move(out_); }

 private:
  template <typename U>
  void put_le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i)
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
 public:
  Reader(std::span<const char> bytes, std::uint64_t base) : bytes_(bytes), base_(base) {}

  std::uint64_t offset() const { return base_ + pos_; }
  std::uint64_t remaining() const { return bytes_.size() - pos_; }

  void need(std::uint64_t n, const char* what) {
    if (remaining() < n) {
      throw ModelError("TruncatedFile",
                       fmt::format("file ends at byte {} while reading {} ({} bytes "
                                   "needed, {} left)",
                                   offset() + remaining(), what, n, remaining()),
                       offset());
    }
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32(const char* what) { return get_le<std::uint32_t>(what); }
  std::uint64_t u64(const char* what) { return get_le<std::uint64_t>(what); }
  std::int64_t i64(const char* what) {
    return static_cast<std::int64_t>(get_le<std::uint64_t>(what));
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

  std::string str(const char* what) {
    const std::uint32_t len = u32(what);
    need(len, what);
    std::string s(bytes_.data() + pos_, len);
    pos_ += len;
    return s;
  }

  void floats(std::span<float> dst, const char* what) {
    need(static_cast<std::uint64_t>(dst.size()) * 4, what);
    for (auto& v : dst) v = f32(what);
  }

 private:
  template <typename U>
  U get_le(const char* what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }

  std::span<const char> bytes_;
  std::uint64_t base_;
  std::size_t pos_ = 0;
};

void check_header(std::span<const char> head) {
  if (head.size() < 4 || std::memcmp(head.data(), kMagic, 4) != 0) {
    throw ModelError("BadMagic", "not a Skill Space model (magic mismatch at byte 0)", 0);
  }
  if (head.size() < 8) {
    throw ModelError("TruncatedFile", "file ends inside the header at byte " +
                                          std::to_string(head.size()),
                     head.size());
  }
  Reader r(head.subspan(4, 4), 4);
  const std::uint32_t version = r.u32("version");
  if (version != kFormatVersion) {
    throw ModelError("UnsupportedVersion",
                     fmt::format("format version {} at byte 4; this build reads {}",
                                 version, kFormatVersion),
                     4);
  }
}

}  // namespace

std::string serialize(const EmbeddingModel& m) {
  const auto& c = m.config;
  if (m.input.cols() != c.dim || m.tag.cols() != c.dim || m.output.cols() != c.dim ||
      m.input.rows() != m.vocab.size() || m.output.rows() != m.vocab.size() ||
      m.tag.rows() != m.tags.size() || m.token_languages.size() != m.vocab.size()) {
    throw ModelError("InconsistentModel", "matrix shapes do not match vocabulary/tags", 0);
  }
  Writer w;
  for (char ch : kMagic) w.u8(static_cast<std::uint8_t>(ch));
  w.u32(kFormatVersion);
  w.u32(c.dim);
  w.u32(c.negatives);
  w.u32(c.epochs);
  w.f32(c.alpha_start);
  w.f32(c.alpha_min);
  w.u32(c.window);
  w.u64(c.seed);
  w.f64(c.unigram_power);
  w.u32(c.threads);
  w.u64(c.min_count);
  w.f64(c.sample);
  w.u8(static_cast<std::uint8_t>((c.developer_tags ? 1 : 0) | (c.project_tags ? 2 : 0) |
                                 (c.language_tags ? 4 : 0)));
  w.i64(m.max_train_timestamp);

  w.u64(m.vocab.size());
  for (std::uint32_t i = 0; i < m.vocab.size(); ++i) {
    w.str(m.vocab.token(i));
    w.u64(m.vocab.count(i));
    w.u32(static_cast<std::uint32_t>(m.token_languages[i].size()));
    for (auto l : m.token_languages[i]) w.u32(l);
  }
  w.u64(m.tags.size());
  for (const auto& e : m.tags.entries()) {
    w.u8(static_cast<std::uint8_t>(e.kind));
    w.str(e.id);
    w.u64(e.count);
  }
  w.floats(m.input.data());
  w.floats(m.tag.data());
  w.floats(m.output.data());
  return w.take();
}

EmbeddingModel deserialize(std::span<const char> bytes) {
  check_header(bytes);
  Reader r(bytes.subspan(8), 8);

  EmbeddingModel m;
  auto& c = m.config;
  c.dim = r.u32("dim");
  if (c.dim == 0) throw ModelError("CorruptFile", "dim is zero at byte 8", 8);
  c.negatives = r.u32("config");
  c.epochs = r.u32("config");
  c.alpha_start = r.f32("config");
  c.alpha_min = r.f32("config");
  c.window = r.u32("config");
  c.seed = r.u64("config");
  c.unigram_power = r.f64("config");
  c.threads = r.u32("config");
  c.min_count = r.u64("config");
  c.sample = r.f64("config");
  const std::uint8_t flags = r.u8("config");
  c.developer_tags = flags & 1;
  c.project_tags = flags & 2;
  c.language_tags = flags & 4;
  m.max_train_timestamp = r.i64("max timestamp");

  const std::uint64_t n_vocab = r.u64("vocabulary size");
  // Each entry takes at least 16 bytes; refuse counts the file cannot hold.
  r.need(n_vocab * 16, "vocabulary block");
  std::vector<std::pair<std::string, std::uint64_t>> counts;
  counts.reserve(n_vocab);
  std::vector<std::string> file_order;
  std::vector<std::vector<std::uint32_t>> token_langs(n_vocab);
  for (std::uint64_t i = 0; i < n_vocab; ++i) {
    std::string token = r.str("token");
    const std::uint64_t n = r.u64("token count");
    file_order.push_back(token);
    counts.emplace_back(std::move(token), n);
    const std::uint32_t n_langs = r.u32("token languages");
    r.need(static_cast<std::uint64_t>(n_langs) * 4, "token languages");
    for (std::uint32_t k = 0; k < n_langs; ++k) token_langs[i].push_back(r.u32("language"));
  }

  const std::uint64_t n_tags = r.u64("tag count");
  r.need(n_tags * 13, "tag block");
  std::vector<TagSpace::Entry> entries;
  entries.reserve(n_tags);
  std::vector<std::string> tag_order;
  for (std::uint64_t i = 0; i < n_tags; ++i) {
    const auto at = r.offset();
    const std::uint8_t kind = r.u8("tag kind");
    if (kind > 2) {
      throw ModelError("CorruptFile", fmt::format("bad tag kind {} at byte {}", kind, at), at);
    }
    std::string id = r.str("tag id");
    tag_order.push_back(id);
    entries.push_back({static_cast<TagKind>(kind), std::move(id), r.u64("tag count")});
  }

  const std::uint64_t dim = c.dim;
  r.need((2 * n_vocab + n_tags) * dim * 4, "matrices");

  const auto vocab_at = r.offset();
  try {
    // Every persisted entry must survive, so the cut never exceeds the
    // smallest stored count.
    std::uint64_t floor = c.min_count;
    for (const auto& e : counts) floor = std::min(floor, e.second);
    m.vocab = Vocabulary::from_counts(std::move(counts), floor);
    m.tags = TagSpace(std::move(entries));
  } catch (const Error& e) {
    throw ModelError("CorruptFile", e.what(), vocab_at);
  }
  // from_counts sorts; a file in any other order was not written by save().
  for (std::uint32_t i = 0; i < n_vocab; ++i) {
    if (m.vocab.token(i) != file_order[i])
      throw ModelError("CorruptFile", "vocabulary is not in canonical order", vocab_at);
  }
  for (std::uint32_t i = 0; i < n_tags; ++i) {
    if (m.tags.entry(i).id != tag_order[i])
      throw ModelError("CorruptFile", "tags are not in canonical order", vocab_at);
  }
  for (auto& langs : token_langs)
    for (auto l : langs)
      if (l >= n_tags || m.tags.entry(l).kind != TagKind::kLanguage)
        throw ModelError("CorruptFile", "token language index out of range", vocab_at);
  m.token_languages = std::move(token_langs);

  m.input = Matrix<float>(n_vocab, dim);
  m.tag = Matrix<float>(n_tags, dim);
  m.output = Matrix<float>(n_vocab, dim);
  r.floats(m.input.data(), "input matrix");
  r.floats(m.tag.data(), "tag matrix");
  r.floats(m.output.data(), "output matrix");
  if (r.remaining() != 0) {
    throw ModelError("TrailingData",
                     fmt::format("{} unexpected bytes after byte {}", r.remaining(),
                                 r.offset()),
                     r.offset());
  }
  return m;
}

void save(const EmbeddingModel& model, const std::filesystem::path& path) {
  AtomicFile file(path);
  const std::string bytes = serialize(model);
  file.stream().write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  file.commit();
}

EmbeddingModel load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  char head[8];
  in.read(head, sizeof(head));
  check_header(std::span<const char>(head, static_cast<std::size_t>(in.gcount())));
  std::stringstream ss;
  ss.write(head, sizeof(head));
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  return deserialize(bytes);
}

// ---------------------------------------------------------------------------

std::string_view entity_prefix(EntityKind kind) {
  switch (kind) {
    case EntityKind::kApi: return "api";
    case EntityKind::kDeveloper: return "dev";
    case EntityKind::kProject: return "proj";
    case EntityKind::kLanguage: return "lang";
  }
  return "?";
}

std::optional<embed::TagKind> tag_kind_of(EntityKind kind) {
  switch (kind) {
    case EntityKind::kApi: return std::nullopt;
    case EntityKind::kDeveloper: return TagKind::kDeveloper;
    case EntityKind::kProject: return TagKind::kProject;
    case EntityKind::kLanguage: return TagKind::kLanguage;
  }
  return std::nullopt;
}

EntityKind entity_kind_of(embed::TagKind kind) {
  switch (kind) {
    case TagKind::kDeveloper: return EntityKind::kDeveloper;
    case TagKind::kProject: return EntityKind::kProject;
    case TagKind::kLanguage: return EntityKind::kLanguage;
  }
  return EntityKind::kApi;
}

EntityRef EntityRef::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon != std::string_view::npos) {
    const auto prefix = text.substr(0, colon);
    for (auto k : {EntityKind::kApi, EntityKind::kDeveloper, EntityKind::kProject,
                   EntityKind::kLanguage}) {
      if (prefix == entity_prefix(k)) return {k, std::string(text.substr(colon + 1))};
    }
  }
  return {EntityKind::kApi, std::string(text)};
}

std::string EntityRef::to_string() const {
  return std::string(entity_prefix(kind)) + ":" + id;
}

std::optional<std::span<const float>> vector(const EmbeddingModel& model,
                                             const EntityRef& ref) {
  if (ref.kind == EntityKind::kApi) {
    if (auto id = model.vocab.find(ref.id)) return model.input.row(*id);
    return std::nullopt;
  }
  if (auto idx = model.tags.find(*tag_kind_of(ref.kind), ref.id)) return model.tag.row(*idx);
  return std::nullopt;
}

std::string export_text(const EmbeddingModel& model, ExportWhich which) {
  const bool apis = which != ExportWhich::kTags;
  const bool tags = which != ExportWhich::kApi;
  const std::size_t rows = (apis ? model.vocab.size() : 0) + (tags ? model.tags.size() : 0);
  std::string out = fmt::format("{} {}\n", rows, model.dim());
  char buf[32];
  auto emit_row = [&](const std::string& id, std::span<const float> v) {
    out += id;
    for (float x : v) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
      out += ' ';
      out.append(buf, p);
    }
    out += '\n';
  };
  if (apis) {
    for (std::uint32_t i = 0; i < model.vocab.size(); ++i) {
      emit_row(which == ExportWhich::kAll ? "api:" + model.vocab.token(i)
                                          : model.vocab.token(i),
               model.input.row(i));
    }
  }
  if (tags) {
    for (std::uint32_t i = 0; i < model.tags.size(); ++i) {
      const auto& e = model.tags.entry(i);
      emit_row(std::string(embed::tag_kind_name(e.kind)) + ":" + e.id, model.tag.row(i));
    }
  }
  return out;
}

void export_text(const EmbeddingModel& model, const std::filesystem::path& path,
                 ExportWhich which) {
  write_file_atomic(path, export_text(model, which));
}

TextVectors parse_text_vectors(std::string_view text) {
  TextVectors tv;
  std::size_t line_no = 0;
  std::size_t expected_rows = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> parts;
    std::size_t s = 0;
    while (s < line.size()) {
      const auto e = line.find(' ', s);
      if (e != s) parts.push_back(line.substr(s, e - s));
      if (e == std::string_view::npos) break;
      s = e + 1;
    }
    auto bad = [&](const std::string& why) {
      throw Error("BadVectorFile", fmt::format("line {}: {}", line_no, why));
    };
    if (line_no == 1) {
      if (parts.size() != 2) bad("header must be '<rows> <dim>'");
      const auto r = std::from_chars(parts[0].data(), parts[0].data() + parts[0].size(),
                                     expected_rows);
      const auto d = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), tv.dim);
      if (r.ec != std::errc() || r.ptr != parts[0].data() + parts[0].size() ||
          d.ec != std::errc() || d.ptr != parts[1].data() + parts[1].size() || tv.dim == 0)
        bad("header must be '<rows> <dim>'");
      continue;
    }
    if (parts.size() != tv.dim + 1) bad("wrong number of values");
    std::vector<float> v(tv.dim);
    for (std::size_t j = 0; j < tv.dim; ++j) {
      auto [p, ec] = std::from_chars(parts[j + 1].data(),
                                     parts[j + 1].data() + parts[j + 1].size(), v[j]);
      if (ec != std::errc() || p != parts[j + 1].data() + parts[j + 1].size())
        bad("bad number");
    }
    tv.rows.emplace_back(std::string(parts[0]), std::move(v));
  }
  if (tv.rows.size() != expected_rows) {
    throw Error("BadVectorFile", fmt::format("header declares {} rows, found {}",
                                             expected_rows, tv.rows.size()));
  }
  return tv;
}

TextVectors read_text_vectors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text_vectors(ss.str());
}

}  // namespace skillspace::model
