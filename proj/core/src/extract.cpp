#include "skillspace/extract.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include "json.hpp"

#include "default_rules.inc"

namespace skillspace::extract {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
         c == '\f';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : s) {
    if (is_space(c)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

// One canonicalization pass; normalize_api iterates it to a fixed point.
std::string canon_pass(std::string_view in, const CanonRules& canon) {
  std::string_view s = trim(in);
  while (s.size() >= 2) {
    const char a = s.front();
    const char b = s.back();
    if ((a == '"' && b == '"') || (a == '\'' && b == '\'') ||
        (a == '<' && b == '>') || (a == '`' && b == '`')) {
      s = trim(s.substr(1, s.size() - 2));
    } else {
      break;
    }
  }
  std::string out(s);
  if (canon.drop_alias) {
    const auto ws = std::find_if(out.begin(), out.end(), is_space);
    out.erase(ws, out.end());
  }
  if (canon.strip_wildcard) {
    for (std::string_view suffix : {".*", "::*", "/*"}) {
      if (out.size() >= suffix.size() && out.ends_with(suffix)) {
        out.resize(out.size() - suffix.size());
        break;
      }
    }
  }
  if (canon.strip_version) {
    const auto at = out.rfind('@');
    if (at != std::string::npos && at > 0) out.resize(at);
    const auto slash = out.rfind('/');
    if (slash != std::string::npos && slash + 2 < out.size() &&
        out[slash + 1] == 'v' &&
        std::all_of(out.begin() + static_cast<long>(slash) + 2, out.end(),
                    [](unsigned char c) { return std::isdigit(c); })) {
      out.resize(slash);
    }
  }
  if (canon.top_level) {
    const auto dot = out.find('.');
    if (dot != std::string::npos) out.resize(dot);
  }
  for (char& c : out) {
    if (c == ';' || static_cast<unsigned char>(c) < 0x20) c = '_';
  }
  return std::string(trim(out));
}

// Cuts a trailing line comment, ignoring comment markers inside quotes.
std::string_view strip_line_comment(std::string_view line,
                                    std::string_view marker) {
  if (marker.empty()) return line;
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
      continue;
    }
    if (line.substr(i, marker.size()) == marker) return line.substr(0, i);
  }
  return line;
}

class TokenSink {
 public:
  explicit TokenSink(const CorpusLanguage& lang) : lang_(lang) {}

  void add_capture(std::string_view capture) {
    if (lang_.canon.split_list) {
      for (const auto& part : split_on(capture, ',')) add_one(part);
    } else {
      add_one(capture);
    }
  }

  void add_one(std::string_view raw) {
    std::string token;
    try {
      token = normalize_api(raw, lang_);
    } catch (const ExtractError&) {
      return;  // EmptyToken: nothing usable in this operand
    }
    if (seen_.insert(token).second) tokens_.push_back(std::move(token));
  }

  std::vector<std::string> take() { return std::move(tokens_); }

 private:
  const CorpusLanguage& lang_;
  std::unordered_set<std::string> seen_;
  std::vector<std::string> tokens_;
};

void apply_rule(const ImportRule& rule, const std::string& line,
                TokenSink& sink) {
  std::smatch m;
  if (std::regex_search(line, m, rule.re) &&
      static_cast<std::size_t>(rule.group) < m.size() &&
      m[rule.group].matched) {
    sink.add_capture(m[rule.group].str());
  }
}

std::vector<std::string> extract_manifest(const CorpusLanguage& lang,
                                          std::string_view content) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw ExtractError("MalformedManifest", e.what());
  }
  if (!doc.is_object()) {
    throw ExtractError("MalformedManifest", "manifest root is not an object");
  }
  TokenSink sink(lang);
  for (const auto& key : lang.manifest_keys) {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) continue;
    if (!it->is_object()) {
      throw ExtractError("MalformedManifest",
                         "manifest field '" + key + "' is not an object");
    }
    for (const auto& item : it->items()) sink.add_one(item.key());
  }
  return sink.take();
}

ImportRule make_import_rule(const std::string& pattern, int group,
                            std::size_t line_no) {
  ImportRule rule;
  rule.pattern = pattern;
  rule.group = group;
  try {
    rule.re = std::regex(pattern, std::regex::ECMAScript | std::regex::optimize);
  } catch (const std::regex_error& e) {
    throw ExtractError("BadRuleLine", fmt::format("rule line {}: bad pattern: {}",
                                                  line_no, e.what()));
  }
  if (group < 0 || static_cast<unsigned>(group) > rule.re.mark_count()) {
    throw ExtractError("BadRuleLine",
                       fmt::format("rule line {}: capture group {} out of range",
                                   line_no, group));
  }
  return rule;
}

}  // namespace

std::string_view RuleSet::default_table() { return kDefaultRules; }

const RuleSet& RuleSet::defaults() {
  static const RuleSet rules = parse(kDefaultRules);
  return rules;
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open rule table " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

CorpusLanguage& RuleSet::get_or_add(const std::string& id) {
  for (auto& lang : languages_)
    if (lang.id == id) return lang;
  CorpusLanguage lang;
  lang.id = id;
  languages_.push_back(std::move(lang));
  return languages_.back();
}

RuleSet RuleSet::parse(std::string_view text) {
  RuleSet set;
  std::size_t line_no = 0;
  for (const auto& raw_line : split_on(text, '\n')) {
    ++line_no;
    std::string_view line = raw_line;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    const auto cols = split_on(line, '\t');
    if (cols.size() != 4) {
      throw ExtractError("BadRuleLine",
                         fmt::format("rule line {}: expected 4 TAB-separated "
                                     "columns, got {}",
                                     line_no, cols.size()));
    }
    const std::string& id = cols[0];
    const std::string& kind = cols[1];
    const std::string& pattern = cols[2];
    if (id.empty() || id.find(';') != std::string::npos) {
      throw ExtractError("BadRuleLine",
                         fmt::format("rule line {}: bad language id", line_no));
    }
    auto parse_group = [&]() {
      int g = 0;
      auto [p, ec] = std::from_chars(cols[3].data(),
                                     cols[3].data() + cols[3].size(), g);
      if (ec != std::errc() || p != cols[3].data() + cols[3].size()) {
        throw ExtractError("BadRuleLine",
                           fmt::format("rule line {}: bad group '{}'", line_no,
                                       cols[3]));
      }
      return g;
    };

    CorpusLanguage& lang = set.get_or_add(id);
    if (kind == "ext") {
      for (auto& e : split_words(pattern)) lang.extensions.push_back(to_lower(e));
    } else if (kind == "file") {
      for (auto& f : split_words(pattern)) lang.filenames.push_back(f);
    } else if (kind == "comment") {
      lang.line_comment = pattern;
    } else if (kind == "import") {
      lang.imports.push_back(make_import_rule(pattern, parse_group(), line_no));
    } else if (kind == "block-open" || kind == "block-close") {
      auto rule = make_import_rule(pattern, 0, line_no);
      (kind == "block-open" ? lang.block.open : lang.block.close) = rule.re;
    } else if (kind == "block-item") {
      lang.block.item = make_import_rule(pattern, parse_group(), line_no);
    } else if (kind == "manifest") {
      for (auto& k : split_on(pattern, ','))
        if (!trim(k).empty()) lang.manifest_keys.emplace_back(trim(k));
    } else if (kind == "canon") {
      if (pattern == "split-list") lang.canon.split_list = true;
      else if (pattern == "drop-alias") lang.canon.drop_alias = true;
      else if (pattern == "top-level") lang.canon.top_level = true;
      else if (pattern == "strip-wildcard") lang.canon.strip_wildcard = true;
      else if (pattern == "strip-version") lang.canon.strip_version = true;
      else
        throw ExtractError("BadRuleLine",
                           fmt::format("rule line {}: unknown canon option '{}'",
                                       line_no, pattern));
    } else {
      throw ExtractError("BadRuleLine", fmt::format("rule line {}: unknown kind '{}'",
                                                    line_no, kind));
    }
  }
  for (const auto& lang : set.languages_) {
    const bool has_block = lang.block.open || lang.block.close || lang.block.item;
    if (has_block && !(lang.block.open && lang.block.close && lang.block.item)) {
      throw ExtractError("BadRuleLine",
                         "language " + lang.id +
                             ": block rules need open, close and item");
    }
    if (lang.imports.empty() && !lang.is_manifest()) {
      throw ExtractError("BadRuleLine",
                         "language " + lang.id + " has no import or manifest rule");
    }
  }
  return set;
}

const CorpusLanguage* RuleSet::find(std::string_view id) const {
  for (const auto& lang : languages_)
    if (lang.id == id) return &lang;
  return nullptr;
}

const CorpusLanguage* detect_language(const RuleSet& rules,
                                      std::string_view path) {
  const auto slash = path.find_last_of("/\\");
  const std::string_view base =
      slash == std::string_view::npos ? path : path.substr(slash + 1);
  for (const auto& lang : rules.languages())
    for (const auto& name : lang.filenames)
      if (base == name) return &lang;
  const auto dot = base.rfind('.');
  if (dot == std::string_view::npos || dot == 0) return nullptr;
  const std::string ext = to_lower(base.substr(dot));
  for (const auto& lang : rules.languages())
    for (const auto& e : lang.extensions)
      if (e == ext) return &lang;
  return nullptr;
}

std::string normalize_api(std::string_view raw, const CorpusLanguage& lang) {
  std::string cur(raw);
  while (true) {
    std::string next = canon_pass(cur, lang.canon);
    if (next == cur) break;
    cur = std::move(next);
  }
  if (cur.empty()) {
    throw ExtractError("EmptyToken",
                       "operand '" + std::string(raw) + "' normalizes to nothing");
  }
  return cur;
}

std::vector<std::string> extract_imports(const CorpusLanguage& lang,
                                         std::string_view content) {
  const std::string text = decode_lossy_utf8(content);
  if (lang.is_manifest()) return extract_manifest(lang, text);

  TokenSink sink(lang);
  bool in_block = false;
  for (const auto& raw_line : split_on(text, '\n')) {
    std::string line(strip_line_comment(raw_line, lang.line_comment));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (in_block) {
      if (std::regex_search(line, *lang.block.close)) {
        in_block = false;
      } else {
        apply_rule(*lang.block.item, line, sink);
      }
      continue;
    }
    if (lang.block.open && std::regex_search(line, *lang.block.open)) {
      in_block = true;
      continue;
    }
    for (const auto& rule : lang.imports) apply_rule(rule, line, sink);
  }
  return sink.take();
}

std::string decode_lossy_utf8(std::string_view bytes) {
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(bytes[k]); };
  while (i < n) {
    const unsigned char c = byte(i);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      out += static_cast<char>(c);
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    }
    bool ok = len != 0 && i + len <= n;
    for (std::size_t k = 1; ok && k < len; ++k) {
      const unsigned char cc = byte(i + k);
      if ((cc & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (cc & 0x3F);
      }
    }
    if (ok) {
      // Reject overlong forms, surrogates and out-of-range code points.
      static constexpr std::uint32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
      ok = cp >= kMin[len] && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
    }
    if (ok) {
      out.append(bytes.substr(i, len));
      i += len;
    } else {
      out += kReplacement;
      ++i;
    }
  }
  return out;
}

std::optional<FileApis> extract_file(const RuleSet& rules,
                                     const std::filesystem::path& path) {
  const CorpusLanguage* lang = detect_language(rules, path.generic_string());
  if (!lang) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return FileApis{lang->id, extract_imports(*lang, ss.str())};
}

}  // namespace skillspace::extract
