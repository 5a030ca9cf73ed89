#pragma once

#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "skillspace/error.hpp"

namespace skillspace::extract {

class ExtractError : public Error {
 public:
  using Error::Error;
};

// Canonicalization switches applied by normalize_api.
struct CanonRules {
  bool split_list = false;      // "a, b as c" captures yield several operands
  bool drop_alias = false;      // keep only the first whitespace-separated word
  bool top_level = false;       // "numpy.linalg" -> "numpy"
  bool strip_wildcard = false;  // "java.util.*" -> "java.util"
  bool strip_version = false;   // "lodash@4" -> "lodash", ".../v2" -> "..."
};

struct ImportRule {
  std::string pattern;
  std::regex re;
  int group = 1;
};

// Multi-line import blocks such as Go's `import ( ... )`.
struct BlockRule {
  std::optional<std::regex> open;
  std::optional<std::regex> close;
  std::optional<ImportRule> item;
};

// One corpus language and the rule set that extracts its API tokens.
struct CorpusLanguage {
  std::string id;
  std::vector<std::string> extensions;  // lower case, leading dot
  std::vector<std::string> filenames;   // exact basenames (manifests)
  std::string line_comment;             // empty when the language has none
  std::vector<ImportRule> imports;
  BlockRule block;
  std::vector<std::string> manifest_keys;  // non-empty selects manifest mode
  CanonRules canon;

  bool is_manifest() const { return !manifest_keys.empty(); }
};

// Rule table for all corpus languages.
//
// Text format, one rule per line, TAB separated:
//
//   <language id> <kind> <pattern> <capture group>
//
// kinds: ext, file, comment, import, block-open, block-close, block-item,
// manifest, canon. The group column is only read for import and block-item
// rules and may be "-" elsewhere. Lines starting with '#' are comments.
class RuleSet {
 public:
  static const RuleSet& defaults();
  static RuleSet parse(std::string_view text);
  static RuleSet load(const std::filesystem::path& path);

  // Text of the embedded default table.
  static std::string_view default_table();

  const CorpusLanguage* find(std::string_view id) const;
  const std::vector<CorpusLanguage>& languages() const { return languages_; }

 private:
  CorpusLanguage& get_or_add(const std::string& id);

  std::vector<CorpusLanguage> languages_;
};

// Language whose extension table matches the final extension of `path`, or
// whose manifest basename equals the file name. nullptr when none.
const CorpusLanguage* detect_language(const RuleSet& rules,
                                      std::string_view path);

// Canonical token for a captured import operand. Throws ExtractError
// "EmptyToken" when nothing remains. Idempotent.
std::string normalize_api(std::string_view raw, const CorpusLanguage& lang);

// Deduplicated tokens in first-appearance order. Throws ExtractError
// "MalformedManifest" when a manifest cannot be parsed.
std::vector<std::string> extract_imports(const CorpusLanguage& lang,
                                         std::string_view content);

// Replaces invalid UTF-8 sequences with U+FFFD.
std::string decode_lossy_utf8(std::string_view bytes);

// Convenience: detect + read + extract. nullopt for unknown languages.
struct FileApis {
  std::string language;
  std::vector<std::string> apis;
};
std::optional<FileApis> extract_file(const RuleSet& rules,
                                     const std::filesystem::path& path);

}  // namespace skillspace::extract
