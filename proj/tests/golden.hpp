#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "skillspace/extract.hpp"
#include "support.hpp"

namespace skillspace::testing {

struct GoldenOutcome {
  std::size_t files = 0;
  std::map<std::string, std::size_t> per_language;
  std::vector<std::string> failures;
};

// Every `<file>.expected` under fixtures/extract describes `<file>`:
//   language=<id or none>
//   then either error=<kind> or one expected token per line.
inline GoldenOutcome run_golden_suite() {
  namespace fs = std::filesystem;
  GoldenOutcome out;
  std::vector<fs::path> cases;
  for (const auto& e : fs::recursive_directory_iterator(fixture("extract")))
    if (e.is_regular_file() && e.path().extension() == ".expected") cases.push_back(e.path());
  std::sort(cases.begin(), cases.end());

  const auto& rules = extract::RuleSet::defaults();
  for (const auto& exp_path : cases) {
    fs::path source = exp_path;
    source.replace_extension();
    std::vector<std::string> want;
    std::istringstream in(slurp(exp_path));
    for (std::string line; std::getline(in, line);) want.push_back(line);

    std::vector<std::string> got;
    const auto* lang = extract::detect_language(rules, source.filename().string());
    got.push_back("language=" + (lang ? lang->id : std::string("none")));
    if (lang) {
      try {
        for (auto& t : extract::extract_imports(*lang, slurp(source))) got.push_back(t);
      } catch (const extract::ExtractError& e) {
        got.push_back("error=" + e.kind());
      }
      ++out.per_language[lang->id];
    }
    ++out.files;
    if (got != want) {
      std::string msg = fs::relative(source, fixture("extract")).string() + ": got [";
      for (std::size_t i = 0; i < got.size(); ++i) msg += (i ? ", " : "") + got[i];
      out.failures.push_back(msg + "]");
    }
  }
  return out;
}

}  // namespace skillspace::testing
