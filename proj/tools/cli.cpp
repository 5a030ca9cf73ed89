#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include "CLI11.hpp"

#include "skillspace/atomic_file.hpp"
#include "skillspace/corpus.hpp"
#include "skillspace/embed.hpp"
#include "skillspace/error.hpp"
#include "skillspace/eval.hpp"
#include "skillspace/extract.hpp"
#include "skillspace/model.hpp"
#include "skillspace/query.hpp"

namespace skillspace::cli {

namespace {

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error("UsageError", msg) {}
};

struct Output {
  std::string format = "text";
  std::string path;

  void add(CLI::App* app, const std::string& default_format = "text") {
    format = default_format;
    app->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"text", "csv"}));
    app->add_option("-o,--out", path, "Write the output here instead of stdout");
  }
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_file_atomic(path, text);
  }
}

void emit_table(const Table& t, const Output& o, std::ostream& out) {
  emit(o.format == "csv" ? t.to_csv() : t.to_text(), o.path, out);
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += v[i];
  }
  return s;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ','))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

std::optional<model::EntityKind> parse_kind_filter(const std::string& kind) {
  if (kind == "all") return std::nullopt;
  if (kind == "api") return model::EntityKind::kApi;
  if (kind == "dev") return model::EntityKind::kDeveloper;
  if (kind == "proj") return model::EntityKind::kProject;
  return model::EntityKind::kLanguage;
}

query::Aggregation parse_aggregation(const std::string& s) {
  return s == "centroid" ? query::Aggregation::kCentroid : query::Aggregation::kMeanOfCosines;
}

const extract::RuleSet& rules_for(const std::string& path, std::optional<extract::RuleSet>& own) {
  if (path.empty()) return extract::RuleSet::defaults();
  own = extract::RuleSet::load(path);
  return *own;
}

corpus::AliasMap alias_map(const std::string& path) {
  return path.empty() ? corpus::AliasMap{} : corpus::AliasMap::load(path);
}

// ---------------------------------------------------------------------------
// extract

struct ExtractArgs {
  std::vector<std::string> files;
  std::string rules;
  Output output;
};

void run_extract(const ExtractArgs& a, std::ostream& out, std::ostream& err) {
  std::optional<extract::RuleSet> own;
  const auto& rules = rules_for(a.rules, own);
  Table t({"path", "language", "apis"});
  std::size_t unknown = 0;
  for (const auto& f : a.files) {
    auto r = extract::extract_file(rules, f);
    if (!r) {
      ++unknown;
      continue;
    }
    t.add_row({f, r->language, join(r->apis, " ")});
  }
  if (unknown) err << fmt::format("skipped {} file(s) in unknown languages\n", unknown);
  emit_table(t, a.output, out);
}

// ---------------------------------------------------------------------------
// corpus

struct BuildArgs {
  std::string changes;
  std::string root = ".";
  std::string out;
  std::string rules;
  std::string dev_aliases;
  std::string proj_aliases;
};

// changes: TAB separated `project timestamp developer path`, one changed file
// per line; `path` names the blob content relative to --root.
void run_corpus_build(const BuildArgs& a, std::ostream&, std::ostream& err) {
  std::optional<extract::RuleSet> own;
  const auto& rules = rules_for(a.rules, own);
  const auto devs = alias_map(a.dev_aliases);
  const auto projs = alias_map(a.proj_aliases);

  std::ifstream in(a.changes, std::ios::binary);
  if (!in) throw IoError("cannot open " + a.changes);
  corpus::CorpusWriter writer(a.out);
  std::size_t line_no = 0, unknown = 0, empty = 0, malformed = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#' || line.rfind("project\t", 0) == 0) continue;
    std::vector<std::string> cols;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, '\t');) cols.push_back(c);
    if (cols.size() != 4)
      throw corpus::CorpusError("BadChangeLine",
                                fmt::format("{}:{}: expected 4 TAB-separated fields",
                                            a.changes, line_no),
                                line_no);
    std::int64_t ts = 0;
    auto [p, ec] = std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), ts);
    if (ec != std::errc() || p != cols[1].data() + cols[1].size() || ts < 0)
      throw corpus::CorpusError("BadTimestamp",
                                fmt::format("{}:{}: bad timestamp '{}'", a.changes, line_no,
                                            cols[1]),
                                line_no);
    std::optional<extract::FileApis> apis;
    try {
      apis = extract::extract_file(rules, std::filesystem::path(a.root) / cols[3]);
    } catch (const extract::ExtractError& e) {
      if (e.kind() != "MalformedManifest") throw;
      ++malformed;
      continue;
    }
    if (!apis) {
      ++unknown;
      continue;
    }
    if (apis->apis.empty()) {
      ++empty;
      continue;
    }
    corpus::DeltaRecord r{apis->language, cols[0], ts, cols[2], std::move(apis->apis)};
    corpus::apply_aliases(r, devs, projs);
    writer.write(r);
  }
  writer.commit();
  err << fmt::format(
      "wrote {} deltas; skipped {} unknown-language, {} without APIs, {} malformed manifests\n",
      writer.written(), unknown, empty, malformed);
}

struct StatsArgs {
  std::string corpus;
  std::size_t threshold = 30;
  Output output;
};

void run_corpus_stats(const StatsArgs& a, std::ostream& out, std::ostream&) {
  corpus::StatsAccumulator acc(a.threshold);
  corpus::for_each_record(a.corpus, [&](corpus::DeltaRecord&& r) { acc.add(r); });
  emit_table(acc.finish().to_table(), a.output, out);
}

struct SplitArgs {
  std::string corpus;
  std::int64_t cutoff = eval::kFutureActivityCutoff;
  std::string train;
  std::string test;
};

void run_corpus_split(const SplitArgs& a, std::ostream&, std::ostream& err) {
  corpus::CorpusWriter train(a.train);
  corpus::CorpusWriter test(a.test);
  corpus::for_each_record(a.corpus, [&](corpus::DeltaRecord&& r) {
    (r.timestamp < a.cutoff ? train : test).write(r);
  });
  train.commit();
  test.commit();
  err << fmt::format("train {} deltas, test {} deltas\n", train.written(), test.written());
}

struct FilterArgs {
  std::string corpus;
  std::string out;
  corpus::FilterConfig cfg;
  std::string oversize = "drop";
  std::string dev_aliases;
  std::string proj_aliases;
  std::size_t sample_projects = 0;
  std::uint64_t seed = 1;
  Output output;
};

void run_corpus_filter(FilterArgs a, std::ostream& out, std::ostream&) {
  a.cfg.oversize =
      a.oversize == "truncate" ? corpus::OversizePolicy::kTruncate : corpus::OversizePolicy::kDrop;
  a.cfg.validate();
  auto records = corpus::read_corpus(a.corpus);
  corpus::apply_aliases(records, alias_map(a.dev_aliases), alias_map(a.proj_aliases));
  if (a.sample_projects > 0)
    records = corpus::sample_projects(std::move(records), a.sample_projects, a.seed);
  auto result = corpus::filter_corpus(std::move(records), a.cfg);
  corpus::write_corpus(result.records, a.out);
  emit_table(result.report.to_table(), a.output, out);
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string corpus;
  std::string out;
  embed::TrainConfig cfg;
  bool no_dev = false, no_proj = false, no_lang = false;
  Output output;
};

void run_train(TrainArgs a, std::ostream& out, std::ostream&) {
  a.cfg.developer_tags = !a.no_dev;
  a.cfg.project_tags = !a.no_proj;
  a.cfg.language_tags = !a.no_lang;
  a.cfg.validate();
  const auto records = corpus::read_corpus(a.corpus);
  auto result = embed::train(records, a.cfg);
  model::save(result.model, a.out);
  emit_table(result.report.to_table(), a.output, out);
}

// ---------------------------------------------------------------------------
// query

struct SimilarArgs {
  std::string model;
  std::string api;
  std::string entity;
  std::size_t top = 10;
  std::string kind = "api";
  std::string language;
  Output output;
};

query::CandidateFilter candidate_filter(const std::string& kind, const std::string& language) {
  query::CandidateFilter f;
  f.kind = parse_kind_filter(kind);
  if (!language.empty()) f.language = language;
  return f;
}

void run_similar(const SimilarArgs& a, std::ostream& out, std::ostream&) {
  if (a.api.empty() == a.entity.empty()) throw UsageError("give exactly one of --api or --entity");
  const auto m = model::load(a.model);
  const auto seed = a.api.empty() ? model::EntityRef::parse(a.entity)
                                  : model::EntityRef{model::EntityKind::kApi, a.api};
  const auto hits = query::most_similar(m, seed, a.top, candidate_filter(a.kind, a.language));
  emit_table(query::neighbors_table(hits), a.output, out);
}

struct AnalogyArgs {
  std::string model;
  std::string expr;
  std::size_t top = 10;
  std::string kind = "api";
  std::string language;
  Output output;
};

void run_analogy(const AnalogyArgs& a, std::ostream& out, std::ostream&) {
  const auto m = model::load(a.model);
  const auto terms = query::parse_expression(a.expr);
  const auto hits = query::analogy(m, terms, a.top, candidate_filter(a.kind, a.language));
  emit_table(query::neighbors_table(hits), a.output, out);
}

struct AlignArgs {
  std::string model;
  std::string entity;
  std::string apis;
  std::string with;
  std::string aggregation = "mean";
  Output output;
};

void run_align(const AlignArgs& a, std::ostream& out, std::ostream&) {
  if (a.apis.empty() == a.with.empty()) throw UsageError("give exactly one of --apis or --with");
  const auto m = model::load(a.model);
  const auto ref = model::EntityRef::parse(a.entity);
  Table t({"entity", "target", "aggregation", "alignment", "items", "skipped"});
  if (!a.with.empty()) {
    const auto other = model::EntityRef::parse(a.with);
    t.add_row({ref.to_string(), other.to_string(), "pair",
               format_double(query::align_pair(m, ref, other)), "1", "0"});
  } else {
    const auto apis = split_commas(a.apis);
    const auto s = query::align_to_apis(m, ref, apis, parse_aggregation(a.aggregation));
    t.add_row({ref.to_string(), join(apis, " "), a.aggregation, format_double(s.value),
               std::to_string(s.n_items), std::to_string(s.n_skipped)});
  }
  emit_table(t, a.output, out);
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string hypothesis;
  std::string model;
  std::string train;
  std::string test;
  std::string prs;
  std::string survey;
  std::int64_t cutoff = eval::kFutureActivityCutoff;
  std::uint64_t seed = 7;
  std::size_t n_random = 1;
  std::size_t controls = 10;
  std::string granularity;
  std::string aggregation = "mean";
  Output output;
};

void run_eval(const EvalArgs& a, std::ostream& out, std::ostream&) {
  eval::EvalConfig cfg;
  const bool period = a.hypothesis == "h1" || a.hypothesis == "h2" || a.hypothesis == "h3";
  cfg.cutoff = a.cutoff;
  cfg.seed = a.seed;
  cfg.n_random = a.n_random;
  cfg.survey_controls = a.controls;
  cfg.aggregation = parse_aggregation(a.aggregation);
  cfg.per_language = a.granularity == "per-language";
  cfg.validate();

  const auto m = model::load(a.model);
  std::string csv, text;
  if (period) {
    if (a.train.empty() || a.test.empty()) throw UsageError("--train and --test are required");
    const auto train = corpus::read_corpus(a.train);
    const auto test = corpus::read_corpus(a.test);
    const auto report = a.hypothesis == "h1"   ? eval::eval_new_apis(m, train, test, cfg)
                        : a.hypothesis == "h2" ? eval::eval_new_projects(m, train, test, cfg)
                                               : eval::eval_new_contributors(m, train, test, cfg);
    csv = report.to_csv();
    text = report.to_text();
  } else if (a.hypothesis == "h4") {
    if (a.prs.empty()) throw UsageError("--prs is required");
    const auto report = eval::eval_pr_acceptance(m, eval::read_pr_csv(a.prs), cfg);
    csv = report.to_csv();
    text = report.to_text();
  } else {
    if (a.survey.empty()) throw UsageError("--survey is required");
    const auto report = eval::eval_self_reported(m, eval::read_survey_csv(a.survey), cfg);
    csv = report.to_csv();
    text = report.to_text();
  }
  emit(a.output.format == "csv" ? csv : text, a.output.path, out);
}

// ---------------------------------------------------------------------------
// export

struct ExportArgs {
  std::string model;
  std::string out;
  std::string which = "all";
};

void run_export(const ExportArgs& a, std::ostream&, std::ostream&) {
  const auto which = a.which == "api"    ? model::ExportWhich::kApi
                     : a.which == "tags" ? model::ExportWhich::kTags
                                         : model::ExportWhich::kAll;
  model::export_text(model::load(a.model), a.out, which);
}

// ---------------------------------------------------------------------------

std::string resolved_config(CLI::App* leaf) {
  std::string path;
  for (auto* p = leaf; p != nullptr; p = p->get_parent())
    if (p->get_parent() != nullptr) path = p->get_name() + (path.empty() ? "" : " " + path);
  std::string out = "# skillspace " + path + "\n";
  std::istringstream in(leaf->config_to_str(true, false));
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line.front() != '[') out += "#   " + line + "\n";
  return out;
}

CLI::App* leaf_of(CLI::App& app) {
  CLI::App* cur = &app;
  while (true) {
    auto subs = cur->get_subcommands();
    if (subs.empty()) return cur;
    cur = subs.front();
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Skill Space: API, developer and project embeddings from code changes",
               "skillspace"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::function<void()> action;

  // extract
  ExtractArgs ex;
  auto* c_extract = app.add_subcommand("extract", "Extract API tokens from source files");
  c_extract->add_option("files", ex.files, "Files to scan")->required();
  c_extract->add_option("--rules", ex.rules, "Rule table (default: built-in)");
  ex.output.add(c_extract);
  c_extract->callback([&] { action = [&] { run_extract(ex, out, err); }; });

  // corpus
  auto* c_corpus = app.add_subcommand("corpus", "Build, inspect, split and filter delta corpora");
  c_corpus->require_subcommand(1);

  BuildArgs build;
  auto* c_build = c_corpus->add_subcommand("build", "Turn a change list into a delta corpus");
  c_build->add_option("--changes", build.changes, "TSV: project, timestamp, developer, path")
      ->required();
  c_build->add_option("--root", build.root, "Directory the change paths are relative to");
  c_build->add_option("--out", build.out, "Output corpus (.gz for gzip)")->required();
  c_build->add_option("--rules", build.rules, "Rule table (default: built-in)");
  c_build->add_option("--dev-aliases", build.dev_aliases, "Developer alias map (TSV)");
  c_build->add_option("--proj-aliases", build.proj_aliases, "Project alias map (TSV)");
  c_build->callback([&] { action = [&] { run_corpus_build(build, out, err); }; });

  StatsArgs st;
  auto* c_stats = c_corpus->add_subcommand("stats", "Per-language corpus statistics");
  c_stats->add_option("--corpus", st.corpus, "Input corpus")->required();
  c_stats->add_option("--small-threshold", st.threshold, "API count for the small-delta share");
  st.output.add(c_stats);
  c_stats->callback([&] { action = [&] { run_corpus_stats(st, out, err); }; });

  SplitArgs sp;
  auto* c_split = c_corpus->add_subcommand("split", "Split a corpus at a cutoff timestamp");
  c_split->add_option("--corpus", sp.corpus, "Input corpus")->required();
  c_split->add_option("--cutoff", sp.cutoff, "Unix seconds; train < cutoff <= test");
  c_split->add_option("--train", sp.train, "Training output")->required();
  c_split->add_option("--test", sp.test, "Test output")->required();
  c_split->callback([&] { action = [&] { run_corpus_split(sp, out, err); }; });

  FilterArgs fl;
  auto* c_filter = c_corpus->add_subcommand("filter", "Apply aliases and corpus filters");
  c_filter->add_option("--corpus", fl.corpus, "Input corpus")->required();
  c_filter->add_option("--out", fl.out, "Filtered corpus")->required();
  c_filter->add_option("--min-commits", fl.cfg.min_commits, "Minimum deltas per developer");
  c_filter->add_option("--max-commits", fl.cfg.max_commits, "Maximum deltas per developer");
  c_filter->add_option("--max-apis", fl.cfg.max_apis_per_delta, "Largest delta kept");
  c_filter->add_option("--oversize", fl.oversize, "Oversized deltas")
      ->check(CLI::IsMember({"drop", "truncate"}));
  c_filter->add_option("--dev-aliases", fl.dev_aliases, "Developer alias map (TSV)");
  c_filter->add_option("--proj-aliases", fl.proj_aliases, "Project alias map (TSV)");
  c_filter->add_option("--sample-projects", fl.sample_projects, "Keep N random projects (0: all)");
  c_filter->add_option("--seed", fl.seed, "Project sampling seed");
  c_filter->add_option("--format", fl.output.format, "Report format")
      ->check(CLI::IsMember({"text", "csv"}));
  c_filter->callback([&] { action = [&] { run_corpus_filter(fl, out, err); }; });

  // train
  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a Skill Space model");
  c_train->add_option("--corpus", tr.corpus, "Training corpus")->required();
  c_train->add_option("--out", tr.out, "Model file")->required();
  c_train->add_option("--dim", tr.cfg.dim, "Vector dimension");
  c_train->add_option("--negative", tr.cfg.negatives, "Negative samples per target");
  c_train->add_option("--epochs", tr.cfg.epochs, "Passes over the corpus");
  c_train->add_option("--alpha", tr.cfg.alpha_start, "Initial learning rate");
  c_train->add_option("--min-alpha", tr.cfg.alpha_min, "Final learning rate");
  c_train->add_option("--window", tr.cfg.window, "Context window");
  c_train->add_option("--min-count", tr.cfg.min_count, "Minimum delta count per API");
  c_train->add_option("--sample", tr.cfg.sample, "Frequent-API subsampling threshold");
  c_train->add_option("--power", tr.cfg.unigram_power, "Noise distribution exponent");
  c_train->add_option("--seed", tr.cfg.seed, "Random seed");
  c_train->add_option("--threads", tr.cfg.threads, "Worker threads (1 is deterministic)");
  c_train->add_flag("--no-dev-tags", tr.no_dev, "Do not learn developer vectors");
  c_train->add_flag("--no-proj-tags", tr.no_proj, "Do not learn project vectors");
  c_train->add_flag("--no-lang-tags", tr.no_lang, "Do not learn language vectors");
  c_train->add_option("--format", tr.output.format, "Report format")
      ->check(CLI::IsMember({"text", "csv"}));
  c_train->callback([&] { action = [&] { run_train(tr, out, err); }; });

  // query
  auto* c_query = app.add_subcommand("query", "Nearest neighbors, analogies and alignment");
  c_query->require_subcommand(1);
  const std::vector<std::string> kinds = {"api", "dev", "proj", "lang", "all"};

  SimilarArgs sim;
  auto* c_sim = c_query->add_subcommand("similar", "Most similar entities");
  c_sim->add_option("--model", sim.model, "Model file")->required();
  c_sim->add_option("--api", sim.api, "Seed API");
  c_sim->add_option("--entity", sim.entity, "Seed entity, e.g. dev:alice");
  c_sim->add_option("--top", sim.top, "Number of neighbors");
  c_sim->add_option("--kind", sim.kind, "Candidate kind")->check(CLI::IsMember(kinds));
  c_sim->add_option("--language", sim.language, "Only APIs seen in this corpus language");
  sim.output.add(c_sim);
  c_sim->callback([&] { action = [&] { run_similar(sim, out, err); }; });

  AnalogyArgs an;
  auto* c_an = c_query->add_subcommand("analogy", "Neighbors of a signed vector sum");
  c_an->add_option("--model", an.model, "Model file")->required();
  c_an->add_option("--expr", an.expr, "e.g. \"-lang:PY +lang:R +api:pandas\"")->required();
  c_an->add_option("--top", an.top, "Number of neighbors");
  c_an->add_option("--kind", an.kind, "Candidate kind")->check(CLI::IsMember(kinds));
  c_an->add_option("--language", an.language, "Only APIs seen in this corpus language");
  an.output.add(c_an);
  c_an->callback([&] { action = [&] { run_analogy(an, out, err); }; });

  AlignArgs al;
  auto* c_al = c_query->add_subcommand("align", "Alignment of an entity to APIs or another entity");
  c_al->add_option("--model", al.model, "Model file")->required();
  c_al->add_option("--entity", al.entity, "Entity, e.g. dev:alice")->required();
  c_al->add_option("--apis", al.apis, "Comma-separated API list");
  c_al->add_option("--with", al.with, "Second entity");
  c_al->add_option("--aggregation", al.aggregation, "How to aggregate over --apis")
      ->check(CLI::IsMember({"mean", "centroid"}));
  al.output.add(c_al);
  c_al->callback([&] { action = [&] { run_align(al, out, err); }; });

  // eval
  auto* c_eval = app.add_subcommand("eval", "Run an evaluation (h1..h5)");
  c_eval->require_subcommand(1);
  const std::vector<std::pair<const char*, const char*>> hyps = {
      {"h1", "Alignment with APIs first used after the cutoff"},
      {"h2", "Alignment with projects joined after the cutoff"},
      {"h3", "Alignment of projects with their new contributors"},
      {"h4", "Pull-request acceptance regression"},
      {"h5", "Self-reported expertise regressions"}};
  std::vector<EvalArgs> evs(hyps.size());
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    auto& ev = evs[i];
    const std::string h = hyps[i].first;
    ev.hypothesis = h;
    const bool period = h == "h1" || h == "h2" || h == "h3";
    ev.cutoff = period ? eval::kFutureActivityCutoff : eval::kPrSurveyCutoff;
    ev.granularity = h == "h1" ? "per-language" : "pooled";
    auto* c = c_eval->add_subcommand(h, hyps[i].second);
    c->add_option("--model", ev.model, "Model file")->required();
    if (period) {
      c->add_option("--train", ev.train, "Training-period corpus")->required();
      c->add_option("--test", ev.test, "Test-period corpus")->required();
      c->add_option("--n-random", ev.n_random, "Control draws per factual item");
      c->add_option("--granularity", ev.granularity, "Per-language or pooled t-tests")
          ->check(CLI::IsMember({"per-language", "pooled"}));
      if (h == "h1")
        c->add_option("--aggregation", ev.aggregation, "Alignment to an API set")
            ->check(CLI::IsMember({"mean", "centroid"}));
    } else if (h == "h4") {
      c->add_option("--prs", ev.prs, "Pull-request CSV")->required();
    } else {
      c->add_option("--survey", ev.survey, "Survey CSV")->required();
      c->add_option("--controls", ev.controls, "Random control APIs per respondent");
    }
    c->add_option("--cutoff", ev.cutoff, "Unix seconds; the model must predate it");
    c->add_option("--seed", ev.seed, "Control sampling seed");
    ev.output.add(c, "csv");
    c->callback([&] { action = [&] { run_eval(ev, out, err); }; });
  }

  // export
  ExportArgs exp;
  auto* c_export = app.add_subcommand("export", "Write vectors in word2vec text format");
  c_export->add_option("--model", exp.model, "Model file")->required();
  c_export->add_option("--out", exp.out, "Output text file")->required();
  c_export->add_option("--which", exp.which, "Rows to export")
      ->check(CLI::IsMember({"api", "tags", "all"}));
  c_export->callback([&] { action = [&] { run_export(exp, out, err); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: UsageError: " << e.what() << "\n";
    return kExitUsage;
  }

  err << resolved_config(leaf_of(app));
  try {
    action();
  } catch (const UsageError& e) {
    err << "error: UsageError: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return kExitModuleError;
  } catch (const std::exception& e) {
    err << "error: InternalError: " << e.what() << "\n";
    return kExitModuleError;
  }
  return kExitOk;
}

}  // namespace skillspace::cli
