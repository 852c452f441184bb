#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "gbtx/adversarial.h"
#include "gbtx/axp.h"
#include "gbtx/class_explanation.h"
#include "gbtx/cli.h"
#include "gbtx/dataset.h"
#include "gbtx/encoder.h"
#include "gbtx/error.h"
#include "gbtx/metrics.h"
#include "gbtx/model.h"

namespace gbtx::cli {

void RunConfig::Validate() const {
  if (scale_exponent < 0 || scale_exponent > 12) throw UsageError("--scale must be in [0, 12]");
  if (!(alpha > 0.0 && alpha < 0.5)) throw UsageError("--alpha must be in (0, 0.5)");
  if (!(tau >= 0.0 && tau <= 1.0)) throw UsageError("--tau must be in [0, 1]");
  if (!(rbo_p > 0.0 && rbo_p < 1.0)) throw UsageError("--rbo-p must be in (0, 1)");
  if (!(min_frequency >= 0.0 && min_frequency <= 1.0))
    throw UsageError("--min-frequency must be in [0, 1]");
  if (jobs < 1) throw UsageError("--jobs must be >= 1");
  if (format != "auto" && format != "lightgbm" && format != "json")
    throw UsageError("--format must be lightgbm or json");
  ParseOrderPolicy(order);
  ParseIntervalMethod(interval);
  ParseAttackMode(attack);
}

std::int64_t RunConfig::scale() const {
  std::int64_t s = 1;
  for (int i = 0; i < scale_exponent; ++i) s *= 10;
  return s;
}

std::vector<std::size_t> SelectInstances(const std::string& selector, std::size_t rows) {
  std::vector<std::size_t> out;
  if (selector == "all") {
    for (std::size_t i = 0; i < rows; ++i) out.push_back(i);
    return out;
  }
  std::stringstream ss(selector);
  std::string item;
  auto parse_index = [&](const std::string& s) -> std::size_t {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      throw UsageError("invalid instance selector '" + selector + "'");
    }
    if (pos != s.size() || s.empty() || s[0] == '-')
      throw UsageError("invalid instance selector '" + selector + "'");
    if (v >= rows)
      throw UsageError("instance " + s + " out of range (dataset has " + std::to_string(rows) +
                       " rows)");
    return static_cast<std::size_t>(v);
  };
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(parse_index(item));
    } else {
      const std::size_t lo = parse_index(item.substr(0, dash));
      const std::size_t hi = parse_index(item.substr(dash + 1));
      if (hi < lo) throw UsageError("invalid instance range '" + item + "'");
      for (std::size_t i = lo; i <= hi; ++i) out.push_back(i);
    }
  }
  if (out.empty()) throw UsageError("empty instance selector");
  return out;
}

namespace {

ModelFormat ResolveFormat(const RunConfig& config) {
  if (config.format == "lightgbm") return ModelFormat::kLightGbm;
  if (config.format == "json") return ModelFormat::kJson;
  const std::string& p = config.model_path;
  return p.size() >= 5 && p.substr(p.size() - 5) == ".json" ? ModelFormat::kJson
                                                            : ModelFormat::kLightGbm;
}

struct Loaded {
  std::shared_ptr<const Ensemble> ensemble;
  EncodedModel encoded;
};

Loaded LoadEncoded(const RunConfig& config) {
  if (config.model_path.empty()) throw UsageError("--model is required");
  auto ensemble = std::make_shared<const Ensemble>(LoadModel(config.model_path, ResolveFormat(config)));
  Loaded l{ensemble, EncodeEnsemble(ensemble)};
  return l;
}

Dataset LoadData(const RunConfig& config, const FeatureSpace& features) {
  if (config.data_path.empty()) throw UsageError("--data is required");
  return LoadCsv(config.data_path, features);
}

void WriteText(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
  if (!f) throw IoError("write to '" + path + "' failed");
}

std::vector<std::size_t> Selected(const RunConfig& config, std::size_t rows) {
  auto picked = SelectInstances(config.instances, rows);
  if (config.sample && *config.sample < picked.size()) {
    std::mt19937_64 rng(config.seed);
    // Partial Fisher-Yates with a portable bounded draw.
    for (std::size_t i = 0; i < *config.sample; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (picked.size() - i));
      std::swap(picked[i], picked[j]);
    }
    picked.resize(*config.sample);
    std::sort(picked.begin(), picked.end());
  }
  return picked;
}

std::vector<Instance> Rows(const Dataset& data, const std::vector<std::size_t>& picked) {
  std::vector<Instance> rows;
  for (std::size_t i : picked) rows.push_back(data.rows[i]);
  return rows;
}

std::vector<Explanation> Explain(const EncodedModel& encoded, const Dataset& data,
                                 const std::vector<std::size_t>& picked, const RunConfig& config) {
  auto explanations = ExplainAll(encoded, Rows(data, picked), ParseOrderPolicy(config.order),
                                 config.scale(), config.jobs);
  for (std::size_t k = 0; k < picked.size(); ++k)
    explanations[k].instance = static_cast<int>(picked[k]);
  return explanations;
}

int CmdEncode(const RunConfig& config, const std::string& stats_path, std::ostream& out) {
  const Loaded l = LoadEncoded(config);
  const EncodedModel& enc = l.encoded;
  if (!config.out_path.empty()) WriteText(config.out_path, ToDimacs(enc), out);
  nlohmann::ordered_json stats;
  stats["features"] = l.ensemble->num_features();
  stats["trees"] = l.ensemble->trees.size();
  stats["atoms"] = enc.num_vars;
  stats["threshold_atoms"] = enc.thresholds.num_atoms();
  stats["paths"] = enc.paths.size();
  stats["clauses"] = enc.clauses.size();
  stats["ordering_clauses"] = enc.num_ordering_clauses;
  WriteText(stats_path, stats.dump(2) + "\n", out);
  return kExitOk;
}

int CmdExplain(const RunConfig& config, std::ostream& out) {
  const Loaded l = LoadEncoded(config);
  const Dataset data = LoadData(config, l.ensemble->features);
  const auto explanations = Explain(l.encoded, data, Selected(config, data.size()), config);
  std::string text;
  for (const Explanation& e : explanations)
    text += ExplanationToJson(e, l.ensemble->features).dump() + "\n";
  WriteText(config.out_path, text, out);
  return kExitOk;
}

int CmdClassExplain(const RunConfig& config, std::ostream& out) {
  const Loaded l = LoadEncoded(config);
  const Dataset data = LoadData(config, l.ensemble->features);
  ClassExplainOptions options;
  options.order = ParseOrderPolicy(config.order);
  options.interval = IntervalOptions{ParseIntervalMethod(config.interval), config.alpha};
  options.scale = config.scale();
  options.jobs = config.jobs;
  const auto classes = BuildClassExplanations(l.encoded, data, options);
  WriteText(config.out_path, ClassExplanationsToJson(classes, l.ensemble->features).dump(2) + "\n",
            out);
  return kExitOk;
}

std::vector<ClassExplanation> LoadClasses(const std::string& path, const Ensemble& ensemble) {
  if (path.empty()) throw UsageError("--classes is required");
  auto classes = ClassExplanationsFromJson(ReadFile(path), ensemble.features);
  if (classes.size() != static_cast<std::size_t>(ensemble.num_labels()))
    throw SchemaError("class explanations do not match the model's class count");
  return classes;
}

AttackEvalOptions EvalOptions(const RunConfig& config, bool include_clean) {
  AttackEvalOptions options;
  options.attack.mode = ParseAttackMode(config.attack);
  options.attack.order = ParseOrderPolicy(config.order);
  options.attack.full_free_fallback = config.full_free;
  options.tau = config.tau;
  options.min_frequency = config.min_frequency;
  options.include_clean = include_clean;
  options.scale = config.scale();
  options.jobs = config.jobs;
  return options;
}

// Attack report over the picked rows, with sample ids mapped back to rows.
AttackReport Attack(const EncodedModel& encoded, const std::vector<ClassExplanation>& classes,
                    const Dataset& data, const std::vector<std::size_t>& picked,
                    const AttackEvalOptions& options) {
  AttackReport report = EvaluateAttack(encoded, classes, Rows(data, picked), options);
  for (std::size_t k = 0; k < report.samples.size(); ++k)
    if (report.samples[k].adversarial)
      report.samples[k].adversarial->instance = static_cast<int>(picked[k]);
  return report;
}

struct AdvPaths {
  std::string classes;
  std::string summary;
  std::string perturbed;
  std::string samples;
  bool include_clean = false;
};

int CmdAdvGenerate(const RunConfig& config, const AdvPaths& paths, std::ostream& out) {
  const Loaded l = LoadEncoded(config);
  const Dataset data = LoadData(config, l.ensemble->features);
  const auto classes = LoadClasses(paths.classes, *l.ensemble);
  const auto options = EvalOptions(config, paths.include_clean);
  const auto picked = Selected(config, data.size());
  const AttackReport report = Attack(l.encoded, classes, data, picked, options);
  WriteText(config.out_path, AttackSamplesCsv(report, l.ensemble->features), out);
  if (!paths.perturbed.empty()) {
    std::vector<Instance> perturbed;
    for (const auto& s : report.samples)
      if (s.adversarial) perturbed.push_back(s.adversarial->perturbed);
    WriteText(paths.perturbed, ToCsv(perturbed, l.ensemble->features), out);
  }
  if (!paths.summary.empty())
    WriteText(paths.summary, AttackReportToJson(report, options).dump(2) + "\n", out);
  return kExitOk;
}

int CmdAdvEval(const RunConfig& config, const AdvPaths& paths, std::ostream& out) {
  const Loaded l = LoadEncoded(config);
  const Dataset data = LoadData(config, l.ensemble->features);
  const auto classes = LoadClasses(paths.classes, *l.ensemble);
  const auto options = EvalOptions(config, paths.include_clean);
  const auto picked = Selected(config, data.size());
  const AttackReport report = Attack(l.encoded, classes, data, picked, options);
  WriteText(config.out_path, AttackReportToJson(report, options).dump(2) + "\n", out);
  if (!paths.samples.empty())
    WriteText(paths.samples, AttackSamplesCsv(report, l.ensemble->features), out);
  return kExitOk;
}

int CmdAdvDetect(const RunConfig& config, const AdvPaths& paths, std::ostream& out) {
  const Loaded l = LoadEncoded(config);
  const Dataset data = LoadData(config, l.ensemble->features);
  const auto classes = LoadClasses(paths.classes, *l.ensemble);
  const auto picked = Selected(config, data.size());
  const auto explanations = Explain(l.encoded, data, picked, config);
  std::string text = "instance,class,d,n,s_adv,adversarial,note,flags\n";
  for (const Explanation& e : explanations) {
    const DetectionResult r = DetectFromExplanation(e, classes, config.min_frequency);
    std::string note = r.empty_explanation ? "empty-explanation" : (r.empty_class ? "empty-class" : "");
    std::string flags;
    for (const auto& [f, flag] : r.flags) {
      if (!flags.empty()) flags += ';';
      flags += l.ensemble->features.name(f) + ":" + FeatureFlagName(flag);
    }
    text += std::to_string(e.instance) + ',' + std::to_string(r.predicted) + ',' +
            std::to_string(r.discrepancies) + ',' + std::to_string(r.explained) + ',' +
            FormatDouble(r.s_adv) + ',' + (ClassifyAdversarial(r, config.tau) ? "1" : "0") + ',' +
            note + ',' + flags + '\n';
  }
  WriteText(config.out_path, text, out);
  return kExitOk;
}

struct ExternalRanking {
  int instance;
  Ranking ranking;
};

std::vector<ExternalRanking> LoadRankings(const std::string& path, const FeatureSpace& features,
                                          std::size_t rows) {
  const std::string text = ReadFile(path);
  std::vector<std::pair<int, std::vector<std::string>>> raw;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
      for (const auto& j : doc)
        raw.emplace_back(j.at("instance").get<int>(), j.at("order").get<std::vector<std::string>>());
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("rankings: ") + e.what());
    }
  } else {
    std::stringstream ss(text);
    std::string line;
    bool header = true;
    while (std::getline(ss, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (header) {
        header = false;
        continue;
      }
      std::stringstream ls(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (cells.empty()) continue;
      int id = 0;
      try {
        id = std::stoi(cells[0]);
      } catch (const std::exception&) {
        throw SchemaError("rankings: invalid instance id '" + cells[0] + "'");
      }
      raw.emplace_back(id, std::vector<std::string>(cells.begin() + 1, cells.end()));
    }
  }
  std::vector<ExternalRanking> out;
  std::vector<bool> seen(rows, false);
  for (const auto& [id, names] : raw) {
    if (id < 0 || static_cast<std::size_t>(id) >= rows || seen[id])
      throw SchemaError("rankings: misaligned instance id " + std::to_string(id));
    seen[id] = true;
    std::vector<int> order;
    for (const auto& name : names) {
      const auto f = features.IndexOf(name);
      if (!f) throw SchemaError("rankings: unknown feature '" + name + "'");
      order.push_back(*f);
    }
    if (order.size() != features.size())
      throw SchemaError("rankings: instance " + std::to_string(id) + " does not rank every feature");
    out.push_back(ExternalRanking{id, RankingFromOrder(order)});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.instance < b.instance; });
  return out;
}

nlohmann::ordered_json AggregateJson(const std::vector<std::optional<double>>& values) {
  const Aggregate a = Summarize(values);
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  return {{"min", opt(a.min)},
          {"avg", opt(a.avg)},
          {"max", opt(a.max)},
          {"degenerate", static_cast<int>(values.size()) - a.count}};
}

int CmdMetrics(const RunConfig& config, const std::string& rankings_path,
               const std::string& rankings2_path, const std::string& summary_path,
               std::ostream& out) {
  const Loaded l = LoadEncoded(config);
  const Dataset data = LoadData(config, l.ensemble->features);
  if (rankings_path.empty()) throw UsageError("--rankings is required");
  const auto external = LoadRankings(rankings_path, l.ensemble->features, data.size());
  std::vector<std::size_t> picked;
  for (const auto& r : external) picked.push_back(static_cast<std::size_t>(r.instance));

  // Two independent explanation runs; their agreement is the consistency.
  const auto run1 = Explain(l.encoded, data, picked, config);
  const auto run2 = Explain(l.encoded, data, picked, config);
  const std::size_t nf = l.ensemble->num_features();
  std::vector<Ranking> formal1, formal2;
  for (const auto& e : run1) formal1.push_back(FormalRanking(e, nf));
  for (const auto& e : run2) formal2.push_back(FormalRanking(e, nf));

  std::vector<InstanceMetrics> rows;
  std::vector<std::optional<double>> s, k, r;
  for (std::size_t i = 0; i < external.size(); ++i) {
    InstanceMetrics m;
    m.instance = external[i].instance;
    m.spearman = Spearman(formal1[i], external[i].ranking);
    m.kendall = KendallTauB(formal1[i], external[i].ranking);
    m.rbo = Rbo(formal1[i].order, external[i].ranking.order, config.rbo_p);
    s.push_back(m.spearman);
    k.push_back(m.kendall);
    r.push_back(m.rbo);
    rows.push_back(m);
  }
  WriteText(config.out_path, MetricsCsv(rows), out);

  nlohmann::ordered_json summary;
  summary["instances"] = rows.size();
  summary["rbo_p"] = config.rbo_p;
  summary["spearman"] = AggregateJson(s);
  summary["kendall"] = AggregateJson(k);
  summary["rbo"] = AggregateJson(r);
  summary["consistency"] = Consistency(formal1, formal2);
  if (!rankings2_path.empty()) {
    const auto second = LoadRankings(rankings2_path, l.ensemble->features, data.size());
    std::vector<Ranking> a, b;
    for (const auto& x : external) a.push_back(x.ranking);
    for (const auto& x : second) b.push_back(x.ranking);
    if (second.size() != external.size())
      throw SchemaError("rankings files cover different instances");
    for (std::size_t i = 0; i < second.size(); ++i)
      if (second[i].instance != external[i].instance)
        throw SchemaError("rankings files cover different instances");
    summary["external_consistency"] = Consistency(a, b);
  }
  WriteText(summary_path, summary.dump(2) + "\n", summary_path.empty() ? std::cerr : out);
  return kExitOk;
}

void AddCommon(CLI::App* cmd, RunConfig& c, bool data = true) {
  cmd->add_option("--model", c.model_path, "Model file")->required();
  cmd->add_option("--format", c.format, "lightgbm | json (default: by extension)");
  if (data) cmd->add_option("--data", c.data_path, "Dataset CSV")->required();
  cmd->add_option("--out", c.out_path, "Output path (default: stdout)");
  cmd->add_option("--scale", c.scale_exponent, "Weight scale exponent (10^k)");
  cmd->add_option("--jobs", c.jobs, "Worker threads");
  cmd->add_option("--seed", c.seed, "Seed for --sample");
}

void AddExplainOptions(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--order", c.order, "Feature visit order: index | margin");
  cmd->add_option("--instances", c.instances, "all, or indices/ranges like 0,3,5-9");
  cmd->add_option("--sample", c.sample, "Random subset of the selected instances");
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Formal explanations and adversarial analysis of tree ensembles", "gbtx"};
  app.require_subcommand(1);
  RunConfig c;
  std::string stats_path, rankings, rankings2, summary;
  AdvPaths adv;

  auto* encode = app.add_subcommand("encode", "Compile a model to CNF and report sizes");
  AddCommon(encode, c, false);
  encode->add_option("--stats", stats_path, "Stats JSON path (default: stdout)");

  auto* explain = app.add_subcommand("explain", "Instance-level abductive explanations");
  AddCommon(explain, c);
  AddExplainOptions(explain, c);

  auto* class_explain = app.add_subcommand("class-explain", "Class-level explanations");
  AddCommon(class_explain, c);
  class_explain->add_option("--order", c.order, "Feature visit order: index | margin");
  class_explain->add_option("--interval", c.interval, "quantile | cluster");
  class_explain->add_option("--alpha", c.alpha, "Quantile trimming level");

  auto* adv_cmd = app.add_subcommand("adv", "Adversarial generation and detection");
  adv_cmd->require_subcommand(1);
  std::vector<CLI::App*> adv_subs;
  for (const char* name : {"gen", "detect", "eval"}) {
    auto* sub = adv_cmd->add_subcommand(name);
    AddCommon(sub, c);
    AddExplainOptions(sub, c);
    sub->add_option("--classes", adv.classes, "Class-explanation artifact")->required();
    sub->add_option("--tau", c.tau, "Detection threshold");
    sub->add_option("--min-frequency", c.min_frequency, "Ignore rarer class features");
    adv_subs.push_back(sub);
  }
  adv_subs[0]->description("Generate adversarial samples (per-sample CSV)");
  adv_subs[1]->description("Score inputs for adversarial likelihood");
  adv_subs[2]->description("Attack the dataset and report rates (JSON)");
  for (auto* sub : {adv_subs[0], adv_subs[2]}) {
    sub->add_option("--attack", c.attack, "interval | witness");
    sub->add_flag("--full-free", c.full_free, "Fall back to perturbing every feature");
    sub->add_flag("--include-clean", adv.include_clean, "Also score unmodified inputs");
  }
  adv_subs[0]->add_option("--summary", adv.summary, "Summary report JSON path");
  adv_subs[0]->add_option("--perturbed", adv.perturbed, "Perturbed rows as dataset CSV");
  adv_subs[2]->add_option("--samples", adv.samples, "Per-sample CSV path");

  auto* metrics = app.add_subcommand("metrics", "Compare formal rankings with external ones");
  AddCommon(metrics, c);
  metrics->add_option("--order", c.order, "Feature visit order: index | margin");
  metrics->add_option("--rankings", rankings, "External rankings (JSON or CSV)")->required();
  metrics->add_option("--rankings2", rankings2, "Second run of the external explainer");
  metrics->add_option("--rbo-p", c.rbo_p, "RBO persistence");
  metrics->add_option("--summary", summary, "Summary JSON path (default: stderr)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    c.Validate();
    if (encode->parsed()) return CmdEncode(c, stats_path, out);
    if (explain->parsed()) return CmdExplain(c, out);
    if (class_explain->parsed()) return CmdClassExplain(c, out);
    if (adv_subs[0]->parsed()) return CmdAdvGenerate(c, adv, out);
    if (adv_subs[1]->parsed()) return CmdAdvDetect(c, adv, out);
    if (adv_subs[2]->parsed()) return CmdAdvEval(c, adv, out);
    if (metrics->parsed()) return CmdMetrics(c, rankings, rankings2, summary, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace gbtx::cli
