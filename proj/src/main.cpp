// Command-line front end. Every subcommand reads one JSON config, applies
// flag overrides, and writes deterministic outputs plus a manifest into the
// output directory. Exit codes: 0 success, 1 usage error, 2 data error.
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "heatwarn/csv.hpp"
#include "heatwarn/decision.hpp"
#include "heatwarn/glm.hpp"
#include "heatwarn/io.hpp"
#include "heatwarn/metrics.hpp"
#include "heatwarn/reference.hpp"
#include "heatwarn/rolling.hpp"
#include "heatwarn/series.hpp"
#include "heatwarn/synoptic.hpp"
#include "heatwarn/synthgen.hpp"
#include "heatwarn/transformer.hpp"

namespace fs = std::filesystem;
using namespace heatwarn;

namespace {

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string level;  // "", "l1", or "l2"
  std::optional<double> alpha;
  std::optional<std::string> region;
  std::optional<std::string> date;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct LoadedConfig {
  RunConfig cfg;
  std::string raw;  // config bytes, hashed into the manifest
};

LoadedConfig load_config(const CliOptions& opt) {
  if (opt.config_path.empty()) throw DataError("--config is required");
  LoadedConfig lc;
  lc.raw = read_file(opt.config_path);
  Json j;
  try {
    j = Json::parse(lc.raw);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(opt.config_path + ": " + e.what());
  }
  lc.cfg = run_config_parse(j);
  if (opt.seed) {
    lc.cfg.seed = *opt.seed;
    if (lc.cfg.synth) lc.cfg.synth->seed = *opt.seed;
    lc.cfg.forecaster.seed = *opt.seed;
  }
  if (opt.out) lc.cfg.out_dir = *opt.out;
  if (opt.alpha) {
    if (opt.level == "l1")
      lc.cfg.alarm.alpha_l1 = *opt.alpha;
    else if (opt.level == "l2")
      lc.cfg.alarm.alpha_l2 = *opt.alpha;
    else
      throw DataError("--alpha needs --level l1 or --level l2");
    lc.cfg.alarm.validate();
  }
  if (opt.region) {
    std::vector<RegionPaths> keep;
    for (auto& r : lc.cfg.regions)
      if (r.name == *opt.region) keep.push_back(r);
    if (lc.cfg.synth && lc.cfg.synth->region_name != *opt.region)
      throw DataError("unknown region " + *opt.region);
    if (!lc.cfg.synth && keep.empty())
      throw DataError("unknown region " + *opt.region);
    lc.cfg.regions = std::move(keep);
  }
  return lc;
}

struct RegionData {
  std::string name;
  DailySeries series;
  std::optional<WorldTruth> truth;
};

// Load every input region: synthetic worlds are generated, file regions are
// ingested. With `prepare` the series is imputed and province counts scaled,
// ready for modeling.
std::vector<RegionData> load_regions(const RunConfig& cfg, bool prepare) {
  std::vector<RegionData> out;
  if (cfg.synth) {
    auto [series, truth] = generate(*cfg.synth);
    out.push_back({cfg.synth->region_name, std::move(series), std::move(truth)});
  } else if (!cfg.regions.empty()) {
    for (const auto& r : cfg.regions) {
      DailySeries s = ingest_csv(r.mortality_csv, r.meteo_csv, r.ssc_csv,
                                 r.holidays_csv, r.name, r.level);
      out.push_back({r.name, std::move(s), std::nullopt});
    }
  } else {
    throw DataError("config needs a synth world or at least one region");
  }
  if (prepare)
    for (auto& rd : out) {
      rd.series = impute_mortality(std::move(rd.series));
      rd.series = impute_meteo(std::move(rd.series));
      auto [scaled, applied] = scale_provincial(std::move(rd.series));
      rd.series = std::move(scaled);
      if (applied)
        std::cerr << rd.name << ": provincial counts scaled by 1/100\n";
    }
  return out;
}

fs::path region_dir(const RunConfig& cfg, const std::string& name) {
  fs::path dir = fs::path(cfg.out_dir) / name;
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

void write_manifest(const LoadedConfig& lc, const std::string& command,
                    std::vector<std::string> outputs) {
  fs::create_directories(lc.cfg.out_dir);
  Json j = manifest_json(lc.raw, lc.cfg.seed, std::move(outputs));
  j["command"] = command;
  save_json_file((fs::path(lc.cfg.out_dir) / "manifest.json").string(), j);
}

// Baseline refit on the two calendar years preceding `year`, mirroring the
// rolling protocol.
GlmFit fit_baseline_before(const DailySeries& s, int year,
                           const GlmDesignConfig& gcfg) {
  const std::int64_t lo = std::max<std::int64_t>(
      to_days(CalendarDate{year - 2, 1, 1}) - to_days(s.start_date()), 0);
  const std::int64_t hi =
      to_days(CalendarDate{year, 1, 1}) - to_days(s.start_date());
  if (hi <= lo) throw DataError("no training days before " + std::to_string(year));
  std::vector<std::vector<double>> designs;
  std::vector<double> counts;
  for (std::int64_t t = lo; t < hi; ++t) {
    const auto& rec = s.records[static_cast<std::size_t>(t)];
    if (!rec.deaths)
      throw DataError("missing deaths on " + format_date(rec.date));
    designs.push_back(build_design(rec.date, rec.holiday, gcfg));
    counts.push_back(*rec.deaths);
  }
  GlmFit fit = fit_irls(designs, counts, 100, 1e-8, gcfg);
  fit.train_start = s.records[static_cast<std::size_t>(lo)].date;
  fit.train_end = s.records[static_cast<std::size_t>(hi - 1)].date;
  return fit;
}

int cmd_synth(const CliOptions& opt) {
  LoadedConfig lc = load_config(opt);
  if (!lc.cfg.synth) throw DataError("synth needs a \"synth\" config block");
  auto [series, truth] = generate(*lc.cfg.synth);
  const fs::path dir = region_dir(lc.cfg, series.region_name);
  {
    std::ostringstream os;
    write_mortality_csv(os, series);
    write_text(dir / "mortality.csv", os.str());
  }
  {
    std::ostringstream os;
    write_meteo_csv(os, series);
    write_text(dir / "meteo.csv", os.str());
  }
  {
    std::ostringstream os;
    write_ssc_csv(os, series);
    write_text(dir / "ssc.csv", os.str());
  }
  {
    std::ostringstream os;
    write_holidays_csv(os, series);
    write_text(dir / "holidays.csv", os.str());
  }
  save_json_file((dir / "truth.json").string(), truth_json(truth));
  write_manifest(lc, "synth",
                 {series.region_name + "/mortality.csv",
                  series.region_name + "/meteo.csv",
                  series.region_name + "/ssc.csv",
                  series.region_name + "/holidays.csv",
                  series.region_name + "/truth.json"});
  std::cout << "world " << series.region_name << ": " << series.size()
            << " days, " << truth.events.size() << " events\n";
  return 0;
}

int cmd_ingest(const CliOptions& opt) {
  LoadedConfig lc = load_config(opt);
  if (lc.cfg.regions.empty())
    throw DataError("ingest needs file-backed regions");
  std::vector<std::string> outputs;
  for (auto& rd : load_regions(lc.cfg, false)) {
    const fs::path dir = region_dir(lc.cfg, rd.name);
    long long missing_deaths = 0, missing_meteo = 0, missing_ssc = 0;
    for (const auto& rec : rd.series.records) {
      missing_deaths += !rec.deaths;
      for (const auto& mv : rec.meteo) missing_meteo += !mv;
      missing_ssc += !rec.ssc;
    }
    {
      std::ostringstream os;
      write_mortality_csv(os, rd.series);
      write_text(dir / "mortality.csv", os.str());
    }
    {
      std::ostringstream os;
      write_meteo_csv(os, rd.series);
      write_text(dir / "meteo.csv", os.str());
    }
    {
      std::ostringstream os;
      write_ssc_csv(os, rd.series);
      write_text(dir / "ssc.csv", os.str());
    }
    {
      std::ostringstream os;
      write_holidays_csv(os, rd.series);
      write_text(dir / "holidays.csv", os.str());
    }
    outputs.push_back(rd.name + "/mortality.csv");
    outputs.push_back(rd.name + "/meteo.csv");
    outputs.push_back(rd.name + "/ssc.csv");
    outputs.push_back(rd.name + "/holidays.csv");
    std::cout << rd.name << ": " << rd.series.size() << " days ("
              << format_date(rd.series.start_date()) << ".."
              << format_date(rd.series.end_date()) << "), missing deaths "
              << missing_deaths << ", missing meteo values " << missing_meteo
              << ", missing codes " << missing_ssc << "\n";
  }
  write_manifest(lc, "ingest", std::move(outputs));
  return 0;
}

int cmd_detect(const CliOptions& opt) {
  LoadedConfig lc = load_config(opt);
  std::vector<std::string> outputs;
  for (auto& rd : load_regions(lc.cfg, false)) {
    const auto events = detect_heatwaves(rd.series);
    const fs::path dir = region_dir(lc.cfg, rd.name);
    std::ostringstream os;
    write_events_csv(os, events);
    write_text(dir / "events.csv", os.str());
    outputs.push_back(rd.name + "/events.csv");
    std::cout << rd.name << ": " << events.size() << " events\n";
  }
  write_manifest(lc, "detect", std::move(outputs));
  return 0;
}

int cmd_label(const CliOptions& opt) {
  LoadedConfig lc = load_config(opt);
  std::vector<std::string> outputs;
  for (auto& rd : load_regions(lc.cfg, true)) {
    const auto events = detect_heatwaves(rd.series);
    std::vector<HeatwaveEvent> labeled_events;
    std::vector<EventLabel> labels;
    std::map<int, GlmFit> fits;
    const int first_year = rd.series.start_date().year;
    for (const auto& ev : events) {
      const int year = ev.start.year;
      if (year < first_year + 2) {
        std::cerr << rd.name << ": event " << format_date(ev.start)
                  << " lacks two prior training years; skipped\n";
        continue;
      }
      auto it = fits.find(year);
      if (it == fits.end())
        it = fits.emplace(year, fit_baseline_before(rd.series, year,
                                                    lc.cfg.baseline))
                 .first;
      labeled_events.push_back(ev);
      labels.push_back(label_event(rd.series, it->second, ev, lc.cfg.alarm));
    }
    const fs::path dir = region_dir(lc.cfg, rd.name);
    std::ostringstream os;
    write_labels_csv(os, labeled_events, labels);
    write_text(dir / "labels.csv", os.str());
    outputs.push_back(rd.name + "/labels.csv");
    std::cout << rd.name << ": " << labels.size() << " labeled events\n";
  }
  write_manifest(lc, "label", std::move(outputs));
  return 0;
}

int cmd_train(const CliOptions& opt) {
  LoadedConfig lc = load_config(opt);
  std::vector<std::string> outputs;
  for (auto& rd : load_regions(lc.cfg, true)) {
    EvalSource src(rd.series);
    const TransformerConfig& tcfg = lc.cfg.forecaster;
    const int last_origin = src.size() - 1 - tcfg.horizon;
    if (last_origin < tcfg.window)
      throw DataError(rd.name + ": series too short to train on");
    const auto samples =
        build_samples<float>(src, tcfg.window, last_origin, tcfg);
    Transformer<float> model(tcfg);
    AdamState<float> adam;
    const auto trace = model.train(samples, &adam);
    const fs::path dir = region_dir(lc.cfg, rd.name);
    save_json_file((dir / "checkpoint.json").string(),
                   checkpoint_json(model, &adam));
    outputs.push_back(rd.name + "/checkpoint.json");
    std::cout << rd.name << ": trained on " << samples.size()
              << " windows, final loss "
              << (trace.empty() ? 0.0 : trace.back()) << "\n";
  }
  write_manifest(lc, "train", std::move(outputs));
  return 0;
}

int cmd_forecast(const CliOptions& opt) {
  LoadedConfig lc = load_config(opt);
  if (!opt.date) throw DataError("forecast needs --date YYYY-MM-DD");
  const CalendarDate origin_date = parse_date(*opt.date);
  std::vector<std::string> outputs;
  for (auto& rd : load_regions(lc.cfg, true)) {
    const fs::path dir = region_dir(lc.cfg, rd.name);
    const fs::path ckpt = dir / "checkpoint.json";
    if (!fs::exists(ckpt))
      throw DataError(ckpt.string() + " not found; run train first");
    auto model = checkpoint_parse<float>(load_json_file(ckpt.string()));
    EvalSource src(rd.series);
    const std::int64_t t64 = rd.series.index_of(origin_date);
    if (t64 < 0)
      throw DataError("origin " + *opt.date + " outside the series span");
    const int t = static_cast<int>(t64);
    const auto forecast = predict_horizon(model, src, t);
    GlmFit glm = fit_baseline_before(rd.series, origin_date.year,
                                     lc.cfg.baseline);
    std::vector<CalendarDate> dates;
    std::vector<double> baseline;
    for (int k = 1; k <= model.config().horizon; ++k) {
      const CalendarDate d = advance(origin_date, k);
      dates.push_back(d);
      const std::int64_t di = rd.series.index_of(d);
      const bool hol = di >= 0 &&
                       rd.series.records[static_cast<std::size_t>(di)].holiday;
      baseline.push_back(glm.predict_one(d, hol));
    }
    const ForecastBundle bundle =
        make_forecast_bundle(dates, forecast, baseline);
    Json j;
    j["format"] = "heatwarn-forecast";
    j["format_version"] = kFormatVersion;
    j["region"] = rd.name;
    j["origin"] = format_date(origin_date);
    Json days = Json::array();
    for (std::size_t i = 0; i < bundle.dates.size(); ++i) {
      Json dj;
      dj["date"] = format_date(bundle.dates[i]);
      dj["all_cause"] = bundle.all_cause[i];
      dj["baseline"] = bundle.baseline[i];
      dj["excess"] = bundle.excess[i];
      dj["ratio"] = bundle.ratios[i];
      days.push_back(std::move(dj));
    }
    j["days"] = std::move(days);
    save_json_file((dir / "forecast.json").string(), j);
    outputs.push_back(rd.name + "/forecast.json");
    std::cout << rd.name << " @ " << format_date(origin_date) << ":";
    for (double r : bundle.ratios) std::cout << ' ' << format_real(r);
    std::cout << "\n";
  }
  write_manifest(lc, "forecast", std::move(outputs));
  return 0;
}

int cmd_evaluate(const CliOptions& opt) {
  LoadedConfig lc = load_config(opt);
  std::vector<std::string> outputs;
  for (auto& rd : load_regions(lc.cfg, true)) {
    EvalSource src(rd.series);
    std::vector<std::string> warnings;
    Transformer<float> model(lc.cfg.forecaster);
    AdamState<float> adam;
    GlmFit glm;
    const auto outcomes =
        run_rolling<float>(src, lc.cfg.forecaster, lc.cfg.baseline,
                           lc.cfg.alarm, &warnings, &model, &adam, &glm);
    for (const auto& w : warnings) std::cerr << rd.name << ": " << w << "\n";
    const fs::path dir = region_dir(lc.cfg, rd.name);
    {
      std::ostringstream os;
      write_outcomes_csv(os, outcomes, lc.cfg.alarm);
      write_text(dir / "outcomes.csv", os.str());
    }
    save_json_file((dir / "metrics.json").string(),
                   run_metrics_json(outcomes));
    save_json_file((dir / "checkpoint.json").string(),
                   checkpoint_json(model, &adam));
    save_json_file((dir / "baseline.json").string(), baseline_json(glm));
    outputs.push_back(rd.name + "/outcomes.csv");
    outputs.push_back(rd.name + "/metrics.json");
    outputs.push_back(rd.name + "/checkpoint.json");
    outputs.push_back(rd.name + "/baseline.json");
    const auto l1 = metrics(score_events(outcomes, false));
    const auto l2 = metrics(score_events(outcomes, true));
    std::cout << rd.name << ": " << outcomes.size()
              << " events | L1 P " << format_pct(l1.precision) << " R "
              << format_pct(l1.recall) << " | L2 P " << format_pct(l2.precision)
              << " R " << format_pct(l2.recall) << "\n";
  }
  write_manifest(lc, "evaluate", std::move(outputs));
  return 0;
}

int cmd_sweep(const CliOptions& opt) {
  LoadedConfig lc = load_config(opt);
  std::vector<std::string> outputs;
  std::vector<std::string> names;
  if (lc.cfg.synth)
    names.push_back(lc.cfg.synth->region_name);
  else
    for (const auto& r : lc.cfg.regions) names.push_back(r.name);
  if (names.empty()) throw DataError("config has no regions");
  for (const auto& name : names) {
    const fs::path dir = region_dir(lc.cfg, name);
    const fs::path src = dir / "outcomes.csv";
    if (!fs::exists(src))
      throw DataError(src.string() + " not found; run evaluate first");
    const auto outcomes = read_outcomes_csv(src.string());
    const auto emit = [&](bool level2, const char* fname) {
      const auto points = sweep(sweep_inputs(outcomes, level2), lc.cfg.sweep.lo,
                                lc.cfg.sweep.hi, lc.cfg.sweep.step);
      std::ostringstream os;
      write_sweep_csv(os, points);
      write_text(dir / fname, os.str());
      outputs.push_back(name + "/" + fname);
      std::cout << name << ": " << points.size() << " grid points -> " << fname
                << "\n";
    };
    if (opt.level.empty() || opt.level == "l1") emit(false, "sweep_l1.csv");
    if (opt.level.empty() || opt.level == "l2") emit(true, "sweep_l2.csv");
  }
  write_manifest(lc, "sweep", std::move(outputs));
  return 0;
}

int cmd_report(const CliOptions& opt) {
  LoadedConfig lc = load_config(opt);
  std::vector<std::string> names;
  if (lc.cfg.synth)
    names.push_back(lc.cfg.synth->region_name);
  else
    for (const auto& r : lc.cfg.regions) names.push_back(r.name);
  if (names.empty()) throw DataError("config has no regions");
  std::ostringstream os;
  os << "region,events,l1_precision,l1_recall,l1_f1,l1_accuracy,"
        "l2_precision,l2_recall,l2_f1,l2_accuracy\n";
  for (const auto& name : names) {
    const fs::path path = fs::path(lc.cfg.out_dir) / name / "metrics.json";
    if (!fs::exists(path))
      throw DataError(path.string() + " not found; run evaluate first");
    const Json j = load_json_file(path.string());
    auto cell = [&](const Json& block, const char* key) {
      if (!block.contains(key) || block.at(key).is_null())
        return std::string("-");
      return format_pct(block.at(key).get<double>());
    };
    const auto& l1 = j.at("l1");
    const auto& l2 = j.at("l2");
    os << name << ',' << j.at("events").get<long long>() << ','
       << cell(l1, "precision") << ',' << cell(l1, "recall") << ','
       << cell(l1, "f1") << ',' << cell(l1, "accuracy") << ','
       << cell(l2, "precision") << ',' << cell(l2, "recall") << ','
       << cell(l2, "f1") << ',' << cell(l2, "accuracy") << '\n';
  }
  fs::create_directories(lc.cfg.out_dir);
  write_text(fs::path(lc.cfg.out_dir) / "report.csv", os.str());
  write_manifest(lc, "report", {"report.csv"});
  std::cout << os.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-prediction early-warning pipeline for deadly heatwaves"};
  app.require_subcommand(1);

  CliOptions opt;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "run configuration JSON")
        ->required();
    cmd->add_option("--seed", opt.seed, "override the run seed");
    cmd->add_option("--out", opt.out, "override the output directory");
    cmd->add_option("--region", opt.region, "restrict to one region");
  };
  auto add_alarm = [&](CLI::App* cmd) {
    cmd->add_option("--level", opt.level, "alarm task: l1 or l2")
        ->check(CLI::IsMember({"l1", "l2"}));
    cmd->add_option("--alpha", opt.alpha,
                    "override the threshold for --level");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic world");
  add_common(synth);
  CLI::App* ingest =
      app.add_subcommand("ingest", "validate and merge input CSVs");
  add_common(ingest);
  CLI::App* detect =
      app.add_subcommand("detect", "detect heatwave events from codes");
  add_common(detect);
  CLI::App* label =
      app.add_subcommand("label", "label events by observed excess");
  add_common(label);
  add_alarm(label);
  CLI::App* train =
      app.add_subcommand("train", "train the forecaster, write a checkpoint");
  add_common(train);
  CLI::App* forecast =
      app.add_subcommand("forecast", "forecast the horizon after a date");
  add_common(forecast);
  forecast->add_option("--date", opt.date, "forecast origin date")->required();
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "rolling evaluation over all years");
  add_common(evaluate);
  add_alarm(evaluate);
  CLI::App* sweepc =
      app.add_subcommand("sweep", "threshold sweep from cached outcomes");
  add_common(sweepc);
  add_alarm(sweepc);
  CLI::App* report =
      app.add_subcommand("report", "aggregate region metrics into a table");
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(opt);
    if (ingest->parsed()) return cmd_ingest(opt);
    if (detect->parsed()) return cmd_detect(opt);
    if (label->parsed()) return cmd_label(opt);
    if (train->parsed()) return cmd_train(opt);
    if (forecast->parsed()) return cmd_forecast(opt);
    if (evaluate->parsed()) return cmd_evaluate(opt);
    if (sweepc->parsed()) return cmd_sweep(opt);
    if (report->parsed()) return cmd_report(opt);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
