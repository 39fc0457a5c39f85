// Deterministic persistence: JSON checkpoints, run configs, and the CSV
// outputs the CLI emits. Nothing here writes timestamps or machine state, so
// equal inputs serialize to identical bytes.
#pragma once

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "heatwarn/csv.hpp"
#include "heatwarn/decision.hpp"
#include "heatwarn/glm.hpp"
#include "heatwarn/metrics.hpp"
#include "heatwarn/rolling.hpp"
#include "heatwarn/series.hpp"
#include "heatwarn/synoptic.hpp"
#include "heatwarn/synthgen.hpp"
#include "heatwarn/transformer.hpp"

namespace heatwarn {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

inline void expect_keys(const Json& j,
                        std::initializer_list<std::string_view> allowed,
                        const std::string& where) {
  if (!j.is_object()) throw DataError(where + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (std::string_view a : allowed)
      if (item.key() == a) {
        known = true;
        break;
      }
    if (!known)
      throw DataError(where + ": unknown key \"" + item.key() + "\"");
  }
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

inline void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

namespace detail {

template <typename T>
T get_field(const Json& j, const char* key, T fallback,
            const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(where + ": bad value for \"" + key + "\"");
  }
}

template <typename T>
T need_field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key))
    throw DataError(where + ": missing key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(where + ": bad value for \"" + key + "\"");
  }
}

}  // namespace detail

// ---------------- forecaster checkpoints ----------------

inline Json forecaster_config_json(const TransformerConfig& c) {
  Json j;
  j["window"] = c.window;
  j["horizon"] = c.horizon;
  j["meteo_channels"] = c.meteo_channels;
  j["d_model"] = c.d_model;
  j["n_blocks"] = c.n_blocks;
  j["n_heads"] = c.n_heads;
  j["mlp_hidden"] = c.mlp_hidden;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  return j;
}

inline TransformerConfig forecaster_config_parse(const Json& j,
                                                 const std::string& where) {
  expect_keys(j,
              {"window", "horizon", "meteo_channels", "d_model", "n_blocks",
               "n_heads", "mlp_hidden", "learning_rate", "epochs",
               "batch_size", "seed"},
              where);
  TransformerConfig c;
  c.window = detail::get_field(j, "window", c.window, where);
  c.horizon = detail::get_field(j, "horizon", c.horizon, where);
  c.meteo_channels =
      detail::get_field(j, "meteo_channels", c.meteo_channels, where);
  c.d_model = detail::get_field(j, "d_model", c.d_model, where);
  c.n_blocks = detail::get_field(j, "n_blocks", c.n_blocks, where);
  c.n_heads = detail::get_field(j, "n_heads", c.n_heads, where);
  c.mlp_hidden = detail::get_field(j, "mlp_hidden", c.mlp_hidden, where);
  c.learning_rate =
      detail::get_field(j, "learning_rate", c.learning_rate, where);
  c.epochs = detail::get_field(j, "epochs", c.epochs, where);
  c.batch_size = detail::get_field(j, "batch_size", c.batch_size, where);
  c.seed = detail::get_field(j, "seed", c.seed, where);
  c.validate();
  return c;
}

template <typename Real>
Json checkpoint_json(const Transformer<Real>& model,
                     const AdamState<Real>* opt = nullptr) {
  if (!model.initialized())
    throw DataError("cannot checkpoint an uninitialized forecaster");
  Json j;
  j["format"] = "heatwarn-forecaster";
  j["format_version"] = kFormatVersion;
  j["config"] = forecaster_config_json(model.config());
  Json tensors = Json::array();
  const Real* p = model.params().data();
  for (const auto& t : model.layout().tensors) {
    Json tj;
    tj["name"] = t.name;
    tj["shape"] = t.shape;
    Json data = Json::array();
    for (std::size_t i = 0; i < t.numel(); ++i)
      data.push_back(static_cast<double>(p[t.offset + i]));
    tj["data"] = std::move(data);
    tensors.push_back(std::move(tj));
  }
  j["tensors"] = std::move(tensors);
  if (opt) {
    if (opt->m.size() != model.layout().total ||
        opt->v.size() != model.layout().total)
      throw DataError("optimizer state does not match parameter layout");
    Json oj;
    oj["step"] = opt->step;
    Json m = Json::array(), v = Json::array();
    for (Real x : opt->m) m.push_back(static_cast<double>(x));
    for (Real x : opt->v) v.push_back(static_cast<double>(x));
    oj["m"] = std::move(m);
    oj["v"] = std::move(v);
    j["optimizer"] = std::move(oj);
  } else {
    j["optimizer"] = nullptr;
  }
  return j;
}

template <typename Real>
Transformer<Real> checkpoint_parse(const Json& j,
                                   AdamState<Real>* opt_out = nullptr) {
  const std::string where = "forecaster checkpoint";
  expect_keys(j, {"format", "format_version", "config", "tensors", "optimizer"},
              where);
  if (detail::need_field<std::string>(j, "format", where) !=
      "heatwarn-forecaster")
    throw DataError(where + ": wrong format tag");
  if (detail::need_field<int>(j, "format_version", where) != kFormatVersion)
    throw DataError(where + ": unsupported format version");
  if (!j.contains("config"))
    throw DataError(where + ": missing key \"config\"");
  Transformer<Real> model(forecaster_config_parse(j.at("config"), where));

  if (!j.contains("tensors") || !j.at("tensors").is_array())
    throw DataError(where + ": missing tensor list");
  const auto& tensors = j.at("tensors");
  if (tensors.size() != model.layout().tensors.size())
    throw DataError(where + ": tensor count does not match the layout");
  Real* p = model.params().data();
  for (const auto& tj : tensors) {
    expect_keys(tj, {"name", "shape", "data"}, where);
    const auto name = detail::need_field<std::string>(tj, "name", where);
    const TensorSpec* spec = model.layout().find(name);
    if (!spec) throw DataError(where + ": unknown tensor \"" + name + "\"");
    const auto shape = detail::need_field<std::vector<int>>(tj, "shape", where);
    if (shape != spec->shape)
      throw DataError(where + ": shape mismatch for \"" + name + "\"");
    const auto data =
        detail::need_field<std::vector<double>>(tj, "data", where);
    if (data.size() != spec->numel())
      throw DataError(where + ": data size mismatch for \"" + name + "\"");
    for (std::size_t i = 0; i < data.size(); ++i)
      p[spec->offset + i] = static_cast<Real>(data[i]);
  }
  model.mark_initialized();

  if (opt_out) {
    opt_out->reset(model.layout().total);
    if (j.contains("optimizer") && !j.at("optimizer").is_null()) {
      const auto& oj = j.at("optimizer");
      expect_keys(oj, {"step", "m", "v"}, where);
      opt_out->step = detail::need_field<long>(oj, "step", where);
      const auto m = detail::need_field<std::vector<double>>(oj, "m", where);
      const auto v = detail::need_field<std::vector<double>>(oj, "v", where);
      if (m.size() != model.layout().total || v.size() != model.layout().total)
        throw DataError(where + ": optimizer state size mismatch");
      for (std::size_t i = 0; i < m.size(); ++i) {
        opt_out->m[i] = static_cast<Real>(m[i]);
        opt_out->v[i] = static_cast<Real>(v[i]);
      }
    }
  }
  return model;
}

// ---------------- baseline fits ----------------

inline Json baseline_config_json(const GlmDesignConfig& c) {
  Json j;
  j["encoding"] = c.encoding == GlmEncoding::literal ? "literal"
                                                     : "categorical_harmonic";
  j["harmonics"] = c.harmonics;
  j["period"] = c.period;
  return j;
}

inline GlmDesignConfig baseline_config_parse(const Json& j,
                                             const std::string& where) {
  expect_keys(j, {"encoding", "harmonics", "period"}, where);
  GlmDesignConfig c;
  const auto enc =
      detail::get_field<std::string>(j, "encoding", "categorical_harmonic",
                                     where);
  if (enc == "literal")
    c.encoding = GlmEncoding::literal;
  else if (enc == "categorical_harmonic")
    c.encoding = GlmEncoding::categorical_harmonic;
  else
    throw DataError(where + ": unknown encoding \"" + enc + "\"");
  c.harmonics = detail::get_field(j, "harmonics", c.harmonics, where);
  c.period = detail::get_field(j, "period", c.period, where);
  if (c.harmonics < 0) throw DataError(where + ": harmonics must be >= 0");
  return c;
}

inline Json baseline_json(const GlmFit& fit) {
  Json j;
  j["format"] = "heatwarn-baseline";
  j["format_version"] = kFormatVersion;
  j["config"] = baseline_config_json(fit.config);
  j["beta"] = fit.beta;
  j["dispersion"] = fit.dispersion;
  j["train_start"] = format_date(fit.train_start);
  j["train_end"] = format_date(fit.train_end);
  return j;
}

inline GlmFit baseline_parse(const Json& j) {
  const std::string where = "baseline fit";
  expect_keys(j,
              {"format", "format_version", "config", "beta", "dispersion",
               "train_start", "train_end"},
              where);
  if (detail::need_field<std::string>(j, "format", where) !=
      "heatwarn-baseline")
    throw DataError(where + ": wrong format tag");
  if (detail::need_field<int>(j, "format_version", where) != kFormatVersion)
    throw DataError(where + ": unsupported format version");
  GlmFit fit;
  if (!j.contains("config"))
    throw DataError(where + ": missing key \"config\"");
  fit.config = baseline_config_parse(j.at("config"), where);
  fit.beta = detail::need_field<std::vector<double>>(j, "beta", where);
  if (fit.beta.size() != static_cast<std::size_t>(fit.config.width()))
    throw DataError(where + ": coefficient count does not match the design");
  fit.dispersion = detail::need_field<double>(j, "dispersion", where);
  fit.train_start =
      parse_date(detail::need_field<std::string>(j, "train_start", where));
  fit.train_end =
      parse_date(detail::need_field<std::string>(j, "train_end", where));
  return fit;
}

// ---------------- synthetic-world truth sidecar ----------------

inline Json truth_json(const WorldTruth& t) {
  Json j;
  j["format"] = "heatwarn-truth";
  j["format_version"] = kFormatVersion;
  j["start"] = format_date(t.start);
  Json events = Json::array();
  for (const auto& e : t.events) {
    Json ej;
    ej["start"] = format_date(e.start);
    ej["length"] = e.length;
    ej["multiplier"] = e.multiplier;
    ej["pattern"] = to_string(e.pattern);
    events.push_back(std::move(ej));
  }
  j["events"] = std::move(events);
  j["mu"] = t.mu;
  return j;
}

inline WorldTruth truth_parse(const Json& j) {
  const std::string where = "truth sidecar";
  expect_keys(j, {"format", "format_version", "start", "events", "mu"}, where);
  if (detail::need_field<std::string>(j, "format", where) != "heatwarn-truth")
    throw DataError(where + ": wrong format tag");
  if (detail::need_field<int>(j, "format_version", where) != kFormatVersion)
    throw DataError(where + ": unsupported format version");
  WorldTruth t;
  t.start = parse_date(detail::need_field<std::string>(j, "start", where));
  if (!j.contains("events") || !j.at("events").is_array())
    throw DataError(where + ": missing event list");
  for (const auto& ej : j.at("events")) {
    expect_keys(ej, {"start", "length", "multiplier", "pattern"}, where);
    SynthEvent e;
    e.start = parse_date(detail::need_field<std::string>(ej, "start", where));
    e.length = detail::need_field<int>(ej, "length", where);
    e.multiplier = detail::need_field<double>(ej, "multiplier", where);
    const auto pat = detail::need_field<std::string>(ej, "pattern", where);
    if (pat == "dry")
      e.pattern = SscPattern::dry;
    else if (pat == "mixed")
      e.pattern = SscPattern::mixed;
    else
      throw DataError(where + ": unknown pattern \"" + pat + "\"");
    t.events.push_back(e);
  }
  t.mu = detail::need_field<std::vector<double>>(j, "mu", where);
  return t;
}

// ---------------- CSV outputs ----------------

inline void write_events_csv(std::ostream& out,
                             const std::vector<HeatwaveEvent>& events) {
  out << "start,end,length\n";
  for (const auto& e : events)
    out << format_date(e.start) << ',' << format_date(e.end) << ',' << e.length
        << '\n';
}

inline void write_labels_csv(std::ostream& out,
                             const std::vector<HeatwaveEvent>& events,
                             const std::vector<EventLabel>& labels) {
  if (events.size() != labels.size())
    throw DataError("write_labels_csv: event/label count mismatch");
  out << "start,end,length,label,max_ratio\n";
  for (std::size_t i = 0; i < events.size(); ++i)
    out << format_date(events[i].start) << ',' << format_date(events[i].end)
        << ',' << events[i].length << ',' << to_string(labels[i].level) << ','
        << format_real(labels[i].max_ratio) << '\n';
}

inline void write_outcomes_csv(std::ostream& out,
                               const std::vector<EventOutcome>& outcomes,
                               const AlarmConfig& alarm = {}) {
  out << "event_start,event_end,alpha_l1,alpha_l2,max_ratio,"
         "alarm_l1,alarm_l2,label\n";
  for (const auto& o : outcomes)
    out << format_date(o.event.start) << ',' << format_date(o.event.end) << ','
        << format_real(alarm.alpha_l1) << ',' << format_real(alarm.alpha_l2)
        << ',' << format_real(o.max_forecast_ratio) << ','
        << (o.alarm_l1 ? 1 : 0) << ',' << (o.alarm_l2 ? 1 : 0) << ','
        << to_string(o.label) << '\n';
}

inline HeatwaveLevel parse_level(const std::string& s) {
  if (s == "L0") return HeatwaveLevel::L0;
  if (s == "L1") return HeatwaveLevel::L1;
  if (s == "L2") return HeatwaveLevel::L2;
  throw DataError("unknown level \"" + s + "\"");
}

inline std::vector<EventOutcome> read_outcomes_csv(const std::string& path) {
  std::vector<EventOutcome> out;
  for (const auto& row : detail::read_csv(path, 8).rows) {
    EventOutcome o;
    o.event.start = parse_date(row[0]);
    o.event.end = parse_date(row[1]);
    o.event.length =
        static_cast<int>(to_days(o.event.end) - to_days(o.event.start)) + 1;
    o.year = o.event.start.year;
    o.max_forecast_ratio = detail::parse_real(row[4], path);
    o.alarm_l1 = detail::parse_real(row[5], path) != 0.0;
    o.alarm_l2 = detail::parse_real(row[6], path) != 0.0;
    o.label = parse_level(row[7]);
    out.push_back(o);
  }
  return out;
}

inline void write_sweep_csv(std::ostream& out,
                            const std::vector<SweepPoint>& points) {
  out << "alpha,fpr,fnr\n";
  for (const auto& p : points) {
    out << format_real(p.alpha) << ',';
    if (p.fpr) out << format_real(*p.fpr);
    out << ',';
    if (p.fnr) out << format_real(*p.fnr);
    out << '\n';
  }
}

// ---------------- metrics ----------------

inline Json metrics_json(const ConfusionCounts& c) {
  const MetricSet m = metrics(c);
  Json j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["tn"] = c.tn;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision ? Json(*m.precision) : Json(nullptr);
  j["recall"] = m.recall ? Json(*m.recall) : Json(nullptr);
  j["f1"] = m.f1 ? Json(*m.f1) : Json(nullptr);
  return j;
}

inline Json run_metrics_json(const std::vector<EventOutcome>& outcomes) {
  Json j;
  j["format"] = "heatwarn-metrics";
  j["format_version"] = kFormatVersion;
  j["events"] = outcomes.size();
  j["l1"] = metrics_json(score_events(outcomes, false));
  j["l2"] = metrics_json(score_events(outcomes, true));
  return j;
}

// ---------------- run configuration ----------------

struct RegionPaths {
  std::string name = "region";
  RegionLevel level = RegionLevel::city;
  std::string mortality_csv, meteo_csv, ssc_csv, holidays_csv;
};

struct SweepGrid {
  double lo = 0.01, hi = 0.50, step = 0.001;
};

struct RunConfig {
  std::vector<RegionPaths> regions;   // file-backed input, or
  std::optional<WorldParams> synth;   // one synthetic world
  TransformerConfig forecaster;
  GlmDesignConfig baseline;
  AlarmConfig alarm;
  SweepGrid sweep;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
};

inline Json world_params_json(const WorldParams& p) {
  Json j;
  j["start_year"] = p.start_year;
  j["years"] = p.years;
  j["region_name"] = p.region_name;
  j["base_mortality"] = p.base_mortality;
  j["annual_amplitude"] = p.annual_amplitude;
  j["dow_effects"] = p.dow_effects;
  j["holiday_effect"] = p.holiday_effect;
  j["temp_mean"] = p.temp_mean;
  j["temp_amplitude"] = p.temp_amplitude;
  j["temp_noise_sd"] = p.temp_noise_sd;
  j["pressure_mean"] = p.pressure_mean;
  j["pressure_amplitude"] = p.pressure_amplitude;
  j["pressure_noise_sd"] = p.pressure_noise_sd;
  j["wind_mean"] = p.wind_mean;
  j["wind_noise_sd"] = p.wind_noise_sd;
  j["humidity_mean"] = p.humidity_mean;
  j["humidity_amplitude"] = p.humidity_amplitude;
  j["humidity_noise_sd"] = p.humidity_noise_sd;
  j["ar1_rho"] = p.ar1_rho;
  j["event_temp_boost"] = p.event_temp_boost;
  j["event_temp_slope"] = p.event_temp_slope;
  Json events = Json::array();
  for (const auto& e : p.events) {
    Json ej;
    ej["start"] = format_date(e.start);
    ej["length"] = e.length;
    ej["multiplier"] = e.multiplier;
    ej["pattern"] = to_string(e.pattern);
    events.push_back(std::move(ej));
  }
  j["events"] = std::move(events);
  return j;
}

inline WorldParams world_params_parse(const Json& j) {
  const std::string where = "synth params";
  expect_keys(j,
              {"start_year", "years", "region_name", "base_mortality",
               "annual_amplitude", "dow_effects", "holiday_effect",
               "temp_mean", "temp_amplitude", "temp_noise_sd", "pressure_mean",
               "pressure_amplitude", "pressure_noise_sd", "wind_mean",
               "wind_noise_sd", "humidity_mean", "humidity_amplitude",
               "humidity_noise_sd", "ar1_rho", "event_temp_boost",
               "event_temp_slope", "events"},
              where);
  WorldParams p;
  p.start_year = detail::get_field(j, "start_year", p.start_year, where);
  p.years = detail::get_field(j, "years", p.years, where);
  p.region_name = detail::get_field(j, "region_name", p.region_name, where);
  p.base_mortality =
      detail::get_field(j, "base_mortality", p.base_mortality, where);
  p.annual_amplitude =
      detail::get_field(j, "annual_amplitude", p.annual_amplitude, where);
  p.dow_effects = detail::get_field(j, "dow_effects", p.dow_effects, where);
  p.holiday_effect =
      detail::get_field(j, "holiday_effect", p.holiday_effect, where);
  p.temp_mean = detail::get_field(j, "temp_mean", p.temp_mean, where);
  p.temp_amplitude =
      detail::get_field(j, "temp_amplitude", p.temp_amplitude, where);
  p.temp_noise_sd =
      detail::get_field(j, "temp_noise_sd", p.temp_noise_sd, where);
  p.pressure_mean =
      detail::get_field(j, "pressure_mean", p.pressure_mean, where);
  p.pressure_amplitude =
      detail::get_field(j, "pressure_amplitude", p.pressure_amplitude, where);
  p.pressure_noise_sd =
      detail::get_field(j, "pressure_noise_sd", p.pressure_noise_sd, where);
  p.wind_mean = detail::get_field(j, "wind_mean", p.wind_mean, where);
  p.wind_noise_sd =
      detail::get_field(j, "wind_noise_sd", p.wind_noise_sd, where);
  p.humidity_mean =
      detail::get_field(j, "humidity_mean", p.humidity_mean, where);
  p.humidity_amplitude =
      detail::get_field(j, "humidity_amplitude", p.humidity_amplitude, where);
  p.humidity_noise_sd =
      detail::get_field(j, "humidity_noise_sd", p.humidity_noise_sd, where);
  p.ar1_rho = detail::get_field(j, "ar1_rho", p.ar1_rho, where);
  p.event_temp_boost =
      detail::get_field(j, "event_temp_boost", p.event_temp_boost, where);
  p.event_temp_slope =
      detail::get_field(j, "event_temp_slope", p.event_temp_slope, where);
  if (j.contains("events")) {
    if (!j.at("events").is_array())
      throw DataError(where + ": events must be an array");
    for (const auto& ej : j.at("events")) {
      expect_keys(ej, {"start", "length", "multiplier", "pattern"}, where);
      SynthEvent e;
      e.start =
          parse_date(detail::need_field<std::string>(ej, "start", where));
      e.length = detail::need_field<int>(ej, "length", where);
      e.multiplier = detail::need_field<double>(ej, "multiplier", where);
      const auto pat = detail::need_field<std::string>(ej, "pattern", where);
      if (pat == "dry")
        e.pattern = SscPattern::dry;
      else if (pat == "mixed")
        e.pattern = SscPattern::mixed;
      else
        throw DataError(where + ": unknown pattern \"" + pat + "\"");
      p.events.push_back(e);
    }
  }
  p.validate();
  return p;
}

inline RunConfig run_config_parse(const Json& j) {
  const std::string where = "run config";
  expect_keys(j,
              {"regions", "synth", "forecaster", "baseline", "alarm", "sweep",
               "out", "seed"},
              where);
  RunConfig cfg;
  if (j.contains("regions")) {
    if (!j.at("regions").is_array())
      throw DataError(where + ": regions must be an array");
    for (const auto& rj : j.at("regions")) {
      expect_keys(rj,
                  {"name", "level", "mortality_csv", "meteo_csv", "ssc_csv",
                   "holidays_csv"},
                  where);
      RegionPaths r;
      r.name = detail::get_field(rj, "name", r.name, where);
      const auto level =
          detail::get_field<std::string>(rj, "level", "city", where);
      if (level == "city")
        r.level = RegionLevel::city;
      else if (level == "province")
        r.level = RegionLevel::province;
      else
        throw DataError(where + ": unknown region level \"" + level + "\"");
      r.mortality_csv =
          detail::need_field<std::string>(rj, "mortality_csv", where);
      r.meteo_csv = detail::get_field<std::string>(rj, "meteo_csv", "", where);
      r.ssc_csv = detail::get_field<std::string>(rj, "ssc_csv", "", where);
      r.holidays_csv =
          detail::get_field<std::string>(rj, "holidays_csv", "", where);
      cfg.regions.push_back(std::move(r));
    }
  }
  if (j.contains("synth")) cfg.synth = world_params_parse(j.at("synth"));
  if (!cfg.regions.empty() && cfg.synth)
    throw DataError(where + ": choose either regions or synth, not both");
  if (j.contains("forecaster"))
    cfg.forecaster = forecaster_config_parse(j.at("forecaster"), where);
  if (j.contains("baseline"))
    cfg.baseline = baseline_config_parse(j.at("baseline"), where);
  if (j.contains("alarm")) {
    const auto& aj = j.at("alarm");
    expect_keys(aj, {"alpha_l1", "alpha_l2"}, where);
    cfg.alarm.alpha_l1 =
        detail::get_field(aj, "alpha_l1", cfg.alarm.alpha_l1, where);
    cfg.alarm.alpha_l2 =
        detail::get_field(aj, "alpha_l2", cfg.alarm.alpha_l2, where);
    cfg.alarm.validate();
  }
  if (j.contains("sweep")) {
    const auto& sj = j.at("sweep");
    expect_keys(sj, {"lo", "hi", "step"}, where);
    cfg.sweep.lo = detail::get_field(sj, "lo", cfg.sweep.lo, where);
    cfg.sweep.hi = detail::get_field(sj, "hi", cfg.sweep.hi, where);
    cfg.sweep.step = detail::get_field(sj, "step", cfg.sweep.step, where);
  }
  cfg.out_dir = detail::get_field<std::string>(j, "out", cfg.out_dir, where);
  cfg.seed = detail::get_field(j, "seed", cfg.seed, where);
  // one seed drives every random draw in the run
  if (cfg.synth) cfg.synth->seed = cfg.seed;
  cfg.forecaster.seed = cfg.seed;
  return cfg;
}

// ---------------- manifest ----------------

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return s;
}

inline Json manifest_json(std::string_view config_text, std::uint64_t seed,
                          std::vector<std::string> outputs) {
  std::sort(outputs.begin(), outputs.end());
  Json j;
  j["format"] = "heatwarn-manifest";
  j["format_version"] = kFormatVersion;
  j["config_hash"] = hex64(fnv1a64(config_text));
  j["seed"] = seed;
  j["outputs"] = std::move(outputs);
  return j;
}

}  // namespace heatwarn
