#include "pafit/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include "pafit/bo_infer.hpp"
#include "pafit/error.hpp"
#include "pafit/file_util.hpp"
#include "pafit/rng.hpp"

namespace pafit {

using nlohmann::json;

namespace {

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(path + "/" + key, "required field missing");
  return obj.at(key);
}

double as_real(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
  return x;
}

std::uint64_t as_count(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) throw ConfigError(path, "expected a non-negative integer");
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x >= 0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
  }
  throw ConfigError(path, "expected a non-negative integer");
}

std::vector<double> as_real_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_real(v[i], path + "/" + std::to_string(i)));
  return out;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw ConfigError(path + "/" + key, "unknown field");
  }
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Runs task(i) for i in [0, count) on the worker pool; the first exception is rethrown.
template <typename F>
void parallel_for(std::size_t count, F task) {
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
        return;
      }
    }
  };
  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

std::vector<std::string> hpam_parameter_names(Community K) {
  std::vector<std::string> names;
  for (Community j = 1; j <= K; ++j) names.push_back("pi" + std::to_string(j));
  for (Community i = 1; i <= K; ++i)
    for (Community j = i; j <= K; ++j)
      if (i != 1 || j != 1) names.push_back("gamma" + std::to_string(i) + std::to_string(j));
  return names;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (model != Model::BO && model != Model::HPAM) throw ConfigError("/model", "must be BO or HPAM");
  if (model == Model::BO) {
    if (bo_a.empty()) throw ConfigError("/true_params/a", "at least one value required");
    for (std::size_t i = 0; i < bo_a.size(); ++i)
      if (!(bo_a[i] > 0.0)) throw ConfigError("/true_params/a/" + std::to_string(i), "must be positive");
  } else if (!hpam) {
    throw ConfigError("/true_params", "pi and gamma required for HPAM");
  }
  if (sample_sizes.empty()) throw ConfigError("/sample_sizes", "at least one sample size required");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] < 2) throw ConfigError("/sample_sizes/" + std::to_string(i), "must be at least 2");
    if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1])
      throw ConfigError("/sample_sizes/" + std::to_string(i), "sample sizes must be strictly increasing");
  }
  if (replications < 1) throw ConfigError("/replications", "must be at least 1");
  if (!(domain.eps > 0.0 && domain.eps < domain.max && std::isfinite(domain.max)))
    throw ConfigError("/domain", "must satisfy 0 < eps < max");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  reject_unknown(doc,
                 {"model", "true_params", "sample_sizes", "replications", "base_seed", "output_path", "domain",
                  "denominator"},
                 "");

  ExperimentConfig c;
  const json& model = field(doc, "model", "");
  if (!model.is_string()) throw ConfigError("/model", "expected a string");
  const std::string m = lower(model.get<std::string>());
  if (m == "bo")
    c.model = Model::BO;
  else if (m == "hpam")
    c.model = Model::HPAM;
  else
    throw ConfigError("/model", "must be BO or HPAM");

  const json& tp = field(doc, "true_params", "");
  if (!tp.is_object()) throw ConfigError("/true_params", "expected an object");
  if (c.model == Model::BO) {
    reject_unknown(tp, {"a"}, "/true_params");
    const json& a = field(tp, "a", "/true_params");
    c.bo_a = a.is_array() ? as_real_list(a, "/true_params/a") : std::vector<double>{as_real(a, "/true_params/a")};
  } else {
    reject_unknown(tp, {"pi", "gamma"}, "/true_params");
    auto pi = as_real_list(field(tp, "pi", "/true_params"), "/true_params/pi");
    auto gamma = as_real_list(field(tp, "gamma", "/true_params"), "/true_params/gamma");
    try {
      c.hpam.emplace(std::move(pi), std::move(gamma));
    } catch (const Error& e) {
      throw ConfigError("/true_params", e.what());
    }
  }

  const json& sizes = field(doc, "sample_sizes", "");
  if (!sizes.is_array()) throw ConfigError("/sample_sizes", "expected an array");
  for (std::size_t i = 0; i < sizes.size(); ++i)
    c.sample_sizes.push_back(as_count(sizes[i], "/sample_sizes/" + std::to_string(i)));
  c.replications = as_count(field(doc, "replications", ""), "/replications");
  c.base_seed = as_count(field(doc, "base_seed", ""), "/base_seed");
  const json& out = field(doc, "output_path", "");
  if (!out.is_string() || out.get<std::string>().empty()) throw ConfigError("/output_path", "expected a path string");
  c.output_path = out.get<std::string>();

  if (doc.contains("domain")) {
    const json& d = doc.at("domain");
    if (!d.is_object()) throw ConfigError("/domain", "expected an object");
    reject_unknown(d, {"eps", "max"}, "/domain");
    if (d.contains("eps")) c.domain.eps = as_real(d.at("eps"), "/domain/eps");
    if (d.contains("max")) c.domain.max = as_real(d.at("max"), "/domain/max");
  }
  if (doc.contains("denominator")) {
    const json& d = doc.at("denominator");
    const std::string v = d.is_string() ? d.get<std::string>() : "";
    if (v == "exact")
      c.denominator = Denominator::exact;
    else if (v == "scaled")
      c.denominator = Denominator::scaled;
    else
      throw ConfigError("/denominator", "must be \"exact\" or \"scaled\"");
  }
  c.validate();
  return c;
}

ExperimentConfig read_experiment_config(const std::string& path) { return parse_experiment_config(read_file(path)); }

std::string experiment_config_to_json(const ExperimentConfig& c) {
  json doc;
  doc["model"] = model_name(c.model);
  if (c.model == Model::BO) {
    doc["true_params"] = {{"a", c.bo_a}};
  } else if (c.hpam) {
    doc["true_params"] = {{"pi", std::vector<double>(c.hpam->pi().begin(), c.hpam->pi().end())},
                          {"gamma", std::vector<double>(c.hpam->gamma().begin(), c.hpam->gamma().end())}};
  }
  doc["sample_sizes"] = c.sample_sizes;
  doc["replications"] = c.replications;
  doc["base_seed"] = c.base_seed;
  doc["output_path"] = c.output_path;
  doc["domain"] = {{"eps", c.domain.eps}, {"max", c.domain.max}};
  doc["denominator"] = c.denominator == Denominator::exact ? "exact" : "scaled";
  return doc.dump();
}

std::string experiment_tag(const ExperimentConfig& config, std::size_t true_index) {
  if (config.model == Model::BO) return "BO/a=" + format_real(config.bo_a.at(true_index));
  std::string tag = "HPAM/pi=";
  for (double p : config.hpam->pi()) tag += format_real(p) + ",";
  tag += "gamma=";
  for (double g : config.hpam->gamma()) tag += format_real(g) + ",";
  return tag;
}

ExperimentResult run_bo_experiment(const ExperimentConfig& config) {
  config.validate();
  require(config.model == Model::BO, ErrorCode::invalid_argument, "not a BO experiment");
  const std::size_t A = config.bo_a.size(), S = config.sample_sizes.size(), R = config.replications;
  std::vector<std::string> tags;
  for (std::size_t t = 0; t < A; ++t) tags.push_back(experiment_tag(config, t));

  std::vector<RawEstimate> raw(A * S * R);
  parallel_for(raw.size(), [&](std::size_t idx) {
    const std::size_t t = idx / (S * R), s = (idx / R) % S, r = idx % R;
    const std::uint64_t n = config.sample_sizes[s];
    const double a0 = config.bo_a[t];
    const auto history = simulate_bo(n, a0, derive_seed(config.base_seed, tags[t], n, r));
    const auto fit = bo_mle(degree_counts(history), config.domain);
    raw[idx] = RawEstimate{n, r, "a", a0, fit.a_hat, fit.converged};
  });

  ExperimentResult result;
  result.raw = std::move(raw);
  for (const auto& row : result.raw)
    if (!row.converged)
      result.warnings.push_back("non-converged fit at a0=" + format_real(row.true_value) + " n=" +
                                std::to_string(row.n) + " replication " + std::to_string(row.replication));
  result.summary = summarize(result.raw, &result.warnings);
  return result;
}

ExperimentResult run_hpam_experiment(const ExperimentConfig& config) {
  config.validate();
  require(config.model == Model::HPAM, ErrorCode::invalid_argument, "not an HPAM experiment");
  const HpamParams& truth = *config.hpam;
  const HpamParams truth_n = truth.normalized();
  const Community K = truth.K();
  const auto names = hpam_parameter_names(K);
  const std::size_t P = names.size(), S = config.sample_sizes.size(), R = config.replications;
  const std::string tag = experiment_tag(config);

  std::vector<double> true_values;
  for (Community j = 0; j < K; ++j) true_values.push_back(truth.pi(j));
  for (Community i = 0; i < K; ++i)
    for (Community j = i; j < K; ++j)
      if (i != 0 || j != 0) true_values.push_back(truth_n.gamma(i, j));

  std::vector<RawEstimate> raw(S * R * P);
  GammaFitOptions options;
  options.mode = config.denominator;
  parallel_for(S * R, [&](std::size_t idx) {
    const std::size_t s = idx / R, r = idx % R;
    const std::uint64_t n = config.sample_sizes[s];
    const auto history = simulate_hpam(n, truth, derive_seed(config.base_seed, tag, n, r));
    const auto fit = hpam_mle(community_stats(history), options);
    std::size_t p = 0;
    for (Community j = 0; j < K; ++j, ++p)
      raw[idx * P + p] = RawEstimate{n, r, names[p], true_values[p], fit.pi_hat[j], true};
    for (Community i = 0; i < K; ++i)
      for (Community j = i; j < K; ++j) {
        if (i == 0 && j == 0) continue;
        raw[idx * P + p] = RawEstimate{n, r, names[p], true_values[p], fit.gamma_hat[i * K + j], fit.converged};
        ++p;
      }
  });

  ExperimentResult result;
  result.raw = std::move(raw);
  for (std::size_t i = 0; i < result.raw.size(); i += P) {
    const bool ok = std::all_of(result.raw.begin() + static_cast<std::ptrdiff_t>(i),
                                result.raw.begin() + static_cast<std::ptrdiff_t>(i + P),
                                [](const RawEstimate& e) { return e.converged; });
    if (!ok)
      result.warnings.push_back("non-converged gamma fit at n=" + std::to_string(result.raw[i].n) + " replication " +
                                std::to_string(result.raw[i].replication));
  }
  result.summary = summarize(result.raw, &result.warnings);
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  return config.model == Model::BO ? run_bo_experiment(config) : run_hpam_experiment(config);
}

std::vector<SummaryRow> summarize(const std::vector<RawEstimate>& raw, std::vector<std::string>* warnings) {
  using Key = std::tuple<double, std::uint64_t, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<const RawEstimate*>> groups;
  for (const auto& row : raw) {
    Key key{row.true_value, row.n, row.parameter};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&row);
  }

  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    auto rows = groups.at(key);
    // Reduce in replication order so the result is independent of scheduling.
    std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->replication < b->replication; });
    SummaryRow s;
    std::tie(s.true_value, s.n, s.parameter) = key;
    std::vector<double> values;
    for (const auto* r : rows) {
      if (r->converged)
        values.push_back(r->value);
      else
        ++s.nonconverged;
    }
    s.count = values.size();
    if (!values.empty()) {
      s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
      double ss = 0.0;
      for (double v : values) ss += (v - s.mean) * (v - s.mean);
      s.std = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
      std::sort(values.begin(), values.end());
      const std::size_t m = values.size() / 2;
      s.median = values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
    }
    if (warnings && s.count == 1)
      warnings->push_back("single replication for " + s.parameter + " at n=" + std::to_string(s.n) +
                          "; std reported as 0");
    if (warnings && s.count == 0)
      warnings->push_back("no converged replication for " + s.parameter + " at n=" + std::to_string(s.n));
    out.push_back(std::move(s));
  }
  return out;
}

std::string raw_estimates_csv(const std::vector<RawEstimate>& raw) {
  std::string out = "n,replication,parameter,true_value,value,converged\n";
  for (const auto& r : raw) {
    out += std::to_string(r.n) + ',' + std::to_string(r.replication) + ',' + r.parameter + ',' +
           format_real(r.true_value) + ',' + format_real(r.value) + ',' + (r.converged ? "1" : "0") + '\n';
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "n,parameter,true_value,mean,median,std,count,nonconverged\n";
  for (const auto& s : rows) {
    out += std::to_string(s.n) + ',' + s.parameter + ',' + format_real(s.true_value) + ',' + format_real(s.mean) +
           ',' + format_real(s.median) + ',' + format_real(s.std) + ',' + std::to_string(s.count) + ',' +
           std::to_string(s.nonconverged) + '\n';
  }
  return out;
}

std::vector<RawEstimate> parse_raw_estimates_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) fail(ErrorCode::empty_data, "empty raw estimates file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "n,replication,parameter,true_value,value,converged", ErrorCode::parse,
          "line 1: unexpected raw estimates header");
  std::vector<RawEstimate> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    require(cells.size() == 6, ErrorCode::parse, where + "expected 6 fields");
    RawEstimate r;
    auto int_cell = [&](std::string_view c, auto& dst) {
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), dst);
      require(ec == std::errc() && p == c.data() + c.size(), ErrorCode::parse, where + "bad integer");
    };
    auto real_cell = [&](std::string_view c) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      require(ec == std::errc() && p == c.data() + c.size(), ErrorCode::parse, where + "bad number");
      return v;
    };
    int_cell(cells[0], r.n);
    int_cell(cells[1], r.replication);
    r.parameter = std::string(cells[2]);
    r.true_value = real_cell(cells[3]);
    r.value = real_cell(cells[4]);
    require(cells[5] == "0" || cells[5] == "1", ErrorCode::parse, where + "converged must be 0 or 1");
    r.converged = cells[5] == "1";
    out.push_back(std::move(r));
  }
  return out;
}

void write_experiment_outputs(const ExperimentResult& result, const std::string& dir) {
  const std::filesystem::path base(dir);
  write_file_atomic((base / "raw_estimates.csv").string(), raw_estimates_csv(result.raw));
  write_file_atomic((base / "summary.csv").string(), summary_csv(result.summary));
}

std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PA_THREADS")) {
    std::size_t cap = 0;
    const std::string_view v(env);
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), cap);
    // An explicit setting wins (bounded), so the worker count can be forced either way.
    if (ec == std::errc() && p == v.data() + v.size() && cap >= 1) n = std::min<std::size_t>(cap, 256);
  }
  return n;
}

NormalityReport normality_diagnostic(const std::vector<double>& estimates, std::uint64_t n, double a0) {
  require(estimates.size() >= 50, ErrorCode::invalid_argument,
          "normality diagnostic needs at least 50 estimates, got " + std::to_string(estimates.size()));
  require(n >= 1, ErrorCode::invalid_argument, "n must be positive");
  NormalityReport rep;
  rep.count = estimates.size();
  const auto sb = sigma2_beta(a0);
  rep.sigma2 = sb.sigma2;
  rep.beta = sb.beta;
  const double scale = std::sqrt(static_cast<double>(n)) * sb.beta / std::sqrt(sb.sigma2);

  std::vector<double> z;
  for (double a : estimates) z.push_back((a - a0) * scale);
  const double R = static_cast<double>(z.size());
  rep.mean = std::accumulate(z.begin(), z.end(), 0.0) / R;
  double ss = 0.0;
  for (double v : z) ss += (v - rep.mean) * (v - rep.mean);
  rep.std = std::sqrt(ss / (R - 1));
  std::sort(z.begin(), z.end());
  rep.degenerate = z.front() == z.back();

  const boost::math::normal_distribution<double> normal;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double F = boost::math::cdf(normal, z[i]);
    rep.ks_distance = std::max({rep.ks_distance, static_cast<double>(i + 1) / R - F, F - static_cast<double>(i) / R});
    rep.qq.emplace_back(boost::math::quantile(normal, (static_cast<double>(i) + 0.5) / R), z[i]);
  }
  return rep;
}

}  // namespace pafit
