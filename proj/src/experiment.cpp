#include "olac/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "olac/csv.hpp"
#include "olac/instance_io.hpp"
#include "olac/rng.hpp"

namespace olac {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

ControllerConfig parse_controller(json node, std::string& label) {
  if (node.is_string()) node = json{{"kind", node}};
  if (!node.is_object()) throw ScenarioError("controller entries must be objects or names");
  ControllerConfig cfg;
  cfg.kind = parse_controller_kind(node.at("kind").get<std::string>());
  label = node.value("label", std::string(to_string(cfg.kind)));
  if (node.contains("theta")) {
    const json& theta = node.at("theta");
    if (theta.is_array()) {
      const auto values = theta.get<std::vector<double>>();
      cfg.theta = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    } else {
      throw ScenarioError("theta must be an array with one entry per queue");
    }
  }
  cfg.theta_log_base = node.value("theta_log_base", cfg.theta_log_base);
  cfg.c = node.value("c", cfg.c);
  cfg.relearn_period = node.value("relearn_period", cfg.relearn_period);
  if (node.contains("discipline")) {
    std::string d = node.at("discipline").get<std::string>();
    std::transform(d.begin(), d.end(), d.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (d == "fifo") {
      cfg.discipline = Discipline::kFifo;
    } else if (d == "lifo") {
      cfg.discipline = Discipline::kLifo;
    } else {
      throw ScenarioError("discipline must be \"fifo\" or \"lifo\"");
    }
  }
  return cfg;
}

std::string v_tag(double V) { return format_number(V); }

std::vector<std::string> indexed(const std::string& stem, int r) {
  std::vector<std::string> out;
  for (int j = 1; j <= r; ++j) out.push_back(stem + "_" + std::to_string(j));
  return out;
}

struct Job {
  std::size_t controller = 0;
  std::size_t v_index = 0;
  std::uint64_t seed = 0;
};

struct JobResult {
  std::optional<RunResult> result;
  std::string error;
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

struct Moments {
  double sum = 0;
  double sum_sq = 0;
  int n = 0;

  void add(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return;
    sum += *v;
    sum_sq += *v * *v;
    ++n;
  }
  std::optional<double> mean() const { return n ? std::optional<double>(sum / n) : std::nullopt; }
  std::optional<double> stderr_of_mean() const {
    if (n < 2) return std::nullopt;
    const double m = sum / n;
    const double var = std::max(0.0, (sum_sq - n * m * m) / (n - 1));
    return std::sqrt(var / n);
  }
};

std::optional<double> cell(const CsvTable& table, const std::vector<std::string>& row, const std::string& name) {
  try {
    return parse_number(row[table.column(name)]);
  } catch (const std::invalid_argument& e) {
    throw CsvError(std::string("column '") + name + "': " + e.what(), 0);
  }
}

}  // namespace

Scenario parse_scenario(const std::string& text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioError("scenario must be a JSON object");
  Scenario sc;
  try {
    sc.name = doc.value("name", sc.name);
    const json& inst = doc.at("instance");
    if (inst.contains("builtin")) {
      sc.instance.builtin = inst.at("builtin").get<std::string>();
      if (sc.instance.builtin != "two_queue") throw ScenarioError("unknown builtin instance '" + sc.instance.builtin + "'");
      if (inst.contains("channel_dist")) {
        const auto dist = inst.at("channel_dist").get<std::vector<double>>();
        if (dist.size() != 4) throw ScenarioError("channel_dist needs 4 entries");
        std::copy(dist.begin(), dist.end(), sc.instance.channel_dist.begin());
      }
    } else if (inst.contains("file")) {
      fs::path file = inst.at("file").get<std::string>();
      sc.instance.file = file.is_relative() ? base_dir / file : file;
    } else {
      throw ScenarioError("instance needs \"builtin\" or \"file\"");
    }
    for (const auto& node : doc.at("controllers")) {
      std::string label;
      sc.controllers.push_back(parse_controller(node, label));
      sc.labels.push_back(label);
    }
    sc.V_values = doc.at("V_values").get<std::vector<double>>();
    const json& seeds = doc.at("seeds");
    if (seeds.is_number_integer()) {
      const auto count = seeds.get<long long>();
      for (long long s = 1; s <= count; ++s) sc.seeds.push_back(static_cast<std::uint64_t>(s));
    } else {
      sc.seeds = seeds.get<std::vector<std::uint64_t>>();
    }
    sc.horizon = doc.value("horizon", sc.horizon);
    if (doc.contains("zeta")) {
      const json& z = doc.at("zeta");
      if (z.is_string() && z.get<std::string>() == "auto_Dp") {
        sc.zeta.reset();
      } else if (z.is_object() && z.contains("absolute")) {
        sc.zeta = z.at("absolute").get<double>();
      } else {
        throw ScenarioError("zeta must be \"auto_Dp\" or {\"absolute\": value}");
      }
    }
    if (doc.contains("output")) {
      fs::path out = doc.at("output").get<std::string>();
      sc.output = out;
    }
    sc.trace = doc.value("trace", sc.trace);
    sc.trace_period = doc.value("trace_period", sc.trace_period);
    sc.assumption_check = doc.value("assumption_check", sc.assumption_check);
    sc.perturbation_count = doc.value("perturbation_count", sc.perturbation_count);
    sc.epsilon_s = doc.value("epsilon_s", sc.epsilon_s);
    sc.workers = doc.value("workers", sc.workers);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario field error: ") + e.what());
  }
  if (sc.controllers.empty()) throw ScenarioError("controllers must not be empty");
  if (sc.V_values.empty()) throw ScenarioError("V_values must not be empty");
  if (sc.seeds.empty()) throw ScenarioError("seeds must not be empty");
  if (sc.horizon < 1) throw ScenarioError("horizon must be >= 1");
  if (sc.trace_period < 1) throw ScenarioError("trace_period must be >= 1");
  if (sc.perturbation_count < 0) throw ScenarioError("perturbation_count must be >= 0");
  if (!(sc.epsilon_s > 0)) throw ScenarioError("epsilon_s must be > 0");
  if (sc.zeta && !(*sc.zeta > 0)) throw ScenarioError("zeta must be > 0");
  for (double V : sc.V_values) {
    if (!(V >= 1)) throw ScenarioError("every V must be >= 1");
  }
  return sc;
}

Scenario load_scenario_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), path.parent_path());
}

NetworkInstance<double> load_scenario_instance(const InstanceSource& source) {
  if (!source.builtin.empty()) return build_two_queue_example(source.channel_dist);
  return load_instance_file(source.file.string());
}

AssumptionCheck check_slack_ball(const NetworkInstance<double>& instance, double epsilon_s, int count,
                                 std::uint64_t seed) {
  const Eigen::VectorXd& pi = instance.probabilities();
  const Eigen::Index M = pi.size();
  AssumptionCheck check;
  check.epsilon_s = epsilon_s;
  check.nominal_slack = max_slack(instance, pi);
  check.min_slack = check.nominal_slack;
  auto engine = make_stream(seed, 1);
  for (int n = 0; n < count; ++n) {
    Eigen::VectorXd d(M);
    for (Eigen::Index i = 0; i < M; ++i) d(i) = standard_normal(engine);
    d.array() -= d.mean();
    const double norm = d.norm();
    const double u = uniform01(engine);
    if (!(norm > 0)) continue;
    d /= norm;
    double radius = epsilon_s * u;
    for (Eigen::Index i = 0; i < M; ++i) {
      if (d(i) < 0) radius = std::min(radius, pi(i) / -d(i));
    }
    Eigen::VectorXd perturbed = (pi + radius * d).cwiseMax(0.0);
    perturbed /= perturbed.sum();
    check.min_slack = std::min(check.min_slack, max_slack(instance, perturbed));
    ++check.perturbations;
  }
  return check;
}

std::vector<std::string> summary_header(int r) {
  std::vector<std::string> h{"controller", "kind", "V", "seed", "horizon", "status", "avg_cost", "avg_backlog",
                             "mean_delay"};
  for (auto& c : indexed("delivered_rate", r)) h.push_back(c);
  for (const char* c : {"stuck_backlog", "zeta", "T_zeta_first", "T_zeta_sustained", "T_l"}) h.emplace_back(c);
  for (auto& c : indexed("dropped", r)) h.push_back(c);
  h.emplace_back("dropped_total");
  for (auto& c : indexed("theta", r)) h.push_back(c);
  for (const char* c : {"c", "dual_solves", "unconverged_solves", "final_backlog", "trace_file"}) h.emplace_back(c);
  return h;
}

ScenarioOutcome run_scenario(const Scenario& sc) {
  ScenarioOutcome outcome;
  const NetworkInstance<double> instance = load_scenario_instance(sc.instance);
  const int r = instance.queue_count();
  fs::create_directories(sc.output);

  std::vector<std::optional<OracleReport>> oracles(sc.V_values.size());
  std::vector<std::string> oracle_errors(sc.V_values.size());
  for (std::size_t v = 0; v < sc.V_values.size(); ++v) {
    try {
      oracles[v] = compute_oracle(instance, sc.V_values[v]);
      if (oracles[v]->constants.valid()) continue;
      oracle_errors[v] = "analysis constants undefined (slack or rho_hat not positive)";
      if (!sc.zeta) oracles[v].reset();
    } catch (const std::exception& e) {
      oracle_errors[v] = e.what();
    }
  }

  std::vector<Job> jobs;
  for (std::size_t c = 0; c < sc.controllers.size(); ++c) {
    for (std::size_t v = 0; v < sc.V_values.size(); ++v) {
      for (std::uint64_t seed : sc.seeds) jobs.push_back({c, v, seed});
    }
  }
  std::vector<JobResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      if (!oracles[job.v_index]) {
        results[i].error = "oracle failed: " + oracle_errors[job.v_index];
        continue;
      }
      try {
        SimConfig cfg;
        cfg.horizon = sc.horizon;
        cfg.seed = job.seed;
        cfg.controller = sc.controllers[job.controller];
        cfg.controller.V = sc.V_values[job.v_index];
        cfg.zeta = sc.zeta ? *sc.zeta : oracles[job.v_index]->constants.D_p;
        cfg.trace = sc.trace;
        cfg.metric_sample_period = sc.trace_period;
        results[i].result = run(instance, cfg, oracles[job.v_index]->gamma_star);
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(sc.workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  {
    const fs::path path = sc.output / "oracle.csv";
    auto out = open_output(path);
    CsvWriter csv(out);
    std::vector<std::string> header{"V", "f_av_star", "g_star", "g_star_over_V"};
    for (auto& c : indexed("gamma_star", r)) header.push_back(c);
    for (const char* c : {"eta_0", "rho_hat", "eta", "B", "D_p", "dual_converged", "error"}) header.emplace_back(c);
    csv.row(header);
    for (std::size_t v = 0; v < sc.V_values.size(); ++v) {
      std::vector<std::string> row{format_number(sc.V_values[v])};
      if (oracles[v]) {
        const auto& o = *oracles[v];
        row.push_back(format_number(o.f_av_star));
        row.push_back(format_number(o.g_star));
        row.push_back(format_number(o.g_star / o.V));
        for (int j = 0; j < r; ++j) row.push_back(format_number(o.gamma_star(j)));
        row.push_back(format_number(o.eta0));
        row.push_back(format_number(o.constants.rho_hat));
        row.push_back(format_number(o.constants.eta));
        row.push_back(format_number(o.constants.B));
        row.push_back(format_number(o.constants.D_p));
        row.push_back(o.dual_converged ? "1" : "0");
        outcome.oracles.push_back(o);
      } else {
        row.resize(row.size() + 3 + static_cast<std::size_t>(r) + 6);
      }
      row.push_back(oracle_errors[v]);
      csv.row(row);
    }
    outcome.files.push_back(path.string());
  }

  if (sc.trace) fs::create_directories(sc.output / "traces");
  {
    const fs::path path = sc.output / "summary.csv";
    auto out = open_output(path);
    CsvWriter csv(out);
    csv.row(summary_header(r));
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const Job& job = jobs[i];
      const ControllerConfig& cc = sc.controllers[job.controller];
      const double V = sc.V_values[job.v_index];
      std::vector<std::string> row{sc.labels[job.controller], to_string(cc.kind), format_number(V),
                                   std::to_string(job.seed), std::to_string(sc.horizon)};
      if (!results[i].result) {
        row.push_back("error");
        row.resize(summary_header(r).size());
        csv.row(row);
        outcome.failures.push_back({sc.labels[job.controller], V, job.seed, results[i].error});
        continue;
      }
      const RunResult& res = *results[i].result;
      row.push_back("ok");
      row.push_back(format_number(res.avg_cost));
      row.push_back(format_number(res.avg_backlog));
      row.push_back(format_optional(res.delay.mean_delay));
      for (int j = 0; j < r; ++j) row.push_back(format_number(res.delay.delivered_rate(j)));
      row.push_back(format_number(res.delay.stuck_backlog.sum()));
      row.push_back(format_number(res.zeta));
      row.push_back(res.T_zeta ? std::to_string(*res.T_zeta) : "");
      row.push_back(res.T_zeta_sustained ? std::to_string(*res.T_zeta_sustained) : "");
      row.push_back(res.T_l ? std::to_string(*res.T_l) : "");
      for (int j = 0; j < r; ++j) row.push_back(format_number(res.dropped(j)));
      row.push_back(format_number(res.dropped.sum()));
      const bool olac = cc.kind == ControllerKind::kOlac;
      ControllerConfig at_v = cc;
      at_v.V = V;
      const Eigen::VectorXd theta = olac ? resolved_theta(at_v, r) : Eigen::VectorXd();
      for (int j = 0; j < r; ++j) row.push_back(olac ? format_number(theta(j)) : "");
      row.push_back(cc.kind == ControllerKind::kOlac2 ? format_number(cc.c) : "");
      row.push_back(std::to_string(res.dual_solves));
      row.push_back(std::to_string(res.unconverged_solves));
      row.push_back(format_number(res.final_backlog.sum()));
      std::string trace_file;
      if (sc.trace) {
        trace_file = "traces/" + sc.labels[job.controller] + "_V" + v_tag(V) + "_seed" + std::to_string(job.seed) + ".csv";
        auto tout = open_output(sc.output / trace_file);
        CsvWriter tcsv(tout);
        std::vector<std::string> th{"slot"};
        for (auto& c : indexed("q", r)) th.push_back(c);
        for (const char* c : {"gamma_distance", "beta_distance", "inst_cost"}) th.emplace_back(c);
        tcsv.row(th);
        for (const auto& tr : res.trace) {
          std::vector<std::string> trow{std::to_string(tr.slot)};
          for (int j = 0; j < r; ++j) trow.push_back(format_number(tr.q(j)));
          trow.push_back(format_number(tr.gamma_distance));
          trow.push_back(std::isnan(tr.beta_distance) ? "" : format_number(tr.beta_distance));
          trow.push_back(format_number(tr.cost));
          tcsv.row(trow);
        }
        outcome.files.push_back((sc.output / trace_file).string());
      }
      row.push_back(trace_file);
      csv.row(row);
    }
    outcome.files.push_back(path.string());
  }

  std::optional<AssumptionCheck> check;
  std::string check_error;
  if (sc.assumption_check) {
    try {
      check = check_slack_ball(instance, sc.epsilon_s, sc.perturbation_count, sc.seeds.front());
      const fs::path path = sc.output / "assumption_check.csv";
      auto out = open_output(path);
      CsvWriter csv(out);
      csv.row({"epsilon_s", "perturbations", "nominal_slack", "min_slack", "holds_on_sample", "note"});
      csv.row({format_number(check->epsilon_s), std::to_string(check->perturbations),
               format_number(check->nominal_slack), format_number(check->min_slack),
               check->min_slack > 0 ? "1" : "0", "sampled perturbations; not a proof of the ball condition"});
      outcome.files.push_back(path.string());
    } catch (const std::exception& e) {
      check_error = e.what();
    }
  }

  outcome.exit_status = outcome.failures.empty() && check_error.empty() ? 0 : 1;
  {
    json manifest;
    manifest["name"] = sc.name;
    manifest["status"] = outcome.exit_status == 0 ? "ok" : "failed";
    manifest["rng"] = kRngDescription;
    manifest["horizon"] = sc.horizon;
    manifest["burn_in"] = 0;
    manifest["seeds"] = sc.seeds;
    manifest["V_values"] = sc.V_values;
    manifest["zeta"] = sc.zeta ? json(*sc.zeta) : json("auto_Dp");
    json controllers = json::array();
    for (std::size_t c = 0; c < sc.controllers.size(); ++c) {
      const auto& cc = sc.controllers[c];
      json node{{"label", sc.labels[c]},
                {"kind", to_string(cc.kind)},
                {"discipline", to_string(resolved_discipline(cc))},
                {"relearn_period", cc.relearn_period}};
      if (cc.kind == ControllerKind::kOlac) node["theta_log_base"] = cc.theta_log_base;
      if (cc.kind == ControllerKind::kOlac2) node["c"] = cc.c;
      controllers.push_back(node);
    }
    manifest["controllers"] = controllers;
    manifest["instance"] = sc.instance.builtin.empty()
                               ? json{{"file", sc.instance.file.string()}}
                               : json{{"builtin", sc.instance.builtin}, {"channel_dist", sc.instance.channel_dist}};
    json failures = json::array();
    for (const auto& f : outcome.failures) {
      failures.push_back({{"controller", f.controller}, {"V", f.V}, {"seed", f.seed}, {"message", f.message}});
    }
    manifest["failures"] = failures;
    if (sc.assumption_check) {
      manifest["assumption_check"] = check ? json{{"epsilon_s", check->epsilon_s},
                                                  {"perturbations", check->perturbations},
                                                  {"min_slack", check->min_slack},
                                                  {"sampled_not_proven", true}}
                                           : json{{"error", check_error}};
    }
    std::vector<std::string> files;
    for (const auto& f : outcome.files) files.push_back(fs::path(f).lexically_relative(sc.output).string());
    manifest["files"] = files;
    const fs::path path = sc.output / "manifest.json";
    auto out = open_output(path);
    out << manifest.dump(2) << '\n';
    outcome.files.push_back(path.string());
  }
  return outcome;
}

std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] > 0 && y[i] > 0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      pts.emplace_back(std::log(x[i]), std::log(y[i]));
    }
  }
  if (pts.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (const auto& [a, b] : pts) {
    mx += a;
    my += b;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0, sxy = 0;
  for (const auto& [a, b] : pts) {
    sxx += (a - mx) * (a - mx);
    sxy += (a - mx) * (b - my);
  }
  if (!(sxx > 0)) return std::nullopt;
  return sxy / sxx;
}

std::vector<std::string> emit_plotdata(const fs::path& summary_csv, const fs::path& out_dir) {
  const CsvTable table = read_csv_file(summary_csv.string());
  if (table.rows.empty()) throw CsvError("summary has no rows", 2);
  for (const char* name : {"controller", "V", "status", "avg_cost", "avg_backlog", "mean_delay", "T_zeta_first",
                           "T_zeta_sustained"}) {
    table.column(name);
  }
  struct Group {
    std::string controller;
    double V = 0;
    Moments power, delay, backlog, t_first, t_sustained;
    int runs = 0;
    int unreached = 0;
    std::vector<std::string> traces;
  };
  std::vector<Group> groups;
  std::map<std::pair<std::string, double>, std::size_t> index;
  std::vector<std::string> controller_order;
  const std::size_t c_col = table.column("controller");
  const std::size_t s_col = table.column("status");
  const bool has_trace = table.has_column("trace_file");
  for (const auto& row : table.rows) {
    if (row[s_col] != "ok") continue;
    const auto V = cell(table, row, "V");
    if (!V) throw CsvError("row without V", 0);
    const auto key = std::make_pair(row[c_col], *V);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      groups.push_back({});
      groups.back().controller = row[c_col];
      groups.back().V = *V;
      if (std::find(controller_order.begin(), controller_order.end(), row[c_col]) == controller_order.end()) {
        controller_order.push_back(row[c_col]);
      }
    }
    Group& g = groups[it->second];
    ++g.runs;
    g.power.add(cell(table, row, "avg_cost"));
    g.delay.add(cell(table, row, "mean_delay"));
    g.backlog.add(cell(table, row, "avg_backlog"));
    const auto tf = cell(table, row, "T_zeta_first");
    if (!tf) ++g.unreached;
    g.t_first.add(tf);
    g.t_sustained.add(cell(table, row, "T_zeta_sustained"));
    if (has_trace && !row[table.column("trace_file")].empty()) g.traces.push_back(row[table.column("trace_file")]);
  }
  if (groups.empty()) throw CsvError("summary has no successful runs", 2);
  std::sort(groups.begin(), groups.end(), [&](const Group& a, const Group& b) {
    const auto ia = std::find(controller_order.begin(), controller_order.end(), a.controller);
    const auto ib = std::find(controller_order.begin(), controller_order.end(), b.controller);
    return ia != ib ? ia < ib : a.V < b.V;
  });

  fs::create_directories(out_dir);
  std::vector<std::string> written;
  auto with_stats = [](std::vector<std::string>& row, const Moments& m) {
    row.push_back(format_optional(m.mean()));
    row.push_back(format_optional(m.stderr_of_mean()));
    row.push_back(std::to_string(m.n));
  };
  {
    const fs::path path = out_dir / "fig_power_vs_V.csv";
    auto out = open_output(path);
    CsvWriter csv(out);
    csv.row({"controller", "V", "runs", "power_mean", "power_stderr", "power_n"});
    for (const auto& g : groups) {
      std::vector<std::string> row{g.controller, format_number(g.V), std::to_string(g.runs)};
      with_stats(row, g.power);
      csv.row(row);
    }
    written.push_back(path.string());
  }
  {
    const fs::path path = out_dir / "fig_delay_vs_V.csv";
    auto out = open_output(path);
    CsvWriter csv(out);
    csv.row({"controller", "V", "runs", "delay_mean", "delay_stderr", "delay_n", "backlog_mean", "backlog_stderr",
             "backlog_n"});
    for (const auto& g : groups) {
      std::vector<std::string> row{g.controller, format_number(g.V), std::to_string(g.runs)};
      with_stats(row, g.delay);
      with_stats(row, g.backlog);
      csv.row(row);
    }
    written.push_back(path.string());
  }
  {
    const fs::path path = out_dir / "fig_convergence_vs_V.csv";
    auto out = open_output(path);
    CsvWriter csv(out);
    csv.row({"controller", "V", "runs", "T_first_mean", "T_first_stderr", "T_first_n", "T_sustained_mean",
             "T_sustained_stderr", "T_sustained_n", "unreached"});
    for (const auto& g : groups) {
      std::vector<std::string> row{g.controller, format_number(g.V), std::to_string(g.runs)};
      with_stats(row, g.t_first);
      with_stats(row, g.t_sustained);
      row.push_back(std::to_string(g.unreached));
      csv.row(row);
    }
    written.push_back(path.string());
  }
  {
    const fs::path path = out_dir / "fig_convergence_slopes.csv";
    auto out = open_output(path);
    CsvWriter csv(out);
    csv.row({"controller", "points", "loglog_slope_T_first", "loglog_slope_T_sustained"});
    for (const auto& name : controller_order) {
      std::vector<double> vs, tf, ts;
      for (const auto& g : groups) {
        if (g.controller != name) continue;
        vs.push_back(g.V);
        tf.push_back(g.t_first.mean().value_or(std::nan("")));
        ts.push_back(g.t_sustained.mean().value_or(std::nan("")));
      }
      csv.row({name, std::to_string(vs.size()), format_optional(loglog_slope(vs, tf)),
               format_optional(loglog_slope(vs, ts))});
    }
    written.push_back(path.string());
  }
  {
    const fs::path path = out_dir / "fig_queue_trace.csv";
    auto out = open_output(path);
    CsvWriter csv(out);
    csv.row({"controller", "V", "slot", "q_total_mean", "q_total_stderr", "q_total_n", "gamma_distance_mean",
             "gamma_distance_stderr", "gamma_distance_n"});
    const fs::path base = summary_csv.parent_path();
    for (const auto& g : groups) {
      std::map<std::int64_t, std::pair<Moments, Moments>> by_slot;
      for (const auto& file : g.traces) {
        const CsvTable trace = read_csv_file((base / file).string());
        std::vector<std::size_t> q_cols;
        for (std::size_t k = 0; k < trace.header.size(); ++k) {
          if (trace.header[k].rfind("q_", 0) == 0) q_cols.push_back(k);
        }
        const std::size_t slot_col = trace.column("slot");
        const std::size_t dist_col = trace.column("gamma_distance");
        for (const auto& row : trace.rows) {
          const auto slot = parse_number(row[slot_col]);
          if (!slot) continue;
          double total = 0;
          for (std::size_t k : q_cols) total += parse_number(row[k]).value_or(0.0);
          auto& entry = by_slot[static_cast<std::int64_t>(*slot)];
          entry.first.add(total);
          entry.second.add(parse_number(row[dist_col]));
        }
      }
      for (const auto& [slot, m] : by_slot) {
        std::vector<std::string> row{g.controller, format_number(g.V), std::to_string(slot)};
        with_stats(row, m.first);
        with_stats(row, m.second);
        csv.row(row);
      }
    }
    written.push_back(path.string());
  }
  return written;
}

}  // namespace olac
