#include "sci/dgp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "sci/core_metrics.hpp"
#include "sci/errors.hpp"
#include "sci/parallel.hpp"

namespace sci {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_positive(double v, const std::string& spec, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError("dgp '" + spec + "': " + field + " must be positive and finite");
}

void validate_base(const BaseProcess& p, const std::string& name) {
  std::visit(overloaded{[&](const IidNormal& q) {
                          if (!(q.sd >= 0.0)) throw ConfigError("dgp '" + name + "': sd must be >= 0");
                        },
                        [&](const Ar1& q) {
                          if (!(q.sd >= 0.0)) throw ConfigError("dgp '" + name + "': sd must be >= 0");
                          if (!(std::abs(q.phi) < 1.0))
                            throw ConfigError("dgp '" + name + "': AR coefficient must lie in (-1,1)");
                        }},
             p);
}

void validate_base(const BaseVolume& v, const std::string& name) {
  std::visit(overloaded{[&](const TwoGamma& q) {
                          check_positive(q.buy.shape, name, "buy shape");
                          check_positive(q.buy.scale, name, "buy scale");
                          check_positive(q.sell.shape, name, "sell shape");
                          check_positive(q.sell.scale, name, "sell scale");
                        },
                        [&](const GammaBetaSplit& q) {
                          check_positive(q.total.shape, name, "total shape");
                          check_positive(q.total.scale, name, "total scale");
                          check_positive(q.beta_a, name, "beta a");
                          check_positive(q.beta_b, name, "beta b");
                        }},
             v);
}

// Draws one return given the previous one; `first` marks r_1.
double draw_return(const BaseProcess& p, Stream& rng, double prev, bool first) {
  return std::visit(overloaded{[&](const IidNormal& q) { return rng.normal(q.mean, q.sd); },
                               [&](const Ar1& q) {
                                 const double e = rng.normal(q.mean, q.sd);
                                 return first ? e : q.phi * prev + e;
                               }},
                    p);
}

std::pair<double, double> draw_volume(const BaseVolume& v, Stream& rng) {
  return std::visit(overloaded{[&](const TwoGamma& q) {
                                 const double b = rng.gamma(q.buy.shape, q.buy.scale);
                                 const double s = rng.gamma(q.sell.shape, q.sell.scale);
                                 return std::pair{b, s};
                               },
                               [&](const GammaBetaSplit& q) {
                                 const double total = rng.gamma(q.total.shape, q.total.scale);
                                 const double share = rng.beta(q.beta_a, q.beta_b);
                                 return std::pair{total * share, total * (1.0 - share)};
                               }},
                    v);
}

BaseProcess process_at(const ReturnProcess& p, int t) {
  return std::visit(
      overloaded{[t](const PiecewiseReturns& pw) { return t < pw.switch_bin ? pw.before : pw.after; },
                 [](const auto& q) { return BaseProcess(q); }},
      p);
}

BaseVolume volume_at(const VolumeModel& v, int t) {
  return std::visit(
      overloaded{[t](const PiecewiseVolumes& pw) { return t < pw.switch_bin ? pw.before : pw.after; },
                 [](const auto& q) { return BaseVolume(q); }},
      v);
}

DgpSpec make_spec(std::string name, ReturnProcess r, VolumeModel v, int lo, int hi, double alpha,
                  int label) {
  DgpSpec s;
  s.name = std::move(name);
  s.returns = std::move(r);
  s.volumes = std::move(v);
  s.traders_lo = lo;
  s.traders_hi = hi;
  s.dirichlet_alpha = alpha;
  s.label = label;
  return s;
}

std::string format_grid_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void DgpSpec::validate() const {
  if (name.empty()) throw ConfigError("dgp spec without a name");
  if (n_bins < 1) throw ConfigError("dgp '" + name + "': n_bins must be positive");
  if (!(start_price > 0.0 && start_price < 1.0))
    throw ConfigError("dgp '" + name + "': start price must lie in (0,1)");
  if (traders_lo < 1 || traders_hi < traders_lo)
    throw ConfigError("dgp '" + name + "': trader range must satisfy 1 <= lo <= hi");
  check_positive(dirichlet_alpha, name, "dirichlet alpha");
  if (label != 0 && label != 1) throw ConfigError("dgp '" + name + "': label must be 0 or 1");
  std::visit(overloaded{[&](const PiecewiseReturns& p) {
                          if (p.switch_bin < 1 || p.switch_bin > n_bins)
                            throw ConfigError("dgp '" + name + "': switch bin outside the path");
                          validate_base(p.before, name);
                          validate_base(p.after, name);
                        },
                        [&](const auto& p) { validate_base(BaseProcess(p), name); }},
             returns);
  std::visit(overloaded{[&](const PiecewiseVolumes& p) {
                          if (p.switch_bin < 1 || p.switch_bin > n_bins)
                            throw ConfigError("dgp '" + name + "': switch bin outside the path");
                          validate_base(p.before, name);
                          validate_base(p.after, name);
                        },
                        [&](const auto& p) { validate_base(BaseVolume(p), name); }},
             volumes);
}

Eigen::VectorXd SimulatedPath::logits() const { return logit(prices); }

const std::map<std::string, DgpSpec>& builtin_specs() {
  static const std::map<std::string, DgpSpec> specs = [] {
    const TwoGamma informed_volumes{{2.5, 5e4}, {0.5, 1.5e4}};
    const TwoGamma liquidity_volumes{{0.6, 1.5e4}, {2.5, 4e4}};
    const IidNormal informed_returns{0.0010, 0.0022};
    std::map<std::string, DgpSpec> m;
    auto add = [&](DgpSpec s) { m.emplace(s.name, std::move(s)); };
    add(make_spec("informed", informed_returns, informed_volumes, 150, 250, 4.0, 1));
    add(make_spec("liquidity", Ar1{-0.55, -0.0008, 0.0025}, liquidity_volumes, 20, 50, 0.4, 0));
    add(make_spec("disagreement", IidNormal{0.0, 0.0040}, GammaBetaSplit{{2.0, 4e4}, 8.0, 8.0}, 60,
                  120, 1.2, 0));
    add(make_spec("whale_informed", informed_returns, informed_volumes, 4, 8, 0.3, 1));
    add(make_spec("noisy_broad", IidNormal{0.0, 0.006}, GammaBetaSplit{{2.0, 4e4}, 3.0, 3.0}, 120,
                  200, 3.0, 0));
    add(make_spec("manip_then_info",
                  PiecewiseReturns{6, Ar1{-0.5, -0.0005, 0.003}, IidNormal{0.0012, 0.0022}},
                  PiecewiseVolumes{6, liquidity_volumes, informed_volumes}, 80, 150, 2.5, 1));
    add(make_spec("persistent_two_sided", IidNormal{0.0008, 0.002},
                  GammaBetaSplit{{2.5, 4e4}, 8.0, 8.0}, 80, 150, 2.0, 0));
    add(make_spec("coord_manip_broad", IidNormal{0.0009, 0.0024},
                  TwoGamma{{2.5, 5e4}, {0.4, 1.2e4}}, 80, 130, 4.0, 0));
    for (const auto& [name, spec] : m) spec.validate();
    return m;
  }();
  return specs;
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{
      "informed",    "liquidity",       "disagreement",         "whale_informed",
      "noisy_broad", "manip_then_info", "persistent_two_sided", "coord_manip_broad"};
  return names;
}

const std::vector<std::string>& baseline_names() {
  static const std::vector<std::string> names{"informed", "liquidity", "disagreement"};
  return names;
}

const std::vector<std::string>& adversarial_names() {
  static const std::vector<std::string> names{"whale_informed", "manip_then_info", "noisy_broad",
                                              "persistent_two_sided", "coord_manip_broad"};
  return names;
}

const DgpSpec& builtin_spec(const std::string& name) {
  const auto& specs = builtin_specs();
  auto it = specs.find(name);
  if (it == specs.end()) throw ConfigError("unknown DGP '" + name + "'");
  return it->second;
}

SimulatedPath sample_path(const DgpSpec& spec, Stream& rng) {
  const int n = spec.n_bins;
  Eigen::VectorXd r(n);
  double prev = 0.0;
  for (int i = 0; i < n; ++i) {
    r[i] = draw_return(process_at(spec.returns, i + 1), rng, prev, i == 0);
    prev = r[i];
  }

  SimulatedPath path;
  path.dgp_name = spec.name;
  path.label = spec.label;
  Eigen::VectorXd l(n + 1);
  l[0] = logit(Probability<double>(spec.start_price));
  for (int i = 0; i < n; ++i) l[i + 1] = l[i] + r[i];
  path.prices = inverse_logit(l).cwiseMax(kPriceFloor).cwiseMin(kPriceCeiling);

  path.buy.resize(n);
  path.sell.resize(n);
  for (int b = 0; b < n; ++b) {
    const auto [buy, sell] = draw_volume(volume_at(spec.volumes, b + 1), rng);
    path.buy[b] = buy;
    path.sell[b] = sell;
  }

  const auto traders = rng.uniform_int(spec.traders_lo, spec.traders_hi);
  const Eigen::VectorXd weights = rng.dirichlet(traders, spec.dirichlet_alpha);
  const double total_buy = path.buy.sum();
  const double total_sell = path.sell.sum();
  const double total = total_buy + total_sell;
  const double p_buy = total > 0.0 ? total_buy / total : 0.5;
  path.flows = weights * total;
  for (Eigen::Index j = 0; j < traders; ++j)
    if (!(rng.uniform() < p_buy)) path.flows[j] = -path.flows[j];
  return path;
}

Stream path_stream(std::uint64_t master_seed, const std::string& dgp_name, std::size_t index) {
  return Stream::derive(master_seed, fnv1a64(dgp_name), index);
}

Dataset generate_dataset(std::span<const DgpSpec> specs, std::size_t n_per_dgp,
                         std::uint64_t master_seed, unsigned threads) {
  if (n_per_dgp < 1) throw ConfigError("n_per_dgp must be at least 1");
  for (const auto& s : specs) s.validate();
  Dataset ds;
  ds.master_seed = master_seed;
  ds.paths.resize(specs.size() * n_per_dgp);
  for (const auto& s : specs) ds.counts.emplace_back(s.name, n_per_dgp);
  parallel_for(ds.paths.size(), threads, [&](std::size_t k) {
    const auto& spec = specs[k / n_per_dgp];
    Stream rng = path_stream(master_seed, spec.name, k % n_per_dgp);
    ds.paths[k] = sample_path(spec, rng);
  });
  return ds;
}

Dataset generate_dataset(std::span<const std::string> names, std::size_t n_per_dgp,
                         std::uint64_t master_seed, unsigned threads) {
  std::vector<DgpSpec> specs;
  specs.reserve(names.size());
  for (const auto& n : names) specs.push_back(builtin_spec(n));
  return generate_dataset(std::span<const DgpSpec>(specs), n_per_dgp, master_seed, threads);
}

std::vector<DgpSpec> sweep_specs(const DgpSpec& base, SweepParam param,
                                 std::span<const double> grid) {
  std::vector<DgpSpec> out;
  out.reserve(grid.size());
  for (double value : grid) {
    DgpSpec s = base;
    if (param == SweepParam::ArCoefficient) {
      bool applied = false;
      auto set_phi = [&](BaseProcess& p) {
        if (auto* ar = std::get_if<Ar1>(&p)) {
          ar->phi = value;
          applied = true;
        }
      };
      if (auto* ar = std::get_if<Ar1>(&s.returns)) {
        ar->phi = value;
        applied = true;
      } else if (auto* pw = std::get_if<PiecewiseReturns>(&s.returns)) {
        set_phi(pw->before);
        set_phi(pw->after);
      }
      if (!applied)
        throw ConfigError("dgp '" + base.name + "' has no AR(1) return process to sweep");
      s.name = base.name + "[phi=" + format_grid_value(value) + "]";
    } else {
      s.dirichlet_alpha = value;
      s.name = base.name + "[alpha=" + format_grid_value(value) + "]";
    }
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

nlohmann::ordered_json to_array(const Eigen::VectorXd& v) {
  auto a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd from_array(const nlohmann::ordered_json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& dataset) {
  nlohmann::ordered_json header;
  header["schema"] = "sci-dataset/1";
  header["master_seed"] = dataset.master_seed;
  header["paths"] = dataset.paths.size();
  auto counts = nlohmann::ordered_json::object();
  for (const auto& [name, n] : dataset.counts) counts[name] = n;
  header["counts"] = counts;
  out << header.dump() << '\n';
  for (const auto& p : dataset.paths) {
    nlohmann::ordered_json rec;
    rec["dgp"] = p.dgp_name;
    rec["label"] = p.label;
    rec["prices"] = to_array(p.prices);
    rec["buy"] = to_array(p.buy);
    rec["sell"] = to_array(p.sell);
    auto flows = nlohmann::ordered_json::object();
    for (Eigen::Index j = 0; j < p.flows.size(); ++j) flows["w" + std::to_string(j)] = p.flows[j];
    rec["flows"] = flows;
    out << rec.dump() << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::ordered_json rec;
    try {
      rec = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) {
      if (rec.value("schema", "") != "sci-dataset/1")
        throw DataError("dataset line 1: missing sci-dataset/1 header");
      ds.master_seed = rec.at("master_seed").get<std::uint64_t>();
      for (const auto& [name, n] : rec.at("counts").items())
        ds.counts.emplace_back(name, n.get<std::size_t>());
      have_header = true;
      continue;
    }
    try {
      SimulatedPath p;
      p.dgp_name = rec.at("dgp").get<std::string>();
      p.label = rec.at("label").get<int>();
      p.prices = from_array(rec.at("prices"));
      p.buy = from_array(rec.at("buy"));
      p.sell = from_array(rec.at("sell"));
      const auto& flows = rec.at("flows");
      p.flows.resize(static_cast<Eigen::Index>(flows.size()));
      Eigen::Index j = 0;
      for (const auto& [id, v] : flows.items()) p.flows[j++] = v.get<double>();
      if (p.buy.size() + 1 != p.prices.size() || p.sell.size() != p.buy.size())
        throw DataError("inconsistent series lengths");
      ds.paths.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw DataError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw DataError("dataset: empty input");
  return ds;
}

}  // namespace sci
