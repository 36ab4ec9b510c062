#include "pfqr/evalbench.hpp"

#include "pfqr/error.hpp"
#include "pfqr/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <string>

namespace pfqr {

namespace {

constexpr std::uint64_t kTestStream = 0x7E57;
constexpr std::uint64_t kSourceStream = 0x50A2CE;

struct Block {
  std::string scenario;
  std::uint64_t scenario_code = 0;
  std::optional<Sim2Case> sim2_case;
  ErrorLaw law = ErrorLaw::Gaussian;
  Index n = 0;
};

// One replication's output for one (method, k) cell.
struct CellDraw {
  bool ok = false;
  VectorXd gamma_hat;
  double mse_in = NAN;
  double mse_out = NAN;
};

struct Generated {
  SimData train;
  std::optional<SimData> test;
};

std::uint64_t block_stream(const Block& b) {
  return (static_cast<std::uint64_t>(b.n) << 8) | (static_cast<std::uint64_t>(b.law) << 4) | b.scenario_code;
}

std::vector<Block> enumerate_blocks(const BenchmarkConfig& config, Index sim2_n) {
  std::vector<Block> blocks;
  if (config.design == DesignKind::Sim1) {
    for (ErrorLaw law : config.laws) {
      for (Index n : config.sample_sizes) blocks.push_back({"sim1", 0, std::nullopt, law, n});
    }
  } else {
    for (Sim2Case c : config.sim2_cases) {
      for (ErrorLaw law : config.laws) {
        blocks.push_back({"sim2-" + std::string(to_string(c)), 1 + static_cast<std::uint64_t>(c), c, law, sim2_n});
      }
    }
  }
  return blocks;
}

double squared_error(const VectorXd& y, const VectorXd& pred) {
  return (y - pred).squaredNorm() / static_cast<double>(y.size());
}

bool wants_in(MseMode mode) { return mode != MseMode::OutOfSample; }
bool wants_out(MseMode mode) { return mode != MseMode::InSample; }

}  // namespace

std::string_view to_string(MethodId method) noexcept {
  switch (method) {
    case MethodId::FPC: return "fpc";
    case MethodId::QRFPC: return "qrfpc";
    case MethodId::CQRFPC: return "cqrfpc";
    case MethodId::PLS: return "pls";
    case MethodId::PQR: return "pqr";
    case MethodId::PCQR: return "pcqr";
  }
  return "fpc";
}

MethodId method_from_string(std::string_view name) {
  for (MethodId m : all_methods()) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

const std::vector<MethodId>& all_methods() {
  static const std::vector<MethodId> methods{MethodId::FPC, MethodId::QRFPC, MethodId::CQRFPC,
                                             MethodId::PLS, MethodId::PQR,   MethodId::PCQR};
  return methods;
}

BasisMethod basis_of(MethodId method) noexcept {
  switch (method) {
    case MethodId::FPC:
    case MethodId::QRFPC:
    case MethodId::CQRFPC: return BasisMethod::FPC;
    case MethodId::PLS: return BasisMethod::PLS;
    case MethodId::PQR: return BasisMethod::PQR;
    case MethodId::PCQR: return BasisMethod::PCQR;
  }
  return BasisMethod::FPC;
}

CheckLossSpec loss_of(MethodId method, double tau, int cqr_levels) {
  switch (method) {
    case MethodId::FPC:
    case MethodId::PLS: return CheckLossSpec::least_squares();
    case MethodId::QRFPC:
    case MethodId::PQR: return CheckLossSpec::quantile(tau);
    case MethodId::CQRFPC:
    case MethodId::PCQR: return CheckLossSpec::composite_uniform(cqr_levels);
  }
  return CheckLossSpec::least_squares();
}

std::string_view to_string(MseMode mode) noexcept {
  switch (mode) {
    case MseMode::InSample: return "in";
    case MseMode::OutOfSample: return "out";
    case MseMode::Both: return "both";
  }
  return "both";
}

MseMode mse_mode_from_string(std::string_view name) {
  if (name == "in") return MseMode::InSample;
  if (name == "out") return MseMode::OutOfSample;
  if (name == "both") return MseMode::Both;
  throw Error(ErrorCode::InvalidArgument, "unknown MSE mode '" + std::string(name) + "' (expected in, out or both)");
}

MiseDecomposition mise_decomposition(const MatrixXd& gamma_hats, const VectorXd& gamma_true, double weight) {
  if (gamma_hats.rows() < 1) throw Error(ErrorCode::InvalidArgument, "MISE needs at least one replication");
  if (gamma_hats.cols() != gamma_true.size()) {
    throw Error(ErrorCode::DimensionMismatch, "estimates and true coefficient function differ in length");
  }
  const auto s = static_cast<double>(gamma_hats.rows());
  const RowVectorXd mean = gamma_hats.colwise().mean();
  MiseDecomposition out;
  out.bias2 = weight * (mean - gamma_true.transpose()).squaredNorm();
  out.var = weight * (gamma_hats.rowwise() - mean).squaredNorm() / s;
  out.mise = out.bias2 + out.var;
  return out;
}

void BenchmarkConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (replications < 1) fail("replications must be at least 1");
  if (ks.empty()) fail("the K sweep must not be empty");
  if (methods.empty()) fail("the method list must not be empty");
  if (laws.empty()) fail("at least one error law is needed");
  if (std::any_of(ks.begin(), ks.end(), [](Index k) { return k < 0; })) fail("K values must be nonnegative");
  if (!(tau > 0.0 && tau < 1.0)) fail("tau must lie in (0,1)");
  if (cqr_levels < 1) fail("cqr_levels must be at least 1");
  if (design == DesignKind::Sim1) {
    if (sample_sizes.empty()) fail("at least one sample size is needed");
    if (sim1_grid < 2) fail("the simulation I grid needs at least 2 points");
    for (Index n : sample_sizes) {
      if (n < 3) fail("sample sizes must be at least 3");
      if (*std::max_element(ks.begin(), ks.end()) > std::min(n - 1, sim1_grid)) {
        fail("K exceeds min(n-1, m) for sample size " + std::to_string(n));
      }
    }
  } else {
    if (sim2_cases.empty()) fail("at least one simulation II case is needed");
    if (!(noise_factor >= 0.0) || !std::isfinite(noise_factor)) fail("noise_factor must be finite and nonnegative");
    const Index n = sim2_source ? sim2_source->size() : sim2_source_size;
    const Index m = sim2_source ? sim2_source->grid().size() : sim2_grid;
    if (n <= kSim2Components) fail("simulation II needs more than 20 source curves");
    if (*std::max_element(ks.begin(), ks.end()) > std::min(n - 1, m)) fail("K exceeds min(n-1, m) for the source");
  }
}

bool ReportCell::operator==(const ReportCell& other) const {
  auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
  return scenario == other.scenario && method == other.method && law == other.law && n == other.n && k == other.k &&
         same(bias2, other.bias2) && same(var, other.var) && same(mise, other.mise) && same(mse_in, other.mse_in) &&
         same(mse_out, other.mse_out) && completed == other.completed && failed == other.failed;
}

bool EvalReport::has_failures() const noexcept {
  return std::any_of(cells.begin(), cells.end(), [](const ReportCell& c) { return c.failed > 0; });
}

const ReportCell* EvalReport::find(std::string_view scenario, MethodId method, ErrorLaw law, Index n, Index k) const {
  for (const ReportCell& c : cells) {
    if (c.scenario == scenario && c.method == method && c.law == law && c.n == n && c.k == k) return &c;
  }
  return nullptr;
}

Sim2Source default_sim2_source(const BenchmarkConfig& config) {
  return make_sim2_source(
      synthetic_sim2_curves(config.sim2_source_size, config.sim2_grid, derive_seed(config.seed, kSourceStream, 0)));
}

EvalReport run_benchmark(const BenchmarkConfig& config, const ProgressFn& progress) {
  config.validate();
  std::optional<Sim2Source> source;
  if (config.design == DesignKind::Sim2) {
    source = config.sim2_source ? make_sim2_source(*config.sim2_source) : default_sim2_source(config);
  }
  const std::vector<Block> blocks = enumerate_blocks(config, source ? source->curves.size() : 0);
  const Index k_max = *std::max_element(config.ks.begin(), config.ks.end());
  const auto num_methods = config.methods.size();
  const auto num_ks = config.ks.size();

  // Basis families needed, in a fixed order.
  std::vector<BasisMethod> families;
  for (MethodId m : config.methods) {
    if (std::find(families.begin(), families.end(), basis_of(m)) == families.end()) families.push_back(basis_of(m));
  }
  const CheckLossSpec qr_loss = CheckLossSpec::quantile(config.tau);
  const CheckLossSpec cqr_loss = CheckLossSpec::composite_uniform(config.cqr_levels);

  EvalReport report;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Block& block = blocks[b];
    const auto started = std::chrono::steady_clock::now();
    const auto reps = static_cast<std::size_t>(config.replications);
    // draws[rep][method * num_ks + k]
    std::vector<std::vector<CellDraw>> draws(reps);
    std::vector<VectorXd> truths(reps);

    auto generate_one = [&](std::uint64_t seed) -> SimData {
      if (config.design == DesignKind::Sim1) {
        Sim1Design d;
        d.n = block.n;
        d.m = config.sim1_grid;
        d.law = block.law;
        d.seed = seed;
        return gen_sim1(d);
      }
      Sim2Design d;
      d.which = *block.sim2_case;
      d.law = block.law;
      d.noise_factor = config.noise_factor;
      d.seed = seed;
      return gen_sim2(*source, d);
    };
    auto generate = [&](std::uint64_t seed) -> Generated {
      SimData train = generate_one(seed);
      std::optional<SimData> test;
      if (wants_out(config.mse_mode)) test = generate_one(derive_seed(seed, kTestStream, 0));
      return {std::move(train), std::move(test)};
    };

    parallel_for(reps, config.threads, [&](std::size_t rep) {
      const Generated data = generate(derive_seed(config.seed, block_stream(block), rep));
      const FunctionalSample& train = data.train.sample;
      truths[rep] = data.train.gamma_true;
      std::vector<CellDraw> row(num_methods * num_ks);

      std::map<BasisMethod, std::optional<ExtractionResult>> extractions;
      for (BasisMethod family : families) {
        ExtractionConfig ec;
        ec.method = family;
        ec.loss = family == BasisMethod::PCQR ? cqr_loss : qr_loss;
        ec.k_max = k_max;
        ec.scaling = config.scaling;
        ec.solver = config.solver;
        try {
          extractions[family] = run_extraction(train, ec);
          if (config.on_extraction) config.on_extraction(train, *extractions[family]);
        } catch (const Error&) {
          extractions[family] = std::nullopt;
        }
      }

      for (std::size_t mi = 0; mi < num_methods; ++mi) {
        const MethodId method = config.methods[mi];
        const auto& extraction = extractions[basis_of(method)];
        if (!extraction) continue;
        const CheckLossSpec loss = loss_of(method, config.tau, config.cqr_levels);
        for (std::size_t ki = 0; ki < num_ks; ++ki) {
          CellDraw& draw = row[mi * num_ks + ki];
          try {
            const Index k = std::min(config.ks[ki], extraction->size());
            const ModelFit fit = fit_model(train, extraction->truncated(k), loss, config.solver);
            draw.gamma_hat = fit.gamma_hat;
            if (wants_in(config.mse_mode)) {
              draw.mse_in = squared_error(train.responses(), collapse_levels(fit, fit.fitted, config.cqr_prediction));
            }
            if (data.test) {
              const FunctionalSample& test = data.test->sample;
              draw.mse_out = squared_error(test.responses(), predict_point(fit, test, config.cqr_prediction));
            }
            draw.ok = true;
          } catch (const Error&) {
            draw.ok = false;
          }
        }
      }
      draws[rep] = std::move(row);
    });

    const double weight = config.integrated_mise
                              ? (config.design == DesignKind::Sim1 ? Grid::uniform(config.sim1_grid).spacing()
                                                                   : source->curves.grid().spacing())
                              : 1.0;
    for (std::size_t mi = 0; mi < num_methods; ++mi) {
      for (std::size_t ki = 0; ki < num_ks; ++ki) {
        ReportCell cell;
        cell.scenario = block.scenario;
        cell.method = config.methods[mi];
        cell.law = block.law;
        cell.n = block.n;
        cell.k = config.ks[ki];
        std::vector<std::size_t> good;
        for (std::size_t rep = 0; rep < reps; ++rep) {
          if (draws[rep][mi * num_ks + ki].ok) good.push_back(rep);
        }
        cell.completed = static_cast<int>(good.size());
        cell.failed = static_cast<int>(reps - good.size());
        if (!good.empty()) {
          const Index m = truths[good.front()].size();
          MatrixXd gammas(static_cast<Index>(good.size()), m);
          double in_sum = 0.0;
          double out_sum = 0.0;
          for (std::size_t g = 0; g < good.size(); ++g) {
            const CellDraw& d = draws[good[g]][mi * num_ks + ki];
            gammas.row(static_cast<Index>(g)) = d.gamma_hat.transpose();
            in_sum += d.mse_in;
            out_sum += d.mse_out;
          }
          // The true function is fixed within a block.
          const MiseDecomposition dec = mise_decomposition(gammas, truths[good.front()], weight);
          cell.bias2 = dec.bias2;
          cell.var = dec.var;
          cell.mise = dec.mise;
          const auto count = static_cast<double>(good.size());
          if (wants_in(config.mse_mode)) cell.mse_in = in_sum / count;
          if (wants_out(config.mse_mode)) cell.mse_out = out_sum / count;
        }
        report.cells.push_back(std::move(cell));
      }
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    report.timings.push_back({block.scenario, block.law, block.n, elapsed.count()});
    if (progress) progress(b + 1, blocks.size());
  }
  return report;
}

}  // namespace pfqr
