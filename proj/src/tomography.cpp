#include "entangle/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "entangle/optim.hpp"
#include "entangle/rng.hpp"

namespace entangle {

namespace {

Eigen::Vector2cd analyzer_ket(char c) {
  const double s = 1.0 / std::numbers::sqrt2;
  switch (c) {
    case 'H': return {1.0, 0.0};
    case 'V': return {0.0, 1.0};
    case 'D': return {s, s};
    case 'A': return {s, -s};
    case 'R': return {s, Complex(0.0, s)};
    case 'L': return {s, Complex(0.0, -s)};
    default: throw std::invalid_argument("analyzer_ket: unknown analyzer");
  }
}

constexpr char kAnalyzerOrder[6] = {'H', 'V', 'D', 'A', 'R', 'L'};

} // namespace

std::vector<AnalyzerSetting> build_projector_set(int num_qubits) {
  if (num_qubits != 2 && num_qubits != 3) {
    throw std::invalid_argument("build_projector_set: supports 2 or 3 qubits");
  }
  int total = 1;
  for (int q = 0; q < num_qubits; ++q) total *= 6;

  std::vector<AnalyzerSetting> settings;
  settings.reserve(static_cast<std::size_t>(total));
  for (int k = 0; k < total; ++k) {
    AnalyzerSetting s;
    Vector ket = Vector::Ones(1);
    int rest = k;
    int divisor = total / 6;
    for (int q = 0; q < num_qubits; ++q) {
      int digit = (rest / divisor) % 6;
      rest %= divisor;
      divisor /= 6;
      char a = kAnalyzerOrder[digit];
      s.analyzers.push_back(a);
      Eigen::Vector2cd one = analyzer_ket(a);
      Vector next(ket.size() * 2);
      for (Eigen::Index i = 0; i < ket.size(); ++i) {
        next[2 * i] = ket[i] * one[0];
        next[2 * i + 1] = ket[i] * one[1];
      }
      ket = std::move(next);
    }
    s.ket = std::move(ket);
    settings.push_back(std::move(s));
  }
  return settings;
}

MeasurementRecord simulate_counts(const DensityMatrix& rho,
                                  const std::vector<AnalyzerSetting>& settings,
                                  double flux, std::uint64_t seed) {
  if (!(flux >= 0.0) || !std::isfinite(flux)) {
    throw std::invalid_argument("simulate_counts: flux must be finite and non-negative");
  }
  MeasurementRecord rec;
  rec.settings = settings;
  rec.labels = rho.labels();
  rec.flux = flux;
  rec.counts.reserve(settings.size());
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const Vector& s = settings[k].ket;
    if (s.size() != rho.dim()) {
      throw std::invalid_argument("simulate_counts: setting dimension mismatch");
    }
    double prob = std::max(0.0, (s.adjoint() * rho.matrix() * s)(0).real());
    auto engine = seeded_engine(seed, k);
    rec.counts.push_back(poisson(engine, flux * prob));
  }
  return rec;
}

MeasurementRecord merge_records(const std::vector<MeasurementRecord>& blocks) {
  if (blocks.empty()) throw std::invalid_argument("merge_records: no blocks");
  MeasurementRecord merged = blocks.front();
  merged.iteration = 1;
  for (std::size_t b = 1; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    if (blk.counts.size() != merged.counts.size()) {
      throw std::invalid_argument("merge_records: blocks have different settings");
    }
    for (std::size_t k = 0; k < merged.counts.size(); ++k) {
      if (blk.settings[k].analyzers != merged.settings[k].analyzers) {
        throw std::invalid_argument("merge_records: setting order mismatch");
      }
      merged.counts[k] += blk.counts[k];
    }
    merged.flux += blk.flux;
    merged.iteration += 1;
  }
  return merged;
}

void write_counts_csv(std::ostream& out, const std::vector<MeasurementRecord>& blocks) {
  out << "setting_index,qubit_settings,count,iteration\n";
  for (const auto& blk : blocks) {
    for (std::size_t k = 0; k < blk.counts.size(); ++k) {
      std::string joined;
      for (std::size_t q = 0; q < blk.settings[k].analyzers.size(); ++q) {
        if (q) joined.push_back(',');
        joined.push_back(blk.settings[k].analyzers[q]);
      }
      out << k << ",\"" << joined << "\"," << blk.counts[k] << ',' << blk.iteration
          << '\n';
    }
  }
}

std::vector<MeasurementRecord> read_counts_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("counts CSV: empty file");
  }
  // rows grouped by the iteration column; settings rebuilt from the analyzer field
  std::map<int, std::map<int, std::pair<std::string, std::int64_t>>> grouped;
  int num_qubits = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t q1 = line.find('"');
    std::size_t q2 = line.find('"', q1 + 1);
    if (q1 == std::string::npos || q2 == std::string::npos) {
      throw std::invalid_argument("counts CSV: malformed row: " + line);
    }
    int index = std::stoi(line.substr(0, q1 - 1));
    std::string setting_field = line.substr(q1 + 1, q2 - q1 - 1);
    std::istringstream tail(line.substr(q2 + 2));
    std::string count_str, iter_str;
    std::getline(tail, count_str, ',');
    std::getline(tail, iter_str, ',');
    std::int64_t count = std::stoll(count_str);
    int iteration = std::stoi(iter_str);
    if (count < 0) throw std::invalid_argument("counts CSV: negative count");

    std::string analyzers;
    for (char c : setting_field) {
      if (c != ',') analyzers.push_back(c);
    }
    if (num_qubits == 0) num_qubits = static_cast<int>(analyzers.size());
    if (static_cast<int>(analyzers.size()) != num_qubits) {
      throw std::invalid_argument("counts CSV: inconsistent qubit count");
    }
    grouped[iteration][index] = {analyzers, count};
  }
  if (grouped.empty()) throw std::invalid_argument("counts CSV: no data rows");

  auto canonical = build_projector_set(num_qubits);
  Labels labels = num_qubits == 3 ? Labels{"c", "e", "f"} : Labels{"a", "b"};

  std::vector<MeasurementRecord> blocks;
  for (const auto& [iteration, rows] : grouped) {
    if (rows.size() != canonical.size()) {
      throw std::invalid_argument("counts CSV: iteration block is incomplete");
    }
    MeasurementRecord rec;
    rec.settings = canonical;
    rec.labels = labels;
    rec.iteration = iteration;
    rec.counts.resize(canonical.size());
    for (const auto& [index, row] : rows) {
      if (index < 0 || index >= static_cast<int>(canonical.size()) ||
          row.first != canonical[static_cast<std::size_t>(index)].analyzers) {
        throw std::invalid_argument("counts CSV: setting does not match canonical order");
      }
      rec.counts[static_cast<std::size_t>(index)] = row.second;
    }
    blocks.push_back(std::move(rec));
  }
  return blocks;
}

namespace {

// rho = T^dagger T / Tr(T^dagger T), T lower triangular with real diagonal.
// Parameter layout: d diagonal entries first, then (Re, Im) pairs of the
// strictly lower triangle scanned row by row.
Matrix t_from_params(const Eigen::VectorXd& x, int d) {
  Matrix t = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) t(i, i) = x[i];
  int p = d;
  for (int i = 1; i < d; ++i) {
    for (int j = 0; j < i; ++j) {
      t(i, j) = Complex(x[p], x[p + 1]);
      p += 2;
    }
  }
  return t;
}

Matrix rho_from_params(const Eigen::VectorXd& x, int d) {
  Matrix t = t_from_params(x, d);
  Matrix a = t.adjoint() * t;
  double tr = a.trace().real();
  Matrix rho = a / tr;
  return 0.5 * (rho + rho.adjoint()); // scrub rounding asymmetry
}

class WlsObjective {
 public:
  WlsObjective(const MeasurementRecord& rec)
      : d_(static_cast<int>(rec.settings.front().ket.size())),
        k_(static_cast<int>(rec.settings.size())) {
    s_.resize(d_, k_);
    for (int k = 0; k < k_; ++k) s_.col(k) = rec.settings[static_cast<std::size_t>(k)].ket;
    n_.resize(k_);
    w_.resize(k_);
    for (int k = 0; k < k_; ++k) {
      double n = static_cast<double>(rec.counts[static_cast<std::size_t>(k)]);
      n_[k] = n;
      w_[k] = 1.0 / std::max(n, 1.0);
    }
  }

  int dim() const { return d_; }

  double flux_for(const Eigen::VectorXd& x) const {
    Eigen::VectorXd m = probabilities(x);
    return profiled_flux(m);
  }

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    Matrix t = t_from_params(x, d_);
    Matrix a = t.adjoint() * t;
    double tr = a.trace().real();
    if (!(tr > 0.0)) return std::numeric_limits<double>::infinity();

    Matrix as = a * s_;
    Eigen::VectorXd m(k_);
    for (int k = 0; k < k_; ++k) {
      m[k] = std::max(0.0, (s_.col(k).dot(as.col(k))).real() / tr);
    }
    double f = profiled_flux(m);
    Eigen::VectorXd r = n_ - f * m;
    double value = (w_.array() * r.array().square()).sum();

    if (grad) {
      // dL/dm_k at the profiled flux equals the partial derivative -2 w f r
      Eigen::VectorXd c = -2.0 * f * (w_.array() * r.array());
      Matrix g = s_ * c.asDiagonal() * s_.adjoint();
      double q = c.dot(m);
      Matrix dmat = (g - q * Matrix::Identity(d_, d_)) / tr;
      Matrix mgrad = dmat * t.adjoint();
      grad->resize(x.size());
      for (int i = 0; i < d_; ++i) (*grad)[i] = 2.0 * mgrad(i, i).real();
      int p = d_;
      for (int i = 1; i < d_; ++i) {
        for (int j = 0; j < i; ++j) {
          (*grad)[p] = 2.0 * mgrad(j, i).real();
          (*grad)[p + 1] = -2.0 * mgrad(j, i).imag();
          p += 2;
        }
      }
    }
    return value;
  }

 private:
  Eigen::VectorXd probabilities(const Eigen::VectorXd& x) const {
    Matrix rho = rho_from_params(x, d_);
    Eigen::VectorXd m(k_);
    for (int k = 0; k < k_; ++k) {
      m[k] = std::max(0.0, (s_.col(k).dot(rho * s_.col(k))).real());
    }
    return m;
  }

  double profiled_flux(const Eigen::VectorXd& m) const {
    double num = (w_.array() * n_.array() * m.array()).sum();
    double den = (w_.array() * m.array().square()).sum();
    return den > 0.0 ? num / den : 0.0;
  }

  int d_, k_;
  Matrix s_;
  Eigen::VectorXd n_, w_;
};

} // namespace

namespace detail {

double wls_objective(const MeasurementRecord& record, const Eigen::VectorXd& params,
                     Eigen::VectorXd* grad) {
  return WlsObjective(record)(params, grad);
}

} // namespace detail

ReconstructionResult reconstruct(const MeasurementRecord& record,
                                 const ReconstructionOptions& opts) {
  if (record.settings.empty() || record.counts.size() != record.settings.size()) {
    throw std::invalid_argument("reconstruct: record settings/counts mismatch");
  }
  WlsObjective obj(record);
  const int d = obj.dim();
  const int nparams = d * d;
  if (static_cast<std::size_t>(d) != (std::size_t{1} << record.labels.size())) {
    throw std::invalid_argument("reconstruct: labels do not match setting dimension");
  }

  MinimizeOptions mopts;
  mopts.max_iterations = opts.max_iterations;
  mopts.grad_tol = opts.grad_tol;
  mopts.f_tol = opts.f_tol;

  std::optional<MinimizeResult> best;
  for (int start = 0; start < std::max(1, opts.multistarts); ++start) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(nparams);
    for (int i = 0; i < d; ++i) x0[i] = 1.0;
    if (start == 0 && opts.warm_start) {
      if (opts.warm_start->size() != nparams) {
        throw std::invalid_argument("reconstruct: warm start has wrong size");
      }
      x0 = *opts.warm_start;
    } else if (start > 0) {
      auto engine = seeded_engine(opts.seed, static_cast<std::uint64_t>(start));
      for (int i = 0; i < nparams; ++i) x0[i] += 0.1 * gaussian(engine);
    }
    Eigen::VectorXd x0copy = x0;
    MinimizeResult res = minimize_bfgs(
        [&obj](const Eigen::VectorXd& x, Eigen::VectorXd* g) { return obj(x, g); },
        std::move(x0copy), mopts);
    if (!best || res.value < best->value) best = std::move(res);
  }

  ReconstructionResult out{
      DensityMatrix(rho_from_params(best->x, d), record.labels),
      best->value,
      obj.flux_for(best->x),
      best->iterations,
      best->converged,
      best->x};
  return out;
}

IterativeRun iterative_tomography(const DensityMatrix& truth, int iterations,
                                  double flux_per_iteration, std::uint64_t seed,
                                  const ReconstructionOptions& opts) {
  if (iterations < 1) throw std::invalid_argument("iterative_tomography: iterations < 1");
  auto settings = build_projector_set(truth.num_qubits());

  IterativeRun run;
  std::optional<Eigen::VectorXd> warm;
  for (int m = 1; m <= iterations; ++m) {
    MeasurementRecord block = simulate_counts(
        truth, settings, flux_per_iteration,
        derive_seed(seed, 2 * static_cast<std::uint64_t>(m)));
    block.iteration = m;
    run.blocks.push_back(block);

    MeasurementRecord cumulative = merge_records(run.blocks);
    ReconstructionOptions ropts = opts;
    ropts.seed = derive_seed(seed, 2 * static_cast<std::uint64_t>(m) + 1);
    ropts.warm_start = warm;
    ReconstructionResult recon = reconstruct(cumulative, ropts);
    warm = recon.parameters;
    double fid = fidelity(recon.rho, truth);
    std::vector<PairTangle> pairs;
    if (truth.num_qubits() == 3) {
      pairs = robustness_profile(recon.rho).pair_tangles;
    }
    run.trajectory.push_back({m, std::move(recon), fid, std::move(pairs)});
  }
  return run;
}

namespace {

void collect_measures(const DensityMatrix& rho, const std::optional<StateVariant>& target,
                      std::map<std::string, std::vector<double>>& samples) {
  if (rho.num_qubits() == 3) {
    EntanglementReport rep =
        target ? robustness_profile(rho, *target) : robustness_profile(rho);
    for (const auto& p : rep.pair_tangles) {
      samples["tau2_" + p.first + p.second].push_back(p.value);
    }
    samples["tau2_min"].push_back(rep.tau2_min);
    samples["tau2_avg"].push_back(rep.tau2_avg);
    samples["n3"].push_back(rep.tripartite_negativity);
    samples["s_linear"].push_back(rep.linear_entropy);
    if (rep.witness_value) samples["witness"].push_back(*rep.witness_value);
    if (rep.fidelity_vs_target) samples["fidelity"].push_back(*rep.fidelity_vs_target);
  } else {
    samples["tangle"].push_back(tangle(rho));
    samples["s_linear"].push_back(linear_entropy(rho));
    if (target) {
      if (const auto* p = std::get_if<PureState>(&*target)) {
        samples["fidelity"].push_back(fidelity(*p, rho));
      } else {
        samples["fidelity"].push_back(fidelity(rho, std::get<DensityMatrix>(*target)));
      }
    }
  }
}

} // namespace

MonteCarloErrors monte_carlo_errors(const MeasurementRecord& record, int resamples,
                                    std::uint64_t seed,
                                    const std::optional<StateVariant>& target,
                                    const ReconstructionOptions& opts) {
  if (resamples < 2) throw std::invalid_argument("monte_carlo_errors: need >= 2 resamples");
  std::map<std::string, std::vector<double>> samples;
  for (int r = 0; r < resamples; ++r) {
    std::uint64_t sub = derive_seed(seed, static_cast<std::uint64_t>(r));
    MeasurementRecord resampled = record;
    for (std::size_t k = 0; k < resampled.counts.size(); ++k) {
      auto engine = seeded_engine(sub, k);
      resampled.counts[k] = poisson(engine, static_cast<double>(record.counts[k]));
    }
    ReconstructionOptions ropts = opts;
    ropts.seed = derive_seed(sub, 0xFFFFFFull);
    ReconstructionResult recon = reconstruct(resampled, ropts);
    collect_measures(recon.rho, target, samples);
  }

  MonteCarloErrors out;
  out.resamples = resamples;
  for (const auto& [key, values] : samples) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size() - 1);
    out.mean[key] = mean;
    out.stddev[key] = std::sqrt(var);
  }
  return out;
}

namespace {

Eigen::Matrix2cd su2_from_axis_angle(double x, double y, double z) {
  double angle = std::sqrt(x * x + y * y + z * z);
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
  if (angle < 1e-300) return u;
  double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  double nx = x / angle, ny = y / angle, nz = z / angle;
  u(0, 0) = Complex(c, -s * nz);
  u(0, 1) = Complex(-s * ny, -s * nx);
  u(1, 0) = Complex(s * ny, -s * nx);
  u(1, 1) = Complex(c, s * nz);
  return u;
}

Matrix product_unitary(const Eigen::VectorXd& params, int num_qubits) {
  Matrix full = Matrix::Identity(1, 1);
  for (int q = 0; q < num_qubits; ++q) {
    Eigen::Matrix2cd u =
        su2_from_axis_angle(params[3 * q], params[3 * q + 1], params[3 * q + 2]);
    Matrix next(full.rows() * 2, full.cols() * 2);
    for (Eigen::Index i = 0; i < full.rows(); ++i)
      for (Eigen::Index j = 0; j < full.cols(); ++j)
        next.block(i * 2, j * 2, 2, 2) = full(i, j) * u;
    full = std::move(next);
  }
  return full;
}

} // namespace

LocalUnitaryFit fit_local_unitaries(const DensityMatrix& rho, const StateVariant& target,
                                    int starts, std::uint64_t seed) {
  const int n = rho.num_qubits();
  DensityMatrix target_rho = as_density(target);
  if (target_rho.dim() != rho.dim()) {
    throw std::invalid_argument("fit_local_unitaries: dimension mismatch");
  }
  const bool target_pure = target_rho.purity() > 1.0 - 1e-9;
  const auto* target_psi = std::get_if<PureState>(&target);

  auto score = [&](const Eigen::VectorXd& params) {
    Matrix u = product_unitary(params, n);
    if (target_pure && target_psi) {
      Vector v = u.adjoint() * target_psi->amplitudes();
      return (v.adjoint() * rho.matrix() * v)(0).real();
    }
    DensityMatrix rotated(u * rho.matrix() * u.adjoint(), rho.labels());
    return fidelity(rotated, target_rho);
  };

  Objective obj = with_numeric_gradient(
      [&score](const Eigen::VectorXd& x) { return -score(x); }, 1e-5);

  MinimizeOptions mopts;
  mopts.max_iterations = 500;
  mopts.grad_tol = 1e-9;
  mopts.f_tol = 1e-13;

  std::optional<MinimizeResult> best;
  for (int s = 0; s < std::max(1, starts); ++s) {
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(3 * n);
    if (s > 0) {
      auto engine = seeded_engine(seed, static_cast<std::uint64_t>(s));
      for (int i = 0; i < 3 * n; ++i) x0[i] = std::numbers::pi * (2.0 * uniform01(engine) - 1.0);
    }
    MinimizeResult res = minimize_bfgs(obj, std::move(x0), mopts);
    if (!best || res.value < best->value) best = std::move(res);
  }

  LocalUnitaryFit fit;
  fit.fidelity_before = score(Eigen::VectorXd::Zero(3 * n));
  fit.fidelity_after = -best->value;
  fit.converged = best->converged;
  for (int q = 0; q < n; ++q) {
    fit.unitaries.push_back(su2_from_axis_angle(best->x[3 * q], best->x[3 * q + 1],
                                                best->x[3 * q + 2]));
  }
  return fit;
}

ReducedTomographyResult direct_reduced_tomography(const DensityMatrix& truth,
                                                  const std::string& traced_label,
                                                  double flux, std::uint64_t seed,
                                                  const ReconstructionOptions& opts) {
  Labels keep;
  for (const auto& l : truth.labels()) {
    if (l != traced_label) keep.push_back(l);
  }
  if (keep.size() != truth.labels().size() - 1) {
    throw std::invalid_argument("direct_reduced_tomography: unknown label " + traced_label);
  }
  DensityMatrix reduced = partial_trace(truth, keep);
  MeasurementRecord record =
      simulate_counts(reduced, build_projector_set(reduced.num_qubits()), flux, seed);
  ReconstructionOptions ropts = opts;
  ropts.seed = derive_seed(seed, 0x52u);
  ReconstructionResult recon = reconstruct(record, ropts);
  return {std::move(reduced), std::move(record), std::move(recon)};
}

} // namespace entangle
