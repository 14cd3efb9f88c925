#include "entangle/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

namespace entangle {

namespace {

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

void check_labels(const Labels& labels, std::size_t dim) {
  if (labels.empty()) throw std::invalid_argument("state needs at least one qubit label");
  std::set<std::string> uniq(labels.begin(), labels.end());
  if (uniq.size() != labels.size()) {
    throw std::invalid_argument("qubit labels must be unique");
  }
  if (!is_power_of_two(dim) || dim != (std::size_t{1} << labels.size())) {
    throw std::invalid_argument("dimension does not match 2^(number of labels)");
  }
}

void check_finite(const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) {
      throw std::invalid_argument("non-finite amplitude");
    }
  }
}

void check_finite(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex& z = *(m.data() + i);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::invalid_argument("non-finite matrix entry");
    }
  }
}

std::vector<int> label_slots(const Labels& all, const Labels& subset,
                             const char* what) {
  std::vector<int> slots;
  std::set<std::string> seen;
  for (const auto& l : subset) {
    if (!seen.insert(l).second) {
      throw std::invalid_argument(std::string(what) + ": duplicate label '" + l + "'");
    }
    auto it = std::find(all.begin(), all.end(), l);
    if (it == all.end()) {
      throw std::invalid_argument(std::string(what) + ": unknown label '" + l + "'");
    }
    slots.push_back(static_cast<int>(it - all.begin()));
  }
  return slots;
}

} // namespace

int bit_of(int index, int slot, int num_qubits) {
  return (index >> (num_qubits - 1 - slot)) & 1;
}

PureState::PureState(Vector amplitudes, Labels labels)
    : amps_(std::move(amplitudes)), labels_(std::move(labels)) {
  check_labels(labels_, static_cast<std::size_t>(amps_.size()));
  check_finite(amps_);
  double n2 = amps_.squaredNorm();
  if (std::abs(n2 - 1.0) > kNormTol) {
    throw std::invalid_argument("pure state is not normalized");
  }
}

UnnormalizedState::UnnormalizedState(Vector amplitudes, Labels labels)
    : amps_(std::move(amplitudes)), labels_(std::move(labels)) {
  check_labels(labels_, static_cast<std::size_t>(amps_.size()));
  check_finite(amps_);
}

PureState UnnormalizedState::normalized() const {
  double n2 = norm2();
  if (n2 < 1e-300) throw std::invalid_argument("cannot normalize a zero state");
  return PureState(amps_ / std::sqrt(n2), labels_);
}

DensityMatrix::DensityMatrix(Matrix mat, Labels labels)
    : mat_(std::move(mat)), labels_(std::move(labels)) {
  if (mat_.rows() != mat_.cols()) {
    throw std::invalid_argument("density matrix must be square");
  }
  check_labels(labels_, static_cast<std::size_t>(mat_.rows()));
  check_finite(mat_);
  if ((mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() > kHermTol) {
    throw std::invalid_argument("density matrix is not Hermitian");
  }
  if (std::abs(mat_.trace().real() - 1.0) > kHermTol ||
      std::abs(mat_.trace().imag()) > kHermTol) {
    throw std::invalid_argument("density matrix trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTol) {
    throw std::invalid_argument("density matrix is not positive semidefinite");
  }
}

DensityMatrix density(const PureState& psi) {
  const Vector& a = psi.amplitudes();
  return DensityMatrix(a * a.adjoint(), psi.labels());
}

PureState tensor(const PureState& a, const PureState& b) {
  Labels labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  Vector out(a.dim() * b.dim());
  for (int i = 0; i < a.dim(); ++i) {
    for (int j = 0; j < b.dim(); ++j) {
      out[i * b.dim() + j] = a.amplitudes()[i] * b.amplitudes()[j];
    }
  }
  return PureState(std::move(out), std::move(labels));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  Labels labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  int da = a.dim(), db = b.dim();
  Matrix out(da * db, da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j)
      out.block(i * db, j * db, db, db) = a.matrix()(i, j) * b.matrix();
  return DensityMatrix(std::move(out), std::move(labels));
}

DensityMatrix partial_trace(const DensityMatrix& rho, const Labels& keep) {
  const int n = rho.num_qubits();
  std::vector<int> keep_slots = label_slots(rho.labels(), keep, "partial_trace");
  std::sort(keep_slots.begin(), keep_slots.end()); // output preserves original order
  std::vector<int> traced_slots;
  for (int q = 0; q < n; ++q) {
    if (!std::binary_search(keep_slots.begin(), keep_slots.end(), q)) {
      traced_slots.push_back(q);
    }
  }
  const int nk = static_cast<int>(keep_slots.size());
  const int nt = static_cast<int>(traced_slots.size());
  if (nk == 0) throw std::invalid_argument("partial_trace: must keep at least one qubit");
  const int dk = 1 << nk;
  const int dt = 1 << nt;

  auto full_index = [&](int a, int t) {
    int idx = 0;
    for (int q = 0; q < nk; ++q) {
      idx |= bit_of(a, q, nk) << (n - 1 - keep_slots[q]);
    }
    for (int q = 0; q < nt; ++q) {
      idx |= bit_of(t, q, nt) << (n - 1 - traced_slots[q]);
    }
    return idx;
  };

  Matrix out = Matrix::Zero(dk, dk);
  for (int a = 0; a < dk; ++a) {
    for (int b = 0; b < dk; ++b) {
      Complex sum = 0;
      for (int t = 0; t < dt; ++t) {
        sum += rho.matrix()(full_index(a, t), full_index(b, t));
      }
      out(a, b) = sum;
    }
  }

  Labels out_labels;
  for (int q : keep_slots) out_labels.push_back(rho.labels()[q]);
  return DensityMatrix(std::move(out), std::move(out_labels));
}

Matrix partial_transpose(const DensityMatrix& rho, const Labels& part) {
  const int n = rho.num_qubits();
  std::vector<int> slots = label_slots(rho.labels(), part, "partial_transpose");
  int mask = 0;
  for (int q : slots) mask |= 1 << (n - 1 - q);

  const int d = rho.dim();
  Matrix out(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      // swap the bits of the transposed subsystem between row and column
      int ip = (i & ~mask) | (j & mask);
      int jp = (j & ~mask) | (i & mask);
      out(i, j) = rho.matrix()(ip, jp);
    }
  }
  return out;
}

namespace {

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  Eigen::VectorXd ev = es.eigenvalues();
  // spurious near-zero eigenvalues of rank-deficient inputs would blow up to
  // sqrt(eps) under the root; clip them relative to the largest one
  double cutoff = 64.0 * std::numeric_limits<double>::epsilon() *
                  std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    ev[i] = ev[i] > cutoff ? std::sqrt(ev[i]) : 0.0;
  }
  return es.eigenvectors() * ev.asDiagonal().toDenseMatrix().cast<Complex>() *
         es.eigenvectors().adjoint();
}

} // namespace

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  Matrix sa = psd_sqrt(a.matrix());
  Matrix inner = sa * b.matrix() * sa;
  Eigen::SelfAdjointEigenSolver<Matrix> es(inner, Eigen::EigenvaluesOnly);
  // same relative clip as psd_sqrt, for the same reason
  double cutoff = 64.0 * std::numeric_limits<double>::epsilon() *
                  std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double ev = es.eigenvalues()[i];
    if (ev > cutoff) sum += std::sqrt(ev);
  }
  return std::min(sum * sum, 1.0);
}

double fidelity(const PureState& psi, const DensityMatrix& rho) {
  if (psi.dim() != rho.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  double f = (psi.amplitudes().adjoint() * rho.matrix() * psi.amplitudes())(0).real();
  return std::clamp(f, 0.0, 1.0);
}

double fidelity(const PureState& a, const PureState& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

double linear_entropy(const DensityMatrix& rho) {
  double d = static_cast<double>(rho.dim());
  return std::max(0.0, d / (d - 1.0) * (1.0 - rho.purity()));
}

double linear_entropy_unnormalized(const DensityMatrix& rho) {
  return std::max(0.0, 1.0 - rho.purity());
}

namespace {

Matrix full_unitary(const std::vector<Eigen::Matrix2cd>& us, int num_qubits) {
  if (static_cast<int>(us.size()) != num_qubits) {
    throw std::invalid_argument("apply_local_unitaries: need one unitary per qubit");
  }
  for (const auto& u : us) {
    if ((u.adjoint() * u - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() > kHermTol) {
      throw std::invalid_argument("apply_local_unitaries: matrix is not unitary");
    }
  }
  Matrix full = Matrix::Identity(1, 1);
  for (const auto& u : us) {
    Matrix next(full.rows() * 2, full.cols() * 2);
    for (Eigen::Index i = 0; i < full.rows(); ++i)
      for (Eigen::Index j = 0; j < full.cols(); ++j)
        next.block(i * 2, j * 2, 2, 2) = full(i, j) * u;
    full = std::move(next);
  }
  return full;
}

} // namespace

PureState apply_local_unitaries(const PureState& psi,
                                const std::vector<Eigen::Matrix2cd>& us) {
  Matrix u = full_unitary(us, psi.num_qubits());
  return PureState(u * psi.amplitudes(), psi.labels());
}

DensityMatrix apply_local_unitaries(const DensityMatrix& rho,
                                    const std::vector<Eigen::Matrix2cd>& us) {
  Matrix u = full_unitary(us, rho.num_qubits());
  return DensityMatrix(u * rho.matrix() * u.adjoint(), rho.labels());
}

nlohmann::json state_to_json(const StateVariant& state) {
  nlohmann::json j;
  auto pack = [](const Complex& z) { return nlohmann::json::array({z.real(), z.imag()}); };
  if (const auto* p = std::get_if<PureState>(&state)) {
    j["labels"] = p->labels();
    j["kind"] = "pure";
    auto data = nlohmann::json::array();
    for (int i = 0; i < p->dim(); ++i) data.push_back(pack(p->amplitudes()[i]));
    j["data"] = std::move(data);
  } else {
    const auto& r = std::get<DensityMatrix>(state);
    j["labels"] = r.labels();
    j["kind"] = "density";
    auto data = nlohmann::json::array();
    for (int i = 0; i < r.dim(); ++i)
      for (int k = 0; k < r.dim(); ++k) data.push_back(pack(r.matrix()(i, k)));
    j["data"] = std::move(data);
  }
  return j;
}

StateVariant state_from_json(const nlohmann::json& j) {
  if (!j.contains("labels") || !j.contains("kind") || !j.contains("data")) {
    throw std::invalid_argument("state JSON needs labels, kind and data fields");
  }
  Labels labels = j.at("labels").get<Labels>();
  std::string kind = j.at("kind").get<std::string>();
  const auto& data = j.at("data");
  auto unpack = [](const nlohmann::json& e) {
    if (!e.is_array() || e.size() != 2) {
      throw std::invalid_argument("state JSON entries must be [re, im] pairs");
    }
    return Complex(e[0].get<double>(), e[1].get<double>());
  };
  std::size_t dim = std::size_t{1} << labels.size();
  if (kind == "pure") {
    if (data.size() != dim) throw std::invalid_argument("state JSON has wrong data length");
    Vector v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[static_cast<Eigen::Index>(i)] = unpack(data[i]);
    return PureState(std::move(v), std::move(labels));
  }
  if (kind == "density") {
    if (data.size() != dim * dim) {
      throw std::invalid_argument("state JSON has wrong data length");
    }
    Matrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t k = 0; k < dim; ++k)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
            unpack(data[i * dim + k]);
    return DensityMatrix(std::move(m), std::move(labels));
  }
  throw std::invalid_argument("state JSON kind must be 'pure' or 'density'");
}

void save_state(const std::filesystem::path& path, const StateVariant& state) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << state_to_json(state).dump(2) << "\n";
}

StateVariant load_state(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  return state_from_json(j);
}

DensityMatrix as_density(const StateVariant& state) {
  if (const auto* p = std::get_if<PureState>(&state)) return density(*p);
  return std::get<DensityMatrix>(state);
}

} // namespace entangle
