#include "smallgain/qrc.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <sstream>

namespace smallgain {

namespace {

constexpr double kStateTol = 1e-10;

void check_qubits(int n)
{
    if (n < 1 || n > kMaxQubits) {
        std::ostringstream os;
        os << "qubit count " << n << " outside supported range [1, " << kMaxQubits << "]";
        throw std::invalid_argument(os.str());
    }
}

int qubits_for_dim(Index dim)
{
    int n = 0;
    while ((Index{1} << n) < dim) ++n;
    if ((Index{1} << n) != dim) throw std::invalid_argument("density matrix dimension must be a power of two");
    return n;
}

void require_unitary(const CMat& U, Index dim, const char* name)
{
    if (U.rows() != dim || U.cols() != dim) throw std::invalid_argument(std::string(name) + " has wrong dimension");
    if ((U.adjoint() * U - CMat::Identity(dim, dim)).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument(std::string(name) + " is not unitary");
}

void require_valid(const CMat& rho, double tol, bool psd)
{
    const DensityDefects d = inspect_density(rho, psd);
    if (d.hermitian > tol || d.trace > tol || (psd && d.min_eigenvalue < -tol)) {
        std::ostringstream os;
        os << "invalid density matrix: hermitian defect " << d.hermitian << ", trace error " << d.trace
           << ", min eigenvalue " << d.min_eigenvalue;
        throw std::runtime_error(os.str());
    }
}

}  // namespace

CMat pauli_on(Pauli kind, int qubit, int n_qubits)
{
    check_qubits(n_qubits);
    if (qubit < 1 || qubit > n_qubits) throw std::out_of_range("qubit index out of range");
    CMat p(2, 2);
    if (kind == Pauli::X) p << 0, 1, 1, 0;
    else p << 1, 0, 0, -1;
    CMat out = CMat::Identity(1, 1);
    for (int i = 1; i <= n_qubits; ++i) out = kron(out, i == qubit ? p : CMat(CMat::Identity(2, 2)));
    return out;
}

DensityDefects inspect_density(const CMat& rho, bool with_spectrum)
{
    DensityDefects d;
    d.hermitian = hermitian_defect(rho);
    d.trace = std::abs(rho.trace() - Complex(1.0, 0.0));
    if (with_spectrum) {
        const CMat h = 0.5 * (rho + rho.adjoint());
        Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
        d.min_eigenvalue = es.eigenvalues()(0);
    }
    return d;
}

DensityMatrix::DensityMatrix(CMat rho, double tol) : rho_(std::move(rho))
{
    if (rho_.rows() != rho_.cols()) throw std::invalid_argument("density matrix must be square");
    n_ = qubits_for_dim(rho_.rows());
    require_valid(rho_, tol, true);
}

DensityMatrix DensityMatrix::ground(int n_qubits)
{
    check_qubits(n_qubits);
    const Index d = Index{1} << n_qubits;
    CMat m = CMat::Zero(d, d);
    m(0, 0) = 1.0;
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::maximally_mixed(int n_qubits)
{
    check_qubits(n_qubits);
    const Index d = Index{1} << n_qubits;
    return DensityMatrix(CMat::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::random(int n_qubits, std::mt19937_64& rng)
{
    check_qubits(n_qubits);
    const Index d = Index{1} << n_qubits;
    std::normal_distribution<double> nd;
    CMat g(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) g(i, j) = Complex(nd(rng), nd(rng));
    CMat rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix(std::move(rho));
}

CMat z_product(int n_qubits)
{
    check_qubits(n_qubits);
    CMat z(2, 2);
    z << 1, 0, 0, -1;
    CMat out = CMat::Identity(1, 1);
    for (int i = 0; i < n_qubits; ++i) out = kron(out, z);
    return out;
}

CMat x_rotation_product(std::span<const double> thetas)
{
    check_qubits(static_cast<int>(thetas.size()));
    CMat out = CMat::Identity(1, 1);
    for (double t : thetas) {
        CMat r(2, 2);
        const Complex c(std::cos(t), 0.0);
        const Complex s(0.0, -std::sin(t));
        r << c, s, s, c;
        out = kron(out, r);
    }
    return out;
}

QrcUnitaries build_unitaries(int n_qubits, std::span<const double> theta_w2, std::span<const double> theta_v1)
{
    check_qubits(n_qubits);
    if (theta_w2.size() != static_cast<std::size_t>(n_qubits) || theta_v1.size() != static_cast<std::size_t>(n_qubits))
        throw std::invalid_argument("one rotation angle per qubit required");
    QrcUnitaries u;
    u.U_w1 = z_product(n_qubits);
    u.U_v2 = u.U_w1;
    u.U_w2 = x_rotation_product(theta_w2);
    u.U_v1 = x_rotation_product(theta_v1);
    return u;
}

QrcUnitaries build_unitaries(int n_qubits, std::mt19937_64& rng)
{
    check_qubits(n_qubits);
    std::uniform_real_distribution<double> dist(-std::numbers::pi, std::numbers::pi);
    std::vector<double> tw(n_qubits), tv(n_qubits);
    for (double& t : tw) t = dist(rng);
    for (double& t : tv) t = dist(rng);
    return build_unitaries(n_qubits, tw, tv);
}

QrcSubsystem::QrcSubsystem(int n, double ew, double ev, double ephi, CMat phi_, QrcUnitaries U_)
    : n_qubits(n), eps_w(ew), eps_v(ev), eps_phi(ephi), phi(std::move(phi_)), U(std::move(U_))
{
    check_qubits(n);
    if (!(eps_w > 0.0 && eps_v > 0.0 && eps_phi > 0.0))
        throw std::invalid_argument("QRC mixing weights must all be positive");
    if (std::abs(eps_w + eps_v + eps_phi - 1.0) > 1e-12)
        throw std::invalid_argument("QRC mixing weights must sum to 1");
    const Index d = dim();
    if (phi.rows() != d || phi.cols() != d) throw std::invalid_argument("reset state has wrong dimension");
    require_valid(phi, kStateTol, true);
    require_unitary(U.U_w1, d, "U_w1");
    require_unitary(U.U_w2, d, "U_w2");
    require_unitary(U.U_v1, d, "U_v1");
    require_unitary(U.U_v2, d, "U_v2");
}

QrcSubsystem make_qrc_subsystem(int n_qubits, const QrcMixing& mixing, std::mt19937_64& rng)
{
    return QrcSubsystem(n_qubits, mixing.eps_w, mixing.eps_v, mixing.eps_phi, DensityMatrix::ground(n_qubits).matrix(),
                        build_unitaries(n_qubits, rng));
}

QrcPair make_qrc_pair(int n1, int n2, const QrcMixing& mix1, const QrcMixing& mix2, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    QrcPair p;
    p.sub1 = make_qrc_subsystem(n1, mix1, rng);
    p.sub2 = make_qrc_subsystem(n2, mix2, rng);
    p.seed = seed;
    return p;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

CMat qrc_apply(const QrcSubsystem& sub, const CMat& rho, double w, double v)
{
    const double gw = logistic(w);
    const double gv = logistic(v);
    const QrcUnitaries& U = sub.U;
    CMat out = (sub.eps_w * gw) * (U.U_w1 * rho * U.U_w1.adjoint());
    out.noalias() += (sub.eps_w * (1.0 - gw)) * (U.U_w2 * rho * U.U_w2.adjoint());
    out.noalias() += (sub.eps_v * gv) * (U.U_v1 * rho * U.U_v1.adjoint());
    out.noalias() += (sub.eps_v * (1.0 - gv)) * (U.U_v2 * rho * U.U_v2.adjoint());
    out += sub.eps_phi * sub.phi;
    return out;
}

DensityMatrix qrc_step(const QrcSubsystem& sub, const DensityMatrix& rho, double w, double v)
{
    if (rho.matrix().rows() != sub.dim()) throw std::invalid_argument("state dimension does not match subsystem");
    return DensityMatrix(qrc_apply(sub, rho.matrix(), w, v), kStateTol);
}

double schatten1(const CMat& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMat> svd(m);
    return svd.singularValues().sum();
}

Vec subsystem_features(const CMat& rho, int n_qubits)
{
    const Index d = Index{1} << n_qubits;
    if (rho.rows() != d) throw std::invalid_argument("state dimension does not match qubit count");
    Vec f = Vec::Zero(n_qubits);
    double imag = 0.0;
    for (Index b = 0; b < d; ++b) {
        const Complex p = rho(b, b);
        imag = std::max(imag, std::abs(p.imag()));
        for (int i = 0; i < n_qubits; ++i) {
            // qubit 1 is the most significant bit
            const bool one = (b >> (n_qubits - 1 - i)) & 1;
            f(i) += one ? -p.real() : p.real();
        }
    }
    if (imag > 1e-9) throw std::runtime_error("readout has an imaginary residue; state is not Hermitian");
    return f;
}

Vec readout_features(const CMat& rho1, int n1, const CMat& rho2, int n2)
{
    Vec f(n1 + n2);
    f << subsystem_features(rho1, n1), subsystem_features(rho2, n2);
    return f;
}

double qrc_subsystem_output(const QrcSubsystem& sub, const CMat& rho) { return subsystem_features(rho, sub.n_qubits).sum(); }

MarginReport qrc_small_gain_margin(const QrcPair& pair, double lam)
{
    if (!(lam > 0.0)) throw std::invalid_argument("lambda must be positive");
    const QrcSubsystem& a = pair.sub1;
    const QrcSubsystem& b = pair.sub2;
    MarginReport r;
    r.lhs = 4.0 * a.eps_v * b.eps_v * kLogisticLipschitz * kLogisticLipschitz * a.n_qubits * b.n_qubits /
            (a.eps_phi * b.eps_phi);
    r.rhs = 1.0 / ((1.0 + lam) * (1.0 + lam));
    r.holds = r.lhs < r.rhs;
    return r;
}

TraceBound trace_bound_check(const CMat& A, const CMat& B)
{
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
        throw std::invalid_argument("trace_bound_check: square matrices of equal size required");
    const double scale = std::max({1.0, A.cwiseAbs().maxCoeff(), B.cwiseAbs().maxCoeff()});
    if (hermitian_defect(A) > 1e-10 * scale || hermitian_defect(B) > 1e-10 * scale)
        throw std::invalid_argument("trace_bound_check: inputs must be Hermitian");
    return {std::abs((A * B).trace()), sigma_max(A) * schatten1(B)};
}

Vec embed_hermitian(const CMat& m)
{
    const Index d = m.rows();
    Vec x(d * d);
    Index k = 0;
    for (Index i = 0; i < d; ++i) x(k++) = m(i, i).real();
    for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j) {
            x(k++) = m(i, j).real();
            x(k++) = m(i, j).imag();
        }
    return x;
}

CMat unembed_hermitian(const Vec& x, Index dim)
{
    if (x.size() != dim * dim) throw std::invalid_argument("embedded Hermitian vector has wrong length");
    CMat m(dim, dim);
    Index k = 0;
    for (Index i = 0; i < dim; ++i) m(i, i) = Complex(x(k++), 0.0);
    for (Index i = 0; i < dim; ++i)
        for (Index j = i + 1; j < dim; ++j) {
            const Complex c(x(k), x(k + 1));
            k += 2;
            m(i, j) = c;
            m(j, i) = std::conj(c);
        }
    return m;
}

std::pair<CMat, CMat> split_qrc_state(const QrcPair& pair, const Vec& joint)
{
    const Index d1 = pair.sub1.dim();
    const Index d2 = pair.sub2.dim();
    if (joint.size() != d1 * d1 + d2 * d2) throw std::invalid_argument("joint QRC state has wrong length");
    return {unembed_hermitian(joint.head(d1 * d1), d1), unembed_hermitian(joint.tail(d2 * d2), d2)};
}

Vec join_qrc_state(const CMat& rho1, const CMat& rho2)
{
    Vec a = embed_hermitian(rho1);
    Vec b = embed_hermitian(rho2);
    Vec x(a.size() + b.size());
    x << a, b;
    return x;
}

FeedbackPair build_qrc_closed_loop(const QrcPair& pair)
{
    auto make = [](const QrcSubsystem& s, const char* name) {
        SystemDef d;
        d.name = name;
        d.state_dim = s.dim() * s.dim();
        d.loop_input_dim = 1;
        d.external_input_dim = 1;
        d.output_dim = 1;
        d.update = [s](long k, const Vec& x, const Vec& v, const Vec& u) -> Vec {
            const CMat next = qrc_apply(s, unembed_hermitian(x, s.dim()), u(0), v(0));
            const DensityDefects def = inspect_density(next, false);
            if (def.trace > kStateTol) {
                std::ostringstream os;
                os << "QRC trace drift " << def.trace << " at step " << k;
                throw SimulationError(os.str(), k);
            }
            return embed_hermitian(next);
        };
        d.output = [s](long, const Vec& x, const Vec&, const Vec&) -> Vec {
            Vec y(1);
            y(0) = qrc_subsystem_output(s, unembed_hermitian(x, s.dim()));
            return y;
        };
        return d;
    };
    FeedbackPair fp;
    fp.sys1 = make(pair.sub1, "qrc1");
    fp.sys2 = make(pair.sub2, "qrc2");
    const int n1 = pair.sub1.n_qubits;
    const int n2 = pair.sub2.n_qubits;
    fp.sample_initial_state = [n1, n2](std::mt19937_64& rng) {
        const DensityMatrix a = DensityMatrix::random(n1, rng);
        const DensityMatrix b = DensityMatrix::random(n2, rng);
        return join_qrc_state(a.matrix(), b.matrix());
    };
    fp.state_distance = [pair](const Vec& a, const Vec& b) {
        auto [a1, a2] = split_qrc_state(pair, a);
        auto [b1, b2] = split_qrc_state(pair, b);
        return schatten1(a1 - b1) + schatten1(a2 - b2);
    };
    return fp;
}

void to_json(nlohmann::json& j, const CMat& m)
{
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        std::vector<double> r(m.cols()), c(m.cols());
        for (Index k = 0; k < m.cols(); ++k) {
            r[k] = m(i, k).real();
            c[k] = m(i, k).imag();
        }
        re.push_back(r);
        im.push_back(c);
    }
    j = {{"re", re}, {"im", im}};
}

void to_json(nlohmann::json& j, const QrcSubsystem& s)
{
    j = {{"n_qubits", s.n_qubits}, {"eps_w", s.eps_w}, {"eps_v", s.eps_v}, {"eps_phi", s.eps_phi}};
}

}  // namespace smallgain
