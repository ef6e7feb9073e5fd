#include "inflchs/problems.hpp"

#include "inflchs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace inflchs::problems {

namespace {

using linalg::Complex;
using linalg::HermitianPair;
using linalg::Index;
using linalg::Matrix;
using linalg::Vector;
using nlohmann::json;

// Typed access to a JSON parameter object; rejects unknown keys on finish().
class Params {
public:
    Params(const json& doc, std::string pointer) : doc_(doc), pointer_(std::move(pointer)) {
        if (!doc_.is_null() && !doc_.is_object()) {
            throw ConfigError(pointer_, "expected an object");
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return doc_.is_object() && doc_.contains(key);
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return doc_.at(key);
    }

    std::string at(const std::string& key) const { return pointer_ + "/" + key; }

    double number(const std::string& key, double fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& v = doc_.at(key);
        if (!v.is_number()) {
            throw ConfigError(at(key), "expected a number");
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            throw ConfigError(at(key), "expected a finite number");
        }
        return x;
    }

    int integer(const std::string& key, int fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& v = doc_.at(key);
        if (!v.is_number_integer()) {
            throw ConfigError(at(key), "expected an integer");
        }
        return v.get<int>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) {
            return fallback;
        }
        const json& v = doc_.at(key);
        if (!v.is_string()) {
            throw ConfigError(at(key), "expected a string");
        }
        return v.get<std::string>();
    }

    CoefficientPreset preset(const std::string& key, const CoefficientPreset& fallback) {
        if (!has(key)) {
            return fallback;
        }
        return CoefficientPreset::from_json(doc_.at(key), at(key));
    }

    void finish() const {
        if (!doc_.is_object()) {
            return;
        }
        for (const auto& item : doc_.items()) {
            if (!seen_.count(item.key())) {
                throw ConfigError(at(item.key()), "unknown parameter");
            }
        }
    }

private:
    const json& doc_;
    std::string pointer_;
    std::set<std::string> seen_;
};

std::vector<double> number_list(const json& doc, const std::string& pointer) {
    if (!doc.is_array()) {
        throw ConfigError(pointer, "expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        if (!doc[i].is_number()) {
            throw ConfigError(pointer + "/" + std::to_string(i), "expected a number");
        }
        out.push_back(doc[i].get<double>());
    }
    return out;
}

Complex complex_entry(const json& doc, const std::string& pointer) {
    if (doc.is_number()) {
        return {doc.get<double>(), 0.0};
    }
    if (doc.is_array() && doc.size() == 2 && doc[0].is_number() && doc[1].is_number()) {
        return {doc[0].get<double>(), doc[1].get<double>()};
    }
    throw ConfigError(pointer, "expected a number or a [re, im] pair");
}

double polyval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

Matrix laplacian_stencil(Index n) {
    Matrix m = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        m(j, j) = -2.0;
        if (j + 1 < n) {
            m(j, j + 1) = 1.0;
            m(j + 1, j) = 1.0;
        }
    }
    return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

HermitianPair pair_from(Matrix L, Matrix H) {
    HermitianPair p;
    p.L = std::move(L);
    p.H = std::move(H);
    p.lambda0 = linalg::min_hermitian_eigenvalue(p.L);
    return p;
}

// Constant schedule, or `pieces` midpoint samples over [0, horizon].
template <class PairAt>
TimeSchedule sampled_schedule(bool time_dependent, double horizon, int pieces, PairAt pair_at) {
    if (!time_dependent) {
        return TimeSchedule::constant(pair_at(0.0));
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon) || pieces < 1) {
        throw BuildError("time-dependent coefficients need a positive horizon and time_pieces >= 1");
    }
    std::vector<double> breaks(pieces + 1);
    std::vector<HermitianPair> pairs;
    for (int i = 0; i <= pieces; ++i) {
        breaks[i] = horizon * i / pieces;
    }
    breaks.back() = horizon;
    for (int i = 0; i < pieces; ++i) {
        pairs.push_back(pair_at(0.5 * (breaks[i] + breaks[i + 1])));
    }
    return TimeSchedule::piecewise(std::move(breaks), std::move(pairs));
}

TimeSchedule shift_if_needed(const TimeSchedule& s, double target) {
    if (!(target > 0.0)) {
        throw BuildError("shift_target must be positive");
    }
    return s.shifted_to(target);
}

void require_grid(int n_grid) {
    if (n_grid < 3) {
        throw BuildError("N_grid must be at least 3");
    }
}

std::string point_name(double x, double t) {
    return "x = " + std::to_string(x) + ", t = " + std::to_string(t);
}

} // namespace

// ---------------------------------------------------------------------------
// Coefficient presets

CoefficientPreset CoefficientPreset::constant_value(double v) {
    CoefficientPreset p;
    p.value = v;
    return p;
}

CoefficientPreset CoefficientPreset::sine_wave(double mode) {
    CoefficientPreset p;
    p.kind = Kind::sine;
    p.mode = mode;
    return p;
}

CoefficientPreset CoefficientPreset::from_json(const json& doc, const std::string& pointer) {
    if (doc.is_number()) {
        return constant_value(doc.get<double>());
    }
    Params in(doc, pointer);
    CoefficientPreset p;
    const std::string kind = in.text("preset", "");
    if (kind == "constant") {
        p.kind = Kind::constant;
        p.value = in.number("value", 0.0);
    } else if (kind == "gaussian") {
        p.kind = Kind::gaussian;
        p.amplitude = in.number("amplitude", 1.0);
        p.center = in.number("center", 0.0);
        p.width = in.number("width", 1.0);
        if (!(p.width > 0.0)) {
            throw ConfigError(in.at("width"), "must be positive");
        }
    } else if (kind == "polynomial") {
        p.kind = Kind::polynomial;
        if (!in.has("coefficients")) {
            throw ConfigError(in.at("coefficients"), "required for the polynomial preset");
        }
        p.coefficients = number_list(in.raw("coefficients"), in.at("coefficients"));
    } else if (kind == "sine") {
        p.kind = Kind::sine;
        p.amplitude = in.number("amplitude", 1.0);
        p.mode = in.number("mode", 1.0);
    } else if (kind == "cap_layer") {
        p.kind = Kind::cap_layer;
        p.depth = in.number("depth", 1.0);
        p.start = in.number("start", 0.0);
        p.stop = in.number("stop", 1.0);
        p.power = in.number("power", 2.0);
        if (!(p.stop > p.start)) {
            throw ConfigError(in.at("stop"), "must exceed start");
        }
    } else {
        throw ConfigError(in.at("preset"),
                          "expected one of constant, gaussian, polynomial, sine, cap_layer");
    }
    if (in.has("time_poly")) {
        p.time_poly = number_list(in.raw("time_poly"), in.at("time_poly"));
    }
    in.finish();
    return p;
}

json CoefficientPreset::to_json() const {
    json doc;
    switch (kind) {
    case Kind::constant:
        doc = {{"preset", "constant"}, {"value", value}};
        break;
    case Kind::gaussian:
        doc = {{"preset", "gaussian"}, {"amplitude", amplitude}, {"center", center}, {"width", width}};
        break;
    case Kind::polynomial:
        doc = {{"preset", "polynomial"}, {"coefficients", coefficients}};
        break;
    case Kind::sine:
        doc = {{"preset", "sine"}, {"amplitude", amplitude}, {"mode", mode}};
        break;
    case Kind::cap_layer:
        doc = {{"preset", "cap_layer"}, {"depth", depth}, {"start", start}, {"stop", stop},
               {"power", power}};
        break;
    }
    if (!time_poly.empty()) {
        doc["time_poly"] = time_poly;
    }
    return doc;
}

double CoefficientPreset::operator()(double x, double t) const {
    double v = 0.0;
    switch (kind) {
    case Kind::constant:
        v = value;
        break;
    case Kind::gaussian: {
        const double d = (x - center) / width;
        v = amplitude * std::exp(-0.5 * d * d);
        break;
    }
    case Kind::polynomial:
        v = polyval(coefficients, x);
        break;
    case Kind::sine:
        v = amplitude * std::sin(mode * std::numbers::pi * x);
        break;
    case Kind::cap_layer:
        if (x >= start && x <= stop) {
            v = -depth * std::pow((x - start) / (stop - start), power);
        }
        break;
    }
    return time_poly.empty() ? v : v * polyval(time_poly, t);
}

bool CoefficientPreset::time_dependent() const {
    return time_poly.size() > 1 &&
           std::any_of(time_poly.begin() + 1, time_poly.end(), [](double c) { return c != 0.0; });
}

// ---------------------------------------------------------------------------
// Parabolic

HermitianPair parabolic_pair(const ParabolicCoefficients& pc, double t) {
    require_grid(pc.N_grid);
    const Index n = pc.N_grid - 2;
    const double h = 1.0 / (pc.N_grid - 1);
    const double inv_h2 = 1.0 / (h * h);
    Matrix L = Matrix::Zero(n, n);
    Matrix H = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        const double x = (j + 1) * h;
        const double a_minus = pc.a(x - 0.5 * h, t);
        const double a_plus = pc.a(x + 0.5 * h, t);
        for (double xs : {x - 0.5 * h, x + 0.5 * h}) {
            if (!(pc.a(xs, t) > 0.0)) {
                throw BuildError("parabolic: ellipticity violated, a <= 0 at " + point_name(xs, t));
            }
        }
        L(j, j) = (a_minus + a_plus) * inv_h2 + pc.c(x, t);
        if (j + 1 < n) {
            L(j, j + 1) = -a_plus * inv_h2;
            L(j + 1, j) = -a_plus * inv_h2;
            const double bsum = pc.b(x, t) + pc.b(x + h, t);
            H(j, j + 1) = Complex(0.0, -bsum / (4.0 * h));
            H(j + 1, j) = Complex(0.0, bsum / (4.0 * h));
        }
    }
    return pair_from(std::move(L), std::move(H));
}

ProblemInstance build_parabolic_1d(const ParabolicCoefficients& pc) {
    require_grid(pc.N_grid);
    const bool td = pc.a.time_dependent() || pc.b.time_dependent() || pc.c.time_dependent();
    TimeSchedule s = sampled_schedule(td, pc.horizon, pc.time_pieces,
                                      [&](double t) { return parabolic_pair(pc, t); });
    const double lambda_pre = s.lambda0();
    s = shift_if_needed(s, pc.shift_target);

    const Index n = pc.N_grid - 2;
    const double h = 1.0 / (pc.N_grid - 1);
    Vector u0(n);
    for (Index j = 0; j < n; ++j) {
        u0(j) = pc.u0((j + 1) * h, 0.0);
    }
    json meta = {{"builder", "parabolic"},
                 {"N_grid", pc.N_grid},
                 {"interior_points", n},
                 {"h", h},
                 {"a", pc.a.to_json()},
                 {"b", pc.b.to_json()},
                 {"c", pc.c.to_json()},
                 {"time_dependent", td},
                 {"lambda0_unshifted", lambda_pre},
                 {"norm_L_grid", s.max_norm_L()}};
    return ProblemInstance(std::move(s), std::move(u0), "parabolic", std::move(meta));
}

// ---------------------------------------------------------------------------
// Queueing

Eigen::MatrixXd queue_generator(const QueueParams& qp) {
    if (!(qp.lambda_rate > 0.0) || !(qp.mu_rate > 0.0) || !std::isfinite(qp.lambda_rate) ||
        !std::isfinite(qp.mu_rate)) {
        throw BuildError("queue: rates must be positive and finite");
    }
    if (qp.servers < 1) {
        throw BuildError("queue: servers must be at least 1");
    }
    if (qp.n_trunc < 2) {
        throw BuildError("queue: n_trunc must be at least 2");
    }
    const int n = qp.n_trunc;
    const int offset = qp.boundary == QueueBoundary::offset ? 1 : 0;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r < n; ++r) {
        const int state = r + offset;
        const double service = std::min(state, qp.servers) * qp.mu_rate;
        const bool last = r == n - 1;
        double out = service;
        if (!last || qp.truncation == QueueTruncation::leaky) {
            out += qp.lambda_rate;
        }
        q(r, r) = -out;
        if (!last) {
            q(r, r + 1) = qp.lambda_rate;
        }
        if (r > 0) {
            q(r, r - 1) = service;
        }
    }
    return q;
}

Matrix queue_solver_matrix(const QueueParams& qp) {
    return -queue_generator(qp).transpose().cast<Complex>();
}

ProblemInstance build_mmc(const QueueParams& qp) {
    const Eigen::MatrixXd q = queue_generator(qp);
    const Matrix a = -q.transpose().cast<Complex>();
    HermitianPair pair = linalg::hermitian_split(a);
    const double lambda_pre = pair.lambda0;
    TimeSchedule s = shift_if_needed(TimeSchedule::constant(pair), qp.shift_target);

    Vector u0 = Vector::Zero(qp.n_trunc);
    u0(0) = 1.0;
    const Eigen::VectorXd row_sums = q.rowwise().sum();
    json leaks = json::array();
    for (Index r = 0; r < row_sums.size(); ++r) {
        if (std::abs(row_sums(r)) > 0.0) {
            leaks.push_back({{"row", r}, {"rate", -row_sums(r)}});
        }
    }
    json meta = {{"builder", qp.servers == 1 ? "mm1" : "mmc"},
                 {"convention", "A = -Q^T"},
                 {"lambda", qp.lambda_rate},
                 {"mu", qp.mu_rate},
                 {"servers", qp.servers},
                 {"n_trunc", qp.n_trunc},
                 {"boundary", qp.boundary == QueueBoundary::standard ? "standard" : "offset"},
                 {"truncation", qp.truncation == QueueTruncation::leaky ? "leaky" : "reflecting"},
                 {"mass_loss_rows", std::move(leaks)},
                 {"lambda0_unshifted", lambda_pre},
                 {"norm_L_bound", 2.0 * (qp.lambda_rate + qp.servers * qp.mu_rate)}};
    return ProblemInstance(std::move(s), std::move(u0), qp.servers == 1 ? "mm1" : "mmc",
                           std::move(meta));
}

ProblemInstance build_mm1(const QueueParams& qp) {
    if (qp.servers != 1) {
        throw BuildError("mm1: servers must be 1");
    }
    return build_mmc(qp);
}

// ---------------------------------------------------------------------------
// Absorbing-potential Schrodinger

namespace {

void require_cap(const CapPotentials& cp) {
    require_grid(cp.N_grid);
    if (!(cp.hbar > 0.0) || !std::isfinite(cp.hbar)) {
        throw BuildError("cap: hbar must be positive");
    }
    if (!(cp.x_hi > cp.x_lo)) {
        throw BuildError("cap: x_hi must exceed x_lo");
    }
}

} // namespace

HermitianPair cap_pair(const CapPotentials& cp, double t) {
    require_cap(cp);
    const Index n = cp.N_grid - 2;
    const double h = (cp.x_hi - cp.x_lo) / (cp.N_grid - 1);
    Matrix L = Matrix::Zero(n, n);
    Matrix H = (-0.5 * cp.hbar / (h * h)) * laplacian_stencil(n);
    for (Index j = 0; j < n; ++j) {
        const double x = cp.x_lo + (j + 1) * h;
        const double vi = cp.V_I(x, t);
        if (vi > 0.0) {
            throw BuildError("cap: V_I > 0 (gain) at " + point_name(x, t));
        }
        L(j, j) = -vi / cp.hbar;
        H(j, j) += cp.V_R(x, t) / cp.hbar;
    }
    return pair_from(std::move(L), std::move(H));
}

Vector wave_packet(const CapPotentials& cp) {
    require_cap(cp);
    if (!(cp.packet_sigma > 0.0)) {
        throw BuildError("cap: packet sigma must be positive");
    }
    const Index n = cp.N_grid - 2;
    const double h = (cp.x_hi - cp.x_lo) / (cp.N_grid - 1);
    Vector u(n);
    for (Index j = 0; j < n; ++j) {
        const double x = cp.x_lo + (j + 1) * h;
        const double d = x - cp.packet_x0;
        u(j) = std::exp(Complex(-d * d / (4.0 * cp.packet_sigma * cp.packet_sigma), cp.packet_k0 * x));
    }
    if (!(u.norm() > 0.0)) {
        throw BuildError("cap: wave packet vanishes on the grid");
    }
    return u / u.norm();
}

ProblemInstance build_cap_schrodinger(const CapPotentials& cp) {
    require_cap(cp);
    if (cp.V_I.time_dependent()) {
        throw BuildError("cap: V_I must not depend on time");
    }
    TimeSchedule s = sampled_schedule(cp.V_R.time_dependent(), cp.horizon, cp.time_pieces,
                                      [&](double t) { return cap_pair(cp, t); });
    const double norm_l = s.max_norm_L();
    s = shift_if_needed(s, cp.shift_target);
    json meta = {{"builder", "cap"},
                 {"N_grid", cp.N_grid},
                 {"x_lo", cp.x_lo},
                 {"x_hi", cp.x_hi},
                 {"hbar", cp.hbar},
                 {"V_R", cp.V_R.to_json()},
                 {"V_I", cp.V_I.to_json()},
                 {"norm_L_grid", norm_l}};
    return ProblemInstance(std::move(s), wave_packet(cp), "cap", std::move(meta));
}

// ---------------------------------------------------------------------------
// Lindblad

LindbladSpec LindbladSpec::amplitude_damping(double gamma) {
    if (!(gamma >= 0.0)) {
        throw BuildError("amplitude damping: gamma must be non-negative");
    }
    LindbladSpec spec;
    spec.H_sys = Matrix::Zero(2, 2);
    Matrix lower = Matrix::Zero(2, 2);
    lower(0, 1) = std::sqrt(gamma);
    spec.jump_ops.push_back(lower);
    spec.rho0 = Matrix::Zero(2, 2);
    spec.rho0(1, 1) = 1.0;
    return spec;
}

Vector vectorize(const Matrix& rho) {
    return Eigen::Map<const Vector>(rho.data(), rho.size());
}

Matrix unvectorize(const Vector& v, Index n) {
    if (v.size() != n * n) {
        throw DimensionError("unvectorize: length is not n^2");
    }
    return Eigen::Map<const Matrix>(v.data(), n, n);
}

Matrix lindblad_superoperator(const LindbladSpec& spec) {
    const Matrix H = linalg::checked_hermitian(spec.H_sys, "lindblad H_sys");
    const Index n = H.rows();
    const Matrix id = Matrix::Identity(n, n);
    Matrix s = -linalg::kI * (kron(id, H) - kron(H.transpose(), id));
    for (const auto& l : spec.jump_ops) {
        if (l.rows() != n || l.cols() != n) {
            throw DimensionError("lindblad: jump operator dimension differs from H_sys");
        }
        const Matrix ldl = l.adjoint() * l;
        s += kron(l.conjugate(), l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id);
    }
    return s;
}

ProblemInstance build_lindblad(const LindbladSpec& spec) {
    const Matrix s = lindblad_superoperator(spec);
    const Index n = spec.H_sys.rows();
    if (spec.rho0.rows() != n || spec.rho0.cols() != n) {
        throw DimensionError("lindblad: rho0 dimension differs from H_sys");
    }
    HermitianPair pair = linalg::hermitian_split(-s);
    const double lambda_pre = pair.lambda0;
    TimeSchedule sched = shift_if_needed(TimeSchedule::constant(pair), spec.shift_target);
    double bound = 0.0;
    for (const auto& l : spec.jump_ops) {
        const double nl = linalg::hermitian_spectral_norm(l.adjoint() * l); // ||L||^2
        bound += 2.0 * nl;
    }
    json meta = {{"builder", "lindblad"},
                 {"system_dim", n},
                 {"jumps", spec.jump_ops.size()},
                 {"vectorization", "column-stacking"},
                 {"convention", "A = -S"},
                 {"lambda0_unshifted", lambda_pre},
                 {"norm_L_bound", bound}};
    return ProblemInstance(std::move(sched), vectorize(spec.rho0), "lindblad", std::move(meta));
}

// ---------------------------------------------------------------------------
// Damped Hamiltonian and scalar

ProblemInstance build_blackhole(const Matrix& H, double gamma, const Vector& u0) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw BuildError("blackhole: gamma must be positive, got " + std::to_string(gamma));
    }
    const Matrix h = linalg::checked_hermitian(H, "blackhole H");
    HermitianPair pair;
    pair.L = gamma * Matrix::Identity(h.rows(), h.rows());
    pair.H = h;
    pair.lambda0 = gamma;
    json meta = {{"builder", "blackhole"},
                 {"gamma", gamma},
                 {"dim", h.rows()},
                 {"norm_L", gamma}};
    return ProblemInstance(TimeSchedule::constant(pair), u0, "blackhole", std::move(meta));
}

ProblemInstance build_scalar(double a_re, double a_im, Complex u0, double shift_target) {
    if (!std::isfinite(a_re) || !std::isfinite(a_im)) {
        throw BuildError("scalar: coefficients must be finite");
    }
    const Matrix L = Matrix::Constant(1, 1, a_re);
    const Matrix H = Matrix::Constant(1, 1, a_im);
    TimeSchedule s = shift_if_needed(TimeSchedule::constant(pair_from(L, H)), shift_target);
    json meta = {{"builder", "scalar"}, {"a_re", a_re}, {"a_im", a_im}};
    return ProblemInstance(std::move(s), Vector::Constant(1, u0), "scalar", std::move(meta));
}

// ---------------------------------------------------------------------------
// Registry

const std::vector<BuilderInfo>& builders() {
    static const std::vector<BuilderInfo> list = {
        {"heat", "1D heat equation u_t = u_xx on [0,1], Dirichlet ends"},
        {"parabolic", "1D parabolic PDE u_t = (a u_x)_x - b u_x - c u with preset coefficients"},
        {"mm1", "truncated M/M/1 queue, A = -Q^T"},
        {"mmc", "truncated M/M/c queue, A = -Q^T"},
        {"cap", "1D Schrodinger equation with a complex absorbing potential"},
        {"lindblad", "Lindblad master equation in column-stacked vectorization"},
        {"blackhole", "damped Hamiltonian evolution exp((-iH - gamma) t)"},
        {"scalar", "scalar ODE du/dt = -(a_re + i a_im) u"},
    };
    return list;
}

Matrix matrix_from_json(const json& doc, const std::string& pointer) {
    if (!doc.is_array() || doc.empty() || !doc[0].is_array()) {
        throw ConfigError(pointer, "expected a non-empty array of rows");
    }
    const Index rows = static_cast<Index>(doc.size());
    const Index cols = static_cast<Index>(doc[0].size());
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        const std::string rp = pointer + "/" + std::to_string(i);
        if (!doc[i].is_array() || static_cast<Index>(doc[i].size()) != cols) {
            throw ConfigError(rp, "rows must all have the same length");
        }
        for (Index j = 0; j < cols; ++j) {
            m(i, j) = complex_entry(doc[i][j], rp + "/" + std::to_string(j));
        }
    }
    return m;
}

Vector complex_vector_from_json(const json& doc, const std::string& pointer) {
    if (!doc.is_array() || doc.empty()) {
        throw ConfigError(pointer, "expected a non-empty array");
    }
    Vector v(static_cast<Index>(doc.size()));
    for (Index i = 0; i < v.size(); ++i) {
        v(i) = complex_entry(doc[i], pointer + "/" + std::to_string(i));
    }
    return v;
}

namespace {

QueueParams queue_params(Params& in, int default_servers) {
    QueueParams qp;
    qp.lambda_rate = in.number("lambda", qp.lambda_rate);
    qp.mu_rate = in.number("mu", qp.mu_rate);
    qp.servers = in.integer("servers", default_servers);
    qp.n_trunc = in.integer("n_trunc", qp.n_trunc);
    qp.shift_target = in.number("shift_target", qp.shift_target);
    const std::string boundary = in.text("boundary", "standard");
    if (boundary == "standard") {
        qp.boundary = QueueBoundary::standard;
    } else if (boundary == "offset") {
        qp.boundary = QueueBoundary::offset;
    } else {
        throw ConfigError(in.at("boundary"), "expected standard or offset");
    }
    const std::string trunc = in.text("truncation", "leaky");
    if (trunc == "leaky") {
        qp.truncation = QueueTruncation::leaky;
    } else if (trunc == "reflecting") {
        qp.truncation = QueueTruncation::reflecting;
    } else {
        throw ConfigError(in.at("truncation"), "expected leaky or reflecting");
    }
    return qp;
}

ParabolicCoefficients parabolic_params(Params& in, bool heat) {
    ParabolicCoefficients pc;
    if (!heat) {
        pc.a.kind = CoefficientPreset::Kind::polynomial;
        pc.a.coefficients = {1.0, 0.5};
        pc.b = CoefficientPreset::constant_value(1.0);
        pc.c = CoefficientPreset::constant_value(0.5);
        pc.a = in.preset("a", pc.a);
        pc.b = in.preset("b", pc.b);
        pc.c = in.preset("c", pc.c);
        pc.horizon = in.number("horizon", pc.horizon);
        pc.time_pieces = in.integer("time_pieces", pc.time_pieces);
    }
    pc.N_grid = in.integer("N_grid", pc.N_grid);
    pc.shift_target = in.number("shift_target", pc.shift_target);
    pc.u0 = in.preset("u0", pc.u0);
    return pc;
}

CapPotentials cap_params(Params& in) {
    CapPotentials cp;
    cp.V_I.kind = CoefficientPreset::Kind::cap_layer;
    cp.V_I.depth = 2.0;
    cp.V_I.start = 7.5;
    cp.V_I.stop = 10.0;
    cp.V_I.power = 2.0;
    cp.V_R = in.preset("V_R", cp.V_R);
    cp.V_I = in.preset("V_I", cp.V_I);
    cp.hbar = in.number("hbar", cp.hbar);
    cp.N_grid = in.integer("N_grid", cp.N_grid);
    cp.x_lo = in.number("x_lo", cp.x_lo);
    cp.x_hi = in.number("x_hi", cp.x_hi);
    cp.horizon = in.number("horizon", cp.horizon);
    cp.time_pieces = in.integer("time_pieces", cp.time_pieces);
    cp.shift_target = in.number("shift_target", cp.shift_target);
    cp.packet_x0 = in.number("packet_x0", cp.packet_x0);
    cp.packet_sigma = in.number("packet_sigma", cp.packet_sigma);
    cp.packet_k0 = in.number("packet_k0", cp.packet_k0);
    return cp;
}

LindbladSpec lindblad_params(Params& in) {
    const double gamma = in.number("gamma", 1.0);
    LindbladSpec spec = LindbladSpec::amplitude_damping(gamma);
    if (in.has("H")) {
        spec.H_sys = matrix_from_json(in.raw("H"), in.at("H"));
        const Index n = spec.H_sys.rows();
        if (!in.has("jumps") || !in.has("rho0")) {
            throw ConfigError(in.at("H"), "a custom H requires jumps and rho0");
        }
        spec.jump_ops.clear();
        const json& jumps = in.raw("jumps");
        if (!jumps.is_array()) {
            throw ConfigError(in.at("jumps"), "expected an array of matrices");
        }
        for (std::size_t i = 0; i < jumps.size(); ++i) {
            spec.jump_ops.push_back(matrix_from_json(jumps[i], in.at("jumps") + "/" + std::to_string(i)));
        }
        spec.rho0 = matrix_from_json(in.raw("rho0"), in.at("rho0"));
        if (spec.H_sys.cols() != n) {
            throw ConfigError(in.at("H"), "must be square");
        }
    } else if (in.has("jumps") || in.has("rho0")) {
        throw ConfigError(in.at("H"), "jumps and rho0 require an explicit H");
    }
    spec.shift_target = in.number("shift_target", spec.shift_target);
    return spec;
}

} // namespace

ProblemInstance build_named(const std::string& name, const json& params,
                            const std::string& pointer) {
    Params in(params, pointer);
    auto done = [&](ProblemInstance p) {
        in.finish();
        return p;
    };
    if (name == "heat" || name == "parabolic") {
        const ParabolicCoefficients pc = parabolic_params(in, name == "heat");
        in.finish();
        return build_parabolic_1d(pc);
    }
    if (name == "mm1" || name == "mmc") {
        const QueueParams qp = queue_params(in, name == "mm1" ? 1 : 2);
        in.finish();
        return name == "mm1" ? build_mm1(qp) : build_mmc(qp);
    }
    if (name == "cap") {
        const CapPotentials cp = cap_params(in);
        in.finish();
        return build_cap_schrodinger(cp);
    }
    if (name == "lindblad") {
        const LindbladSpec spec = lindblad_params(in);
        in.finish();
        return build_lindblad(spec);
    }
    if (name == "blackhole") {
        Matrix H = Matrix::Zero(2, 2);
        H(0, 0) = 1.0;
        H(1, 1) = -1.0;
        if (in.has("H")) {
            H = matrix_from_json(in.raw("H"), in.at("H"));
        }
        const double gamma = in.number("gamma", 0.5);
        Vector u0(H.rows());
        if (in.has("u0")) {
            u0 = complex_vector_from_json(in.raw("u0"), in.at("u0"));
        } else {
            u0.setConstant(Complex(1.0, 0.0) / std::sqrt(static_cast<double>(H.rows())));
        }
        return done(build_blackhole(H, gamma, u0));
    }
    if (name == "scalar") {
        const double a_re = in.number("a_re", 1.0);
        const double a_im = in.number("a_im", 0.0);
        Complex u0 = 1.0;
        if (in.has("u0")) {
            u0 = complex_entry(in.raw("u0"), in.at("u0"));
        }
        const double target = in.number("shift_target", 0.1);
        return done(build_scalar(a_re, a_im, u0, target));
    }
    throw ConfigError(pointer.substr(0, pointer.rfind('/')) + "/name",
                      "unknown problem '" + name + "'");
}

ProblemInstance default_instance(const std::string& name) {
    return build_named(name, json::object());
}

} // namespace inflchs::problems
