#include "risem/linear_ris.hpp"

#include <cmath>
#include <string>

namespace risem {

namespace {

void check_cell(const LinearCell& c, std::size_t n) {
    if (!(c.area >= 0.0) || !std::isfinite(c.area))
        throw ValidationError("linear cell " + std::to_string(n) + ": area must be non-negative");
    if (!(c.b >= 0.0) || !std::isfinite(c.b))
        throw ValidationError("linear cell " + std::to_string(n) + ": b must be non-negative");
    if (!std::isfinite(c.phase)) throw ValidationError("linear cell " + std::to_string(n) + ": phase must be finite");
}

nlohmann::json complex_list(const Eigen::VectorXcd& v) {
    auto out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
    return out;
}

nlohmann::json phasor_list(const std::vector<double>& phases) {
    auto out = nlohmann::json::array();
    for (double p : phases) out.push_back({std::cos(p), std::sin(p)});
    return out;
}

cplx read_complex(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw ValidationError("complex values are [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

LinearRis::LinearRis(std::size_t count, double spacing, const LinearCell& cell, WaveContext ctx)
    : LinearRis(spacing, std::vector<LinearCell>(count, cell), ctx) {}

LinearRis::LinearRis(double spacing, std::vector<LinearCell> cells, WaveContext ctx)
    : spacing_(spacing), cells_(std::move(cells)), ctx_(ctx) {
    if (cells_.empty()) throw ValidationError("a linear RIS needs at least one cell");
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ValidationError("cell spacing must be positive");
    rebuild();
}

void LinearRis::rebuild() {
    const double lambda = ctx_.wavelength();
    const double k = ctx_.wavenumber();
    table_.resize(cells_.size());
    for (std::size_t n = 0; n < cells_.size(); ++n) {
        LinearCell& c = cells_[n];
        check_cell(c, n);
        c.phase = wrap_phase(c.phase);
        table_.y[n] = k * static_cast<double>(n) * spacing_;
        table_.half_b[n] = kPi * c.b / lambda;
        table_.weight[n] = c.area / lambda;
        table_.phase[n] = c.phase;
    }
}

std::vector<double> LinearRis::phases() const {
    std::vector<double> out;
    out.reserve(cells_.size());
    for (const auto& c : cells_) out.push_back(c.phase);
    return out;
}

std::vector<double> LinearRis::areas() const {
    std::vector<double> out;
    out.reserve(cells_.size());
    for (const auto& c : cells_) out.push_back(c.area);
    return out;
}

bool LinearRis::uniform_area() const {
    for (const auto& c : cells_)
        if (c.area != cells_.front().area) return false;
    return true;
}

LinearRis LinearRis::with_phases(std::span<const double> phases) const {
    if (phases.size() != cells_.size()) throw DimensionError("phase vector length must match the cell count");
    std::vector<LinearCell> cells = cells_;
    for (std::size_t n = 0; n < cells.size(); ++n) cells[n].phase = phases[n];
    return LinearRis(spacing_, std::move(cells), ctx_);
}

LinearRis LinearRis::with_weights(std::span<const cplx> weights) const {
    if (weights.size() != cells_.size()) throw DimensionError("weight vector length must match the cell count");
    std::vector<LinearCell> cells = cells_;
    for (std::size_t n = 0; n < cells.size(); ++n) {
        cells[n].area = std::abs(weights[n]);
        cells[n].phase = std::arg(weights[n]);
    }
    return LinearRis(spacing_, std::move(cells), ctx_);
}

RisGeometry LinearRis::to_geometry(double edge_a) const {
    std::vector<UnitCell> cells;
    cells.reserve(cells_.size());
    for (std::size_t n = 0; n < cells_.size(); ++n) {
        const LinearCell& c = cells_[n];
        cells.push_back({{0.0, static_cast<double>(n) * spacing_, 0.0}, edge_a, c.b, c.area, c.phase});
    }
    return RisGeometry(std::move(cells), ctx_);
}

cplx LinearRis::array_factor(double theta_i, double theta_s) const {
    return kernels::active().steering_sum(table_.view(), 0.0, std::sin(theta_i) + std::sin(theta_s), 0.0);
}

cplx linear_field(const LinearRis& ris, const LinearWave& wave, const LinearObservation& obs) {
    const WaveContext& ctx = ris.context();
    return ctx.scattering_constant() * ctx.propagation(obs.r) * (wave.amplitude * std::cos(wave.theta)) *
           ris.array_factor(wave.theta, obs.theta);
}

cplx linear_field_multi(const LinearRis& ris, std::span<const LinearWave> waves, const LinearObservation& obs) {
    cplx total{};
    for (const LinearWave& w : waves) total += linear_field(ris, w, obs);
    return total;
}

cplx steering_function(const LinearRis& ris, double theta_i, double theta_s) {
    return ris.context().scattering_constant() * ris.array_factor(theta_i, theta_s);
}

double linear_rcs(const LinearRis& ris, double theta_i, double theta_s) {
    const double ci = std::cos(theta_i);
    return 4.0 * kPi * ci * ci * std::norm(steering_function(ris, theta_i, theta_s));
}

Eigen::MatrixXcd vandermonde(std::span<const double> knot_phases, std::size_t columns) {
    const auto rows = static_cast<Eigen::Index>(knot_phases.size());
    Eigen::MatrixXcd v(rows, static_cast<Eigen::Index>(columns));
    std::vector<double> arg(knot_phases.size()), s(knot_phases.size()), c(knot_phases.size());
    const auto& k = kernels::active();
    for (std::size_t col = 0; col < columns; ++col) {
        for (std::size_t r = 0; r < knot_phases.size(); ++r) arg[r] = static_cast<double>(col) * knot_phases[r];
        k.sincos(arg, s, c);
        for (Eigen::Index r = 0; r < rows; ++r) v(r, static_cast<Eigen::Index>(col)) = cplx(c[r], s[r]);
    }
    return v;
}

std::vector<double> dft_grid_angles(std::size_t n) {
    if (n == 0) throw ValidationError("grid size must be positive");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::asin(-1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n));
    return out;
}

MimoSystem::MimoSystem(double wavelength, cplx reflection, double spacing, std::vector<double> incident_angles,
                       std::vector<double> scatter_angles, std::vector<double> radii, Eigen::VectorXcd weights)
    : wavelength_(wavelength),
      reflection_(reflection),
      spacing_(spacing),
      incident_angles_(std::move(incident_angles)),
      scatter_angles_(std::move(scatter_angles)),
      radii_(std::move(radii)),
      weights_(std::move(weights)) {
    const WaveContext ctx(wavelength_, reflection_);
    if (incident_angles_.empty()) throw ValidationError("MIMO system needs at least one incident angle");
    if (scatter_angles_.empty()) throw ValidationError("MIMO system needs at least one observation point");
    if (radii_.size() != scatter_angles_.size()) throw DimensionError("one radius per observation angle is required");
    if (weights_.size() == 0) throw ValidationError("MIMO system needs at least one cell");
    if (!(spacing_ > 0.0)) throw ValidationError("cell spacing must be positive");
    for (double r : radii_)
        if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("observation radius must be positive");

    prefactor_ = ctx.scattering_constant() / wavelength_;
    attenuation_.resize(static_cast<Eigen::Index>(radii_.size()));
    for (std::size_t t = 0; t < radii_.size(); ++t) attenuation_[static_cast<Eigen::Index>(t)] = ctx.propagation(radii_[t]);
    obliquity_.resize(static_cast<Eigen::Index>(incident_angles_.size()));
    for (std::size_t m = 0; m < incident_angles_.size(); ++m)
        obliquity_[static_cast<Eigen::Index>(m)] = std::cos(incident_angles_[m]);
    scatter_v_ = vandermonde(scatter_knot_phases(), cells());
    incident_v_ = vandermonde(incident_knot_phases(), cells());
}

std::vector<double> MimoSystem::scatter_knot_phases() const {
    std::vector<double> out;
    for (double t : scatter_angles_) out.push_back(kTwoPi * spacing_ * std::sin(t) / wavelength_);
    return out;
}

std::vector<double> MimoSystem::incident_knot_phases() const {
    std::vector<double> out;
    for (double t : incident_angles_) out.push_back(kTwoPi * spacing_ * std::sin(t) / wavelength_);
    return out;
}

MimoSystem MimoSystem::with_weights(const Eigen::VectorXcd& weights) const {
    if (weights.size() != weights_.size()) throw DimensionError("weight vector length must match the cell count");
    MimoSystem copy = *this;
    copy.weights_ = weights;
    return copy;
}

Eigen::VectorXcd MimoSystem::effective_incident(const Eigen::VectorXcd& incident) const {
    if (static_cast<std::size_t>(incident.size()) != inputs())
        throw DimensionError("incident vector has " + std::to_string(incident.size()) + " entries, system expects " +
                             std::to_string(inputs()));
    const auto& k = kernels::active();
    Eigen::VectorXcd scaled = obliquity_.cast<cplx>().cwiseProduct(incident);
    Eigen::VectorXcd out(weights_.size());
    const auto m = static_cast<std::size_t>(incident_v_.rows());
    for (Eigen::Index n = 0; n < out.size(); ++n)
        out[n] = k.dot({incident_v_.col(n).data(), m}, {scaled.data(), m});
    return out;
}

Eigen::MatrixXcd MimoSystem::transfer() const {
    return prefactor_ * attenuation_.asDiagonal() * scatter_v_ * weights_.asDiagonal() * incident_v_.transpose() *
           obliquity_.cast<cplx>().asDiagonal();
}

nlohmann::json MimoSystem::to_json() const {
    nlohmann::json doc;
    doc["format"] = "risem-mimo";
    doc["version"] = 1;
    doc["sampling_model"] = kSamplingModel;
    doc["dimensions"] = {{"outputs", outputs()}, {"cells", cells()}, {"inputs", inputs()}};
    doc["wavelength"] = wavelength_;
    doc["spacing"] = spacing_;
    doc["reflection"] = {reflection_.real(), reflection_.imag()};
    doc["prefactor"] = {prefactor_.real(), prefactor_.imag()};
    doc["incident"] = {{"angles_rad", incident_angles_},
                       {"knots", phasor_list(incident_knot_phases())},
                       {"obliquity", std::vector<double>(obliquity_.data(), obliquity_.data() + obliquity_.size())}};
    doc["scatter"] = {{"angles_rad", scatter_angles_},
                      {"radii", radii_},
                      {"knots", phasor_list(scatter_knot_phases())},
                      {"attenuation", complex_list(attenuation_)}};
    doc["weights"] = complex_list(weights_);
    return doc;
}

MimoSystem MimoSystem::from_json(const nlohmann::json& doc) {
    try {
        if (doc.value("format", "") != "risem-mimo") throw ValidationError("not a risem-mimo document");
        if (doc.value("sampling_model", "") != kSamplingModel)
            throw ValidationError("unsupported sampling model in MIMO document");
        Eigen::VectorXcd w(static_cast<Eigen::Index>(doc.at("weights").size()));
        for (std::size_t n = 0; n < doc.at("weights").size(); ++n)
            w[static_cast<Eigen::Index>(n)] = read_complex(doc.at("weights")[n]);
        MimoSystem sys(doc.at("wavelength").get<double>(), read_complex(doc.at("reflection")),
                       doc.at("spacing").get<double>(), doc.at("incident").at("angles_rad").get<std::vector<double>>(),
                       doc.at("scatter").at("angles_rad").get<std::vector<double>>(),
                       doc.at("scatter").at("radii").get<std::vector<double>>(), std::move(w));
        const auto& dims = doc.at("dimensions");
        if (dims.at("outputs").get<std::size_t>() != sys.outputs() || dims.at("cells").get<std::size_t>() != sys.cells() ||
            dims.at("inputs").get<std::size_t>() != sys.inputs())
            throw DimensionError("MIMO document dimensions disagree with its contents");
        return sys;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed MIMO document: ") + e.what());
    }
}

MimoSystem assemble_mimo(const LinearRis& ris, std::span<const double> incident_angles,
                         std::span<const LinearObservation> observations) {
    if (incident_angles.empty()) throw ValidationError("assemble_mimo: incident angle list is empty");
    if (observations.empty()) throw ValidationError("assemble_mimo: observation list is empty");
    std::vector<double> scatter, radii;
    for (const auto& o : observations) {
        scatter.push_back(o.theta);
        radii.push_back(o.r);
    }
    Eigen::VectorXcd w(static_cast<Eigen::Index>(ris.size()));
    for (std::size_t n = 0; n < ris.size(); ++n) {
        const LinearCell& c = ris.cells()[n];
        w[static_cast<Eigen::Index>(n)] = std::polar(c.area, c.phase);
    }
    return MimoSystem(ris.context().wavelength(), ris.context().reflection(), ris.spacing(),
                      std::vector<double>(incident_angles.begin(), incident_angles.end()), std::move(scatter),
                      std::move(radii), std::move(w));
}

Eigen::VectorXcd apply_mimo(const MimoSystem& sys, const Eigen::VectorXcd& incident) {
    const Eigen::VectorXcd weighted = sys.weights().cwiseProduct(sys.effective_incident(incident));
    const auto& k = kernels::active();
    const Eigen::MatrixXcd& vs = sys.scatter_steering();
    const auto rows = static_cast<std::size_t>(vs.rows());
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(vs.rows());
    for (Eigen::Index n = 0; n < vs.cols(); ++n) k.axpy(weighted[n], {vs.col(n).data(), rows}, {out.data(), rows});
    return sys.prefactor() * sys.attenuation().cwiseProduct(out);
}

}  // namespace risem
