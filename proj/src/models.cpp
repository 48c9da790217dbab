#include "transposit/models.hpp"

#include <cmath>
#include <numbers>

#include "transposit/errors.hpp"

namespace transposit {

namespace {

const char* kFreeParticle = R"(model "free_particle"
coords x1 x2
lagrangian 0.5*(dx1^2 + dx2^2)
aux dx1
aux dx2
monitor energy = 0.5*(dx1^2 + dx2^2)
)";

const char* kCircleA = R"(model "holonomic_circle_a"
coords x y
lagrangian 0.5*(dx^2 + dy^2) - 0.5*(x^2 + y^2)
constraint 2*(x*dx + y*dy)
aux -y*dx + x*dy
monitor radius2 = x^2 + y^2
monitor energy = 0.5*(dx^2 + dy^2) + 0.5*(x^2 + y^2)
)";

const char* kCircleB = R"(model "holonomic_circle_b"
coords x y
lagrangian 0.5*(dx^2 + dy^2) - 0.5*(x^2 + y^2)
constraint 2*(x*dx + y*dy)
aux (y*dx - x*dy)/(x^2 + y^2)
monitor radius2 = x^2 + y^2
monitor energy = 0.5*(dx^2 + dy^2) + 0.5*(x^2 + y^2)
)";

const char* kSkate = R"(model "skate"
coords x y phi
param g = 9.8
param alpha = 0.52359877559829882
param omega = 1
lagrangian 0.5*(dx^2 + dy^2 + dphi^2) + g*sin(alpha)*x
constraint sin(phi)*dx - cos(phi)*dy
aux cos(phi)*dx + sin(phi)*dy
aux dphi
monitor energy = 0.5*(dx^2 + dy^2 + dphi^2) - g*sin(alpha)*x
)";

const char* kSkateVakonomic = R"(model "skate_vakonomic"
coords x y phi
param g = 9.8
param alpha = 0
param omega = 0
param lambda0 = 0
lagrangian 0.5*(dx^2 + dy^2 + dphi^2) + g*sin(alpha)*x
constraint sin(phi)*dx - cos(phi)*dy
aux cos(phi)*dx + sin(phi)*dy
aux dphi
)";

const char* kAppellHamelT1 = R"(model "appell_hamel_t1"
coords x y z
param a = 1
param g = 9.8
lagrangian 0.5*(dx^2 + dy^2 + dz^2) - g*z
constraint dz - a*sqrt(dx^2 + dy^2)
aux dy
aux dx
monitor energy = 0.5*(dx^2 + dy^2 + dz^2) + g*z
)";

const char* kAppellHamelT2 = R"(model "appell_hamel_t2"
coords x y z
param a = 1
param g = 9.8
lagrangian 0.5*(dx^2 + dy^2 + dz^2) - g*z
constraint dz - a*sqrt(dx^2 + dy^2)
aux atan(dx/dy)
aux dx
monitor energy = 0.5*(dx^2 + dy^2 + dz^2) + g*z
)";

const char* kGantmacher = R"(model "gantmacher"
coords x1 x2 x3 x4
param g = 9.8
lagrangian 0.5*(dx1^2 + dx2^2 + dx3^2 + dx4^2) - g*x3
constraint x1*dx1 + x2*dx2
constraint x1*dx3 - x2*dx4
aux -x1*dx2 + x2*dx1
aux x2*dx3 + x1*dx4
monitor energy = 0.5*(dx1^2 + dx2^2 + dx3^2 + dx4^2) + g*x3
monitor rod = x1^2 + x2^2
)";

const char* kRollingDrum = R"(model "rolling_drum"
coords x1 x2 x3 y1 y2
param m = 1
param m1 = 0
param J = 0.5
param C = 0
param a = 0.1
param b = 1
param rho = 0.1
param g = 9.8
lagrangian 0.5*(m + m1)*(dx1^2 + dx2^2) + 0.5*C*dx3^2 + 0.5*J*dy1^2 + 0.5*m*dy2^2 + m1*rho*dy1*(sin(y1)*dx1 - cos(y1)*dx2) - m*g/b*y2
constraint dx1 - a/b*dy2*cos(y1) - rho*dy1*sin(y1)
constraint dx2 - a/b*dy2*sin(y1) + rho*dy1*cos(y1)
constraint dx3 - dy2/b
aux dy1
aux dy2
monitor C2 = dy1*exp(-a*rho*(m + 2*m1)*y2/(b*((m + 3*m1)*rho^2 + J)))
monitor h = ((m + m1)*a^2 + C + m*b^2)/2*dy2^2 + b^2*((m + 3*m1)*rho^2 + J)/2*dy1^2 + m*g*b*y2
)";

DynState zeros(const MechModel& model) { return make_state(model); }

BuiltinModel build(const std::string& name) {
    BuiltinModel b;
    using F = Formulation;
    if (name == "free_particle") {
        b.source = kFreeParticle;
        b.recommended = {F::DAlembert, F::MvmT1, F::MvmT2, F::Vakonomic};
        b.notes = "unconstrained particle; aux = velocities gives A = 0";
        b.reference = [](const MechModel& m) {
            DynState s = zeros(m);
            s.v << 1.0, 2.0;
            return s;
        };
    } else if (name == "holonomic_circle_a" || name == "holonomic_circle_b") {
        b.source = name == "holonomic_circle_a" ? kCircleA : kCircleB;
        b.recommended = {F::DAlembert, F::MvmT1, F::MvmT2, F::Vakonomic};
        b.notes = name == "holonomic_circle_a" ? "differentiated circle constraint, aux -y dx + x dy"
                                               : "differentiated circle constraint, aux with zero Omega";
        b.reference = [](const MechModel& m) {
            DynState s = zeros(m);
            s.x << 1.0, 0.0;
            s.v << 0.0, 1.0;
            return s;
        };
    } else if (name == "skate") {
        b.source = kSkate;
        b.recommended = {F::MvmT1, F::DAlembert, F::MvmT2};
        b.oracles = {"cycloid", "circle", "straight_line"};
        b.notes = "knife edge on an inclined plane; omega is the initial spin rate";
        b.reference = [](const MechModel& m) {
            DynState s = zeros(m);
            s.v(2) = m.param("omega", 1.0);
            return s;
        };
    } else if (name == "skate_vakonomic") {
        b.source = kSkateVakonomic;
        b.recommended = {F::Vakonomic};
        b.oracles = {"invariants"};
        b.notes = "horizontal skate for vakonomic runs; lambda0 is the initial multiplier";
        b.reference = [](const MechModel& m) {
            DynState s = zeros(m);
            s.v(0) = 1.0;
            s.v(2) = m.param("omega", 0.0);
            s.lambda = Vec::Constant(1, m.param("lambda0", 0.0));
            return s;
        };
    } else if (name == "appell_hamel_t1" || name == "appell_hamel_t2") {
        const bool t1 = name == "appell_hamel_t1";
        b.source = t1 ? kAppellHamelT1 : kAppellHamelT2;
        b.recommended = t1 ? std::vector<F>{F::MvmT1, F::DAlembert, F::VoronetsReduced}
                           : std::vector<F>{F::MvmT2, F::DAlembert};
        b.oracles = {"constants"};
        b.notes = t1 ? "nonlinear constraint, aux (dy, dx)" : "nonlinear constraint, aux atan(dx/dy) then L0";
        b.reference = [t1](const MechModel& m) {
            DynState s = zeros(m);
            const double a = m.param("a", 1.0);
            if (t1) {
                s.v << 1.0, 0.0, a;
            } else {
                s.v << 0.6, 0.8, a;
            }
            return s;
        };
    } else if (name == "gantmacher") {
        b.source = kGantmacher;
        b.recommended = {F::MvmT1, F::DAlembert, F::MvmT2};
        b.oracles = {"multipliers"};
        b.notes = "two-particle rod with nonintegrable constraints";
        b.reference = [](const MechModel& m) {
            DynState s = zeros(m);
            s.x << 0.8, 0.6, 0.1, -0.2;
            s.v << -0.6, 0.8, 0.3, 0.4;
            return s;
        };
    } else if (name == "rolling_drum") {
        b.source = kRollingDrum;
        b.recommended = {F::ChaplyginReduced, F::DAlembert, F::MvmT2};
        b.oracles = {"integrals", "reduced_accel"};
        b.notes = "wheel-and-drum with a hanging weight; Chaplygin form (x1 x2 x3 | y1 y2)";
        b.reference = [](const MechModel& m) {
            DynState s = zeros(m);
            const double a = m.param("a", 0.1), bb = m.param("b", 1.0), rho = m.param("rho", 0.1);
            s.x(3) = 0.3;
            s.v(3) = 1.0;
            s.v(4) = 0.5;
            const double c = std::cos(s.x(3)), sn = std::sin(s.x(3));
            s.v(0) = a / bb * s.v(4) * c + rho * s.v(3) * sn;
            s.v(1) = a / bb * s.v(4) * sn - rho * s.v(3) * c;
            s.v(2) = s.v(4) / bb;
            return s;
        };
    } else {
        throw Error(ErrorKind::UnknownModel, "'" + name + "'");
    }
    b.spec = parse_model_file(b.source);
    return b;
}

double get(const OracleValues& setup, const ModelSpec& spec, const std::string& key, double fallback = 0.0) {
    auto it = setup.find(key);
    if (it != setup.end()) return it->second;
    if (auto p = spec.param(key)) return *p;
    return fallback;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{
        "free_particle",   "holonomic_circle_a", "holonomic_circle_b", "skate",       "skate_vakonomic",
        "appell_hamel_t1", "appell_hamel_t2",    "gantmacher",         "rolling_drum"};
    return names;
}

bool is_builtin(const std::string& name) {
    for (const auto& n : builtin_names())
        if (n == name) return true;
    return false;
}

BuiltinModel get_builtin(const std::string& name) { return build(name); }

OracleValues oracle_eval(const std::string& model_name, const std::string& oracle_name, double t,
                         const OracleValues& setup) {
    const ModelSpec spec = get_builtin(model_name).spec;
    auto P = [&](const std::string& key, double fallback = 0.0) { return get(setup, spec, key, fallback); };
    OracleValues out;

    if (model_name == "skate" && oracle_name == "cycloid") {
        // ẍ + ωẏ = k cos²ωt, ÿ − ωẋ = k sinωt cosωt, zero initial data, k = g sinα.
        const double k = P("g") * std::sin(P("alpha")), w = P("omega");
        const double th = 2.0 * w * t;
        out["x"] = k / (4 * w * w) * (1 - std::cos(th));
        out["y"] = k * t / (2 * w) - k / (4 * w * w) * std::sin(th);
        out["phi"] = w * t;
        out["dx"] = k / (2 * w) * std::sin(th);
        out["dy"] = k / (2 * w) * (1 - std::cos(th));
        out["dphi"] = w;
        return out;
    }
    if (model_name == "skate" && oracle_name == "circle") {
        const double w = P("omega"), x0 = P("x0"), y0 = P("y0"), dx0 = P("dx0"), dy0 = P("dy0"), phi0 = P("phi0");
        const double speed = dx0 * std::cos(phi0) + dy0 * std::sin(phi0);
        const double cx = x0 - dy0 / w, cy = y0 + dx0 / w;
        const double th = phi0 + w * t;
        out["cx"] = cx;
        out["cy"] = cy;
        out["radius"] = std::abs(speed / w);
        out["x"] = cx + speed / w * std::sin(th);
        out["y"] = cy - speed / w * std::cos(th);
        out["phi"] = th;
        return out;
    }
    if (model_name == "skate" && oracle_name == "straight_line") {
        const double k = P("g") * std::sin(P("alpha")), phi0 = P("phi0");
        const double c = std::cos(phi0), s = std::sin(phi0);
        const double x0 = P("x0"), y0 = P("y0"), dx0 = P("dx0"), dy0 = P("dy0");
        const double Y0 = c * x0 + s * y0, dY0 = c * dx0 + s * dy0, X0 = s * x0 - c * y0;
        const double Y = k * c * t * t / 2 + dY0 * t + Y0;
        out["Y"] = Y;
        out["X"] = X0;
        out["x"] = c * Y + s * X0;
        out["y"] = s * Y - c * X0;
        out["phi"] = phi0;
        return out;
    }
    if (model_name == "skate_vakonomic" && oracle_name == "invariants") {
        const double l0 = P("lambda0"), phi0 = P("phi0");
        const double a = P("dx0") - l0 * std::sin(phi0), b = P("dy0") + l0 * std::cos(phi0);
        const double phi = P("phi");
        const double u = a * std::cos(phi) + b * std::sin(phi);
        out["a"] = a;
        out["b"] = b;
        out["dx"] = std::cos(phi) * u;
        out["dy"] = std::sin(phi) * u;
        out["lambda"] = b * std::cos(phi) - a * std::sin(phi);
        return out;
    }
    if ((model_name == "appell_hamel_t1" || model_name == "appell_hamel_t2") && oracle_name == "constants") {
        const double a = P("a"), g = P("g");
        out["rate"] = g / (1 + a * a);
        out["ddz"] = -a * a * g / (1 + a * a);
        out["detG"] = 1 + a * a;
        return out;
    }
    if (model_name == "gantmacher" && oracle_name == "multipliers") {
        const double x1 = P("x1"), x2 = P("x2"), v1 = P("dx1"), v2 = P("dx2"), v3 = P("dx3"), v4 = P("dx4");
        const double r2 = x1 * x1 + x2 * x2;
        out["mu1"] = -(v1 * v1 + v2 * v2) / r2;
        out["mu2"] = (v2 * v4 - v1 * v3 + P("g") * x1) / r2;
        out["detW"] = r2 * r2;
        return out;
    }
    if (model_name == "rolling_drum" && (oracle_name == "integrals" || oracle_name == "reduced_accel")) {
        const double m = P("m"), m1 = P("m1"), J = P("J"), C = P("C"), a = P("a"), b = P("b"), rho = P("rho"),
                     g = P("g");
        const double y2 = P("y2"), dy1 = P("dy1"), dy2 = P("dy2");
        const double M1 = (m + 3 * m1) * rho * rho + J;
        const double M2 = (m + m1) * a * a + C + m * b * b;
        if (oracle_name == "integrals") {
            out["C2"] = dy1 * std::exp(-a * rho * (m + 2 * m1) * y2 / (b * M1));
            out["h"] = M2 / 2 * dy2 * dy2 + b * b * M1 / 2 * dy1 * dy1 + m * g * b * y2;
        } else {
            out["ddy1"] = a * rho * (m + 2 * m1) / (b * M1) * dy1 * dy2;
            out["ddy2"] = -(a * b * rho * (m + 2 * m1) * dy1 * dy1 + m * g * b) / M2;
        }
        return out;
    }
    throw Error(ErrorKind::UnknownOracle, "'" + oracle_name + "' for model '" + model_name + "'");
}

}  // namespace transposit
