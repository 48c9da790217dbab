#include "transposit/model.hpp"

#include "transposit/errors.hpp"

namespace transposit {

MechModel::MechModel(ModelSpec spec, const ParamValues& overrides) : spec_(std::move(spec)) {
    for (const auto& kv : spec_.params) params_.push_back(kv);
    for (const auto& [k, v] : overrides) {
        bool found = false;
        for (auto& kv : params_)
            if (kv.first == k) {
                kv.second = v;
                found = true;
            }
        if (!found) throw Error(ErrorKind::InvalidArgument, "model '" + spec_.name + "' has no parameter '" + k + "'");
    }
    const auto& coords = spec_.coords;
    lagrangian_ = CompiledExpr(spec_.lagrangian, coords, params_);
    for (const auto& c : spec_.constraints) constraints_.emplace_back(c, coords, params_);
    for (const auto& a : spec_.aux) aux_.emplace_back(a, coords, params_);
    for (const auto& mon : spec_.monitors) monitors_.emplace_back(mon.expr, coords, params_);
}

double MechModel::param(const std::string& key, double fallback) const {
    for (const auto& [k, v] : params_)
        if (k == key) return v;
    return fallback;
}

Vec MechModel::constraint_values(const DynState& s) const {
    Vec r(m());
    for (int a = 0; a < m(); ++a) r(a) = constraints_[a].eval(s);
    return r;
}

ModelSpec MechModel::bound_spec() const {
    ModelSpec s = spec_;
    s.params = params_;
    return s;
}

int MechModel::slot_of(const std::string& name) const {
    for (int i = 0; i < n(); ++i) {
        if (name == spec_.coords[i]) return i;
        if (name == "d" + spec_.coords[i]) return n() + i;
    }
    return -1;
}

DynState make_state(const MechModel& model, double t) {
    DynState s;
    s.t = t;
    s.x = Vec::Zero(model.n());
    s.v = Vec::Zero(model.n());
    return s;
}

}  // namespace transposit
