#include "transposit/generators.hpp"

#include "transposit/errors.hpp"
#include "transposit/integrate.hpp"

namespace transposit {

namespace {

std::vector<std::string> variable_names(const Scope& scope) {
    std::vector<std::string> names{"t"};
    for (const auto& c : scope.coords) {
        names.push_back(c);
        names.push_back("d" + c);
    }
    return names;
}

template <class T>
const T& pick(Rng& rng, const std::vector<T>& items) {
    std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
    return items[d(rng)];
}

double random_constant(Rng& rng) {
    std::uniform_int_distribution<int> kind(0, 3);
    switch (kind(rng)) {
        case 0: return std::uniform_int_distribution<int>(0, 9)(rng);
        case 1: return std::uniform_int_distribution<int>(0, 999)(rng) / 100.0;
        case 2: return std::uniform_real_distribution<double>(0.0, 10.0)(rng);
        default: return std::ldexp(std::uniform_real_distribution<double>(0.5, 1.0)(rng),
                                   std::uniform_int_distribution<int>(-30, 30)(rng));
    }
}

}  // namespace

Expr random_expr(Rng& rng, int depth, const Scope& scope) {
    const auto vars = variable_names(scope);
    std::uniform_int_distribution<int> leaf_kind(0, scope.params.empty() ? 1 : 2);
    if (depth <= 0 || std::uniform_int_distribution<int>(0, 4)(rng) == 0) {
        switch (leaf_kind(rng)) {
            case 0: return make_constant(random_constant(rng));
            case 1: return make_variable(pick(rng, vars));
            default: return make_parameter(pick(rng, scope.params));
        }
    }
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0: return make_unary('-', random_expr(rng, depth - 1, scope));
        case 1: {
            static const std::vector<char> ops{'+', '-', '*', '/', '^'};
            return make_binary(pick(rng, ops), random_expr(rng, depth - 1, scope), random_expr(rng, depth - 1, scope));
        }
        default: {
            static const std::vector<Func> fs{Func::Sin, Func::Cos, Func::Tan,  Func::Atan, Func::Atan2,
                                              Func::Sqrt, Func::Exp, Func::Ln, Func::Abs,  Func::Pow};
            Func f = pick(rng, fs);
            std::vector<Expr> args;
            for (int i = 0; i < func_arity(f); ++i) args.push_back(random_expr(rng, depth - 1, scope));
            return make_call(f, std::move(args));
        }
    }
}

Expr random_smooth_expr(Rng& rng, int depth, const Scope& scope) {
    const auto vars = variable_names(scope);
    if (depth <= 0 || std::uniform_int_distribution<int>(0, 5)(rng) == 0) {
        if (std::uniform_int_distribution<int>(0, 2)(rng) == 0)
            return make_constant(std::uniform_int_distribution<int>(1, 30)(rng) / 10.0);
        return make_variable(pick(rng, vars));
    }
    auto sub = [&] { return random_smooth_expr(rng, depth - 1, scope); };
    auto squash = [](Expr e) { return make_call(Func::Sin, {std::move(e)}); };  // bounded in [-1, 1]
    switch (std::uniform_int_distribution<int>(0, 11)(rng)) {
        case 0: return make_binary('+', sub(), sub());
        case 1: return make_binary('-', sub(), sub());
        case 2: return make_binary('*', sub(), sub());
        case 3:  // u / (2 + sin v)
            return make_binary('/', sub(), make_binary('+', make_constant(2.0), squash(sub())));
        case 4: return make_binary('^', sub(), make_constant(std::uniform_int_distribution<int>(0, 4)(rng)));
        case 5: return make_unary('-', sub());
        case 6: return make_call(Func::Sin, {sub()});
        case 7: return make_call(Func::Cos, {sub()});
        case 8: return make_call(Func::Atan, {sub()});
        case 9: return make_call(Func::Exp, {squash(sub())});
        case 10:  // sqrt(1.5 + sin u)
            return make_call(Func::Sqrt, {make_binary('+', make_constant(1.5), squash(sub()))});
        default:  // ln(2 + sin u)
            return make_call(Func::Ln, {make_binary('+', make_constant(2.0), squash(sub()))});
    }
}

bool random_state(const MechModel& model, Rng& rng, DynState& out) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DynState s = make_state(model, u(rng));
    for (int i = 0; i < model.n(); ++i) s.x(i) = u(rng);
    for (int i = 0; i < model.n(); ++i) s.v(i) = u(rng);
    try {
        s = project_velocities(model, s, 1e-13, 8);
        if (!s.v.allFinite()) return false;
    } catch (const Error&) {
        return false;
    }
    out = std::move(s);
    return true;
}

std::vector<DynState> random_states(const MechModel& model, Rng& rng, int count, int max_draws) {
    std::vector<DynState> out;
    for (int d = 0; d < max_draws && static_cast<int>(out.size()) < count; ++d) {
        DynState s;
        if (random_state(model, rng, s)) out.push_back(std::move(s));
    }
    return out;
}

}  // namespace transposit
