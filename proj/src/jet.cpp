#include "transposit/jet.hpp"

#include <cmath>

#include "transposit/errors.hpp"

namespace transposit {

namespace {

constexpr double kSqrtKink = 1e-18;  // sqrt argument below which derivatives blow up
constexpr int kMaxIntPower = 64;

Jet2 zero_jet(int dim) {
    Jet2 j;
    j.value = 0.0;
    j.grad = JetVec::Zero(dim);
    j.hess = JetMat::Zero(dim, dim);
    return j;
}

// f(u) with f' = d1, f'' = d2 at u.
Jet2 chain(const Jet2& u, double f, double d1, double d2) {
    Jet2 r;
    r.value = f;
    r.grad = d1 * u.grad;
    r.hess = d1 * u.hess;
    if (d2 != 0.0) {
        const JetMat outer = u.grad * u.grad.transpose();
        r.hess += d2 * outer;
    }
    return r;
}

Jet2 mul(const Jet2& a, const Jet2& b) {
    Jet2 r;
    r.value = a.value * b.value;
    r.grad = a.value * b.grad + b.value * a.grad;
    r.hess = a.value * b.hess + b.value * a.hess;
    const JetMat cross = a.grad * b.grad.transpose();
    r.hess += cross + cross.transpose();
    return r;
}

Jet2 recip(const Jet2& u) {
    const double inv = 1.0 / u.value;
    return chain(u, inv, -inv * inv, 2.0 * inv * inv * inv);
}

bool is_small_integer(const ExprNode& e, int& n) {
    if (e.kind != NodeKind::Constant) return false;
    double v = e.value;
    if (v != std::floor(v) || std::fabs(v) > kMaxIntPower) return false;
    n = static_cast<int>(v);
    return true;
}

template <class T>
T int_power(T base, int n) {
    if (n == 0) return T(1);
    T r = base;
    for (int k = 1; k < (n < 0 ? -n : n); ++k) r = r * base;
    return n < 0 ? T(1) / r : r;
}

Jet2 int_power(const Jet2& base, int n) {
    if (n == 0) return Jet2::constant(1.0, base.dim());
    Jet2 r = base;
    for (int k = 1; k < (n < 0 ? -n : n); ++k) r = mul(r, base);
    return n < 0 ? recip(r) : r;
}

}  // namespace

Jet2 Jet2::constant(double value, int dim) {
    Jet2 j = zero_jet(dim);
    j.value = value;
    return j;
}

Jet2 Jet2::variable(double value, int dim, int index) {
    Jet2 j = zero_jet(dim);
    j.value = value;
    j.grad(index) = 1.0;
    return j;
}

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& coords, const ParamValues& params)
    : source_(e), n_(static_cast<int>(coords.size())) {
    lower(e, coords, params);
}

void CompiledExpr::lower(const Expr& e, const std::vector<std::string>& coords, const ParamValues& params) {
    const ExprNode* node = e.get();
    switch (e->kind) {
        case NodeKind::Constant: code_.push_back({Op::Const, 0, e->value, Func::Sin, node}); return;
        case NodeKind::Parameter:
            for (const auto& [k, v] : params)
                if (k == e->name) {
                    code_.push_back({Op::Const, 0, v, Func::Sin, node});
                    return;
                }
            throw Error(ErrorKind::InvalidModel, "unbound parameter '" + e->name + "'");
        case NodeKind::Variable: {
            if (e->name == "t") {
                code_.push_back({Op::Var, 0, 0.0, Func::Sin, node});
                return;
            }
            for (int i = 0; i < n_; ++i) {
                if (e->name == coords[i]) {
                    code_.push_back({Op::Var, 1 + i, 0.0, Func::Sin, node});
                    return;
                }
                if (e->name == "d" + coords[i]) {
                    code_.push_back({Op::Var, 1 + n_ + i, 0.0, Func::Sin, node});
                    return;
                }
            }
            throw Error(ErrorKind::UnknownIdentifier, "'" + e->name + "'");
        }
        case NodeKind::Unary:
            lower(e->children[0], coords, params);
            code_.push_back({Op::Neg, 0, 0.0, Func::Sin, node});
            return;
        case NodeKind::Binary:
        case NodeKind::Call: {
            const bool is_pow = (e->kind == NodeKind::Binary && e->op == '^') ||
                                (e->kind == NodeKind::Call && e->func == Func::Pow);
            int n = 0;
            if (is_pow && is_small_integer(*e->children[1], n)) {
                lower(e->children[0], coords, params);
                code_.push_back({Op::PowInt, n, 0.0, Func::Pow, node});
                return;
            }
            for (const auto& c : e->children) lower(c, coords, params);
            if (is_pow) {
                code_.push_back({Op::Pow, 0, 0.0, Func::Pow, node});
                return;
            }
            if (e->kind == NodeKind::Call) {
                code_.push_back({Op::Call, 0, 0.0, e->func, node});
                return;
            }
            Op op = Op::Add;
            switch (e->op) {
                case '+': op = Op::Add; break;
                case '-': op = Op::Sub; break;
                case '*': op = Op::Mul; break;
                case '/': op = Op::Div; break;
            }
            code_.push_back({op, 0, 0.0, Func::Sin, node});
            return;
        }
    }
}

template <class T>
T CompiledExpr::eval(const T* point) const {
    using std::abs, std::atan, std::atan2, std::cos, std::exp, std::log, std::pow, std::sin, std::sqrt, std::tan;
    std::vector<T> st;
    st.reserve(code_.size());
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::Const: st.push_back(T(in.value)); break;
            case Op::Var: st.push_back(point[in.index]); break;
            case Op::Neg: st.back() = -st.back(); break;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div:
            case Op::Pow: {
                T b = st.back();
                st.pop_back();
                T& a = st.back();
                if (in.op == Op::Add) a = a + b;
                else if (in.op == Op::Sub) a = a - b;
                else if (in.op == Op::Mul) a = a * b;
                else if (in.op == Op::Div) {
                    if (b == T(0)) throw DomainError("division by zero", pretty_print(*in.node));
                    a = a / b;
                } else {
                    if (a <= T(0)) throw DomainError("pow of non-positive base", pretty_print(*in.node));
                    a = exp(b * log(a));
                }
                break;
            }
            case Op::PowInt: {
                if (in.index < 0 && st.back() == T(0))
                    throw DomainError("division by zero", pretty_print(*in.node));
                st.back() = int_power(st.back(), in.index);
                break;
            }
            case Op::Call: {
                if (in.func == Func::Atan2) {
                    T x = st.back();
                    st.pop_back();
                    T& y = st.back();
                    if (x == T(0) && y == T(0)) throw DomainError("atan2 at origin", pretty_print(*in.node));
                    y = atan2(y, x);
                    break;
                }
                T& u = st.back();
                switch (in.func) {
                    case Func::Sin: u = sin(u); break;
                    case Func::Cos: u = cos(u); break;
                    case Func::Tan: u = tan(u); break;
                    case Func::Atan: u = atan(u); break;
                    case Func::Sqrt:
                        if (u < T(0)) throw DomainError("sqrt of negative", pretty_print(*in.node));
                        u = sqrt(u);
                        break;
                    case Func::Exp: u = exp(u); break;
                    case Func::Ln:
                        if (u <= T(0)) throw DomainError("ln of non-positive", pretty_print(*in.node));
                        u = log(u);
                        break;
                    case Func::Abs: u = abs(u); break;
                    default: break;
                }
                break;
            }
        }
        using std::isfinite;
        if (!isfinite(st.back())) throw DomainError("non-finite value", pretty_print(*in.node));
    }
    return st.back();
}

template double CompiledExpr::eval<double>(const double*) const;
template long double CompiledExpr::eval<long double>(const long double*) const;

double CompiledExpr::eval(const DynState& s) const {
    double point[kMaxJetDim];
    point[0] = s.t;
    for (int i = 0; i < n_; ++i) {
        point[1 + i] = s.x(i);
        point[1 + n_ + i] = s.v(i);
    }
    return eval<double>(point);
}

Jet2 CompiledExpr::eval_jet2(const DynState& s) const {
    const int dim = 1 + 2 * n_;
    std::vector<Jet2> st;
    st.reserve(8);
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::Const: st.push_back(Jet2::constant(in.value, dim)); break;
            case Op::Var: {
                double v = in.index == 0 ? s.t : in.index <= n_ ? s.x(in.index - 1) : s.v(in.index - 1 - n_);
                st.push_back(Jet2::variable(v, dim, in.index));
                break;
            }
            case Op::Neg:
                st.back().value = -st.back().value;
                st.back().grad = -st.back().grad;
                st.back().hess = -st.back().hess;
                break;
            case Op::Add:
            case Op::Sub: {
                Jet2 b = std::move(st.back());
                st.pop_back();
                Jet2& a = st.back();
                if (in.op == Op::Add) {
                    a.value += b.value;
                    a.grad += b.grad;
                    a.hess += b.hess;
                } else {
                    a.value -= b.value;
                    a.grad -= b.grad;
                    a.hess -= b.hess;
                }
                break;
            }
            case Op::Mul:
            case Op::Div:
            case Op::Pow: {
                Jet2 b = std::move(st.back());
                st.pop_back();
                Jet2& a = st.back();
                if (in.op == Op::Mul) {
                    a = mul(a, b);
                } else if (in.op == Op::Div) {
                    if (b.value == 0.0) throw DomainError("division by zero", pretty_print(*in.node));
                    a = mul(a, recip(b));
                } else {
                    if (a.value <= 0.0) throw DomainError("pow of non-positive base", pretty_print(*in.node));
                    Jet2 la = chain(a, std::log(a.value), 1.0 / a.value, -1.0 / (a.value * a.value));
                    Jet2 e = mul(b, la);
                    const double ev = std::exp(e.value);
                    a = chain(e, ev, ev, ev);
                }
                break;
            }
            case Op::PowInt:
                if (in.index < 0 && st.back().value == 0.0)
                    throw DomainError("division by zero", pretty_print(*in.node));
                st.back() = int_power(st.back(), in.index);
                break;
            case Op::Call: {
                if (in.func == Func::Atan2) {
                    Jet2 x = std::move(st.back());
                    st.pop_back();
                    Jet2& y = st.back();
                    const double r2 = x.value * x.value + y.value * y.value;
                    if (r2 == 0.0) throw DomainError("atan2 at origin", pretty_print(*in.node));
                    const double fy = x.value / r2, fx = -y.value / r2;
                    const double fyy = -2.0 * x.value * y.value / (r2 * r2);
                    const double fxy = (y.value * y.value - x.value * x.value) / (r2 * r2);
                    Jet2 r;
                    r.value = std::atan2(y.value, x.value);
                    r.grad = fy * y.grad + fx * x.grad;
                    r.hess = fy * y.hess + fx * x.hess;
                    const JetMat yy = y.grad * y.grad.transpose();
                    const JetMat xx = x.grad * x.grad.transpose();
                    r.hess += fyy * (yy - xx);
                    const JetMat cross = x.grad * y.grad.transpose();
                    r.hess += fxy * (cross + cross.transpose());
                    y = std::move(r);
                    break;
                }
                Jet2& u = st.back();
                const double a = u.value;
                switch (in.func) {
                    case Func::Sin: u = chain(u, std::sin(a), std::cos(a), -std::sin(a)); break;
                    case Func::Cos: u = chain(u, std::cos(a), -std::sin(a), -std::cos(a)); break;
                    case Func::Tan: {
                        const double t = std::tan(a);
                        u = chain(u, t, 1.0 + t * t, 2.0 * t * (1.0 + t * t));
                        break;
                    }
                    case Func::Atan: {
                        const double q = 1.0 / (1.0 + a * a);
                        u = chain(u, std::atan(a), q, -2.0 * a * q * q);
                        break;
                    }
                    case Func::Sqrt: {
                        if (a < 0.0) throw DomainError("sqrt of negative", pretty_print(*in.node));
                        if (a <= kSqrtKink) throw DomainError("sqrt at kink", pretty_print(*in.node));
                        const double r = std::sqrt(a);
                        u = chain(u, r, 0.5 / r, -0.25 / (r * a));
                        break;
                    }
                    case Func::Exp: {
                        const double e = std::exp(a);
                        u = chain(u, e, e, e);
                        break;
                    }
                    case Func::Ln:
                        if (a <= 0.0) throw DomainError("ln of non-positive", pretty_print(*in.node));
                        u = chain(u, std::log(a), 1.0 / a, -1.0 / (a * a));
                        break;
                    case Func::Abs: {
                        const double sg = a > 0.0 ? 1.0 : a < 0.0 ? -1.0 : 0.0;
                        u = chain(u, std::fabs(a), sg, 0.0);
                        break;
                    }
                    default: break;
                }
                break;
            }
        }
        const Jet2& top = st.back();
        if (!std::isfinite(top.value) || !top.grad.allFinite() || !top.hess.allFinite())
            throw DomainError("non-finite value", pretty_print(*in.node));
    }
    return std::move(st.back());
}

Jet2 eval_jet2(const Expr& e, const std::vector<std::string>& coords, const ParamValues& params,
               const DynState& s) {
    return CompiledExpr(e, coords, params).eval_jet2(s);
}

}  // namespace transposit
