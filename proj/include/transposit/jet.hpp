#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "transposit/expr.hpp"
#include "transposit/state.hpp"

namespace transposit {

inline constexpr int kMaxJetDim = 1 + 2 * static_cast<int>(kMaxCoords);

using JetVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxJetDim, 1>;
using JetMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxJetDim, kMaxJetDim>;

/// Value, gradient and Hessian over the inputs (t, x_1..x_N, v_1..v_N).
struct Jet2 {
    double value = 0.0;
    JetVec grad;
    JetMat hess;

    static Jet2 constant(double value, int dim);
    static Jet2 variable(double value, int dim, int index);

    int dim() const { return static_cast<int>(grad.size()); }
    double d_t() const { return grad(0); }
    double d_x(int k) const { return grad(1 + k); }
    double d_v(int k) const { return grad(1 + dim() / 2 + k); }
};

using ParamValues = std::vector<std::pair<std::string, double>>;

/// Expression lowered to a postfix program with parameters folded to constants.
class CompiledExpr {
public:
    CompiledExpr() = default;
    CompiledExpr(const Expr& e, const std::vector<std::string>& coords, const ParamValues& params);

    const Expr& source() const { return source_; }
    int n() const { return n_; }

    /// Plain evaluation at the packed point (t, x, v).
    template <class T>
    T eval(const T* point) const;

    double eval(const DynState& s) const;
    Jet2 eval_jet2(const DynState& s) const;

private:
    enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, PowInt, Pow, Call };
    struct Instr {
        Op op;
        int index = 0;
        double value = 0.0;
        Func func = Func::Sin;
        const ExprNode* node = nullptr;
    };

    void lower(const Expr& e, const std::vector<std::string>& coords, const ParamValues& params);

    Expr source_;
    int n_ = 0;
    std::vector<Instr> code_;
};

/// Convenience: jet of an AST at a state with explicit parameter values.
Jet2 eval_jet2(const Expr& e, const std::vector<std::string>& coords, const ParamValues& params,
               const DynState& s);

extern template double CompiledExpr::eval<double>(const double*) const;
extern template long double CompiledExpr::eval<long double>(const long double*) const;

}  // namespace transposit
