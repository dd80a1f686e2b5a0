#pragma once

// Real homotopies whose Jacobians and second partials come from
// forward-mode dual numbers. Derived classes provide
//
//   int dimension() const;
//   template <class T> void residual(const T* x, const T& t, T* out) const;

#include <vector>

#include "eqcont/dual.hpp"
#include "eqcont/model.hpp"
#include "eqcont/tracker.hpp"

namespace eqcont {

class SecondOrderHomotopy : public RealHomotopy {
public:
    // hxx[j](k, l) = ∂²H_j/∂x_k∂x_l, hxt(j, k) = ∂²H_j/∂x_k∂t, htt[j] = ∂²H_j/∂t².
    virtual void second_partials(const Vec& x, double t, std::vector<Mat>& hxx, Mat& hxt, Vec& htt) const = 0;
};

template <class Derived>
class AdHomotopy : public SecondOrderHomotopy {
public:
    Vec eval(const Vec& x, double t) const override
    {
        Vec f(dimension());
        self().template residual<double>(x.data(), t, f.data());
        return f;
    }

    Mat jac_x(const Vec& x, double t) const override
    {
        Mat jx;
        eval_all(x, t, nullptr, &jx, nullptr);
        return jx;
    }

    Vec jac_t(const Vec& x, double t) const override
    {
        Vec jt;
        eval_all(x, t, nullptr, nullptr, &jt);
        return jt;
    }

    void eval_all(const Vec& x, double t, Vec* f, Mat* jx, Vec* jt) const override
    {
        using D = Dual<double>;
        const int n = dimension();
        std::vector<D> xd(n), out(n);
        for (int k = 0; k < n; ++k) xd[k] = D(x[k]);
        if (f && !jx && !jt) {
            *f = eval(x, t);
            return;
        }
        if (jx) jx->resize(n, n);
        bool have_f = false;
        if (jx) {
            for (int k = 0; k < n; ++k) {
                xd[k].d = 1.0;
                self().template residual<D>(xd.data(), D(t), out.data());
                xd[k].d = 0.0;
                for (int j = 0; j < n; ++j) (*jx)(j, k) = out[j].d;
                if (f && !have_f) {
                    f->resize(n);
                    for (int j = 0; j < n; ++j) (*f)[j] = out[j].v;
                    have_f = true;
                }
            }
        }
        if (jt) {
            jt->resize(n);
            self().template residual<D>(xd.data(), D(t, 1.0), out.data());
            for (int j = 0; j < n; ++j) (*jt)[j] = out[j].d;
            if (f && !have_f) {
                f->resize(n);
                for (int j = 0; j < n; ++j) (*f)[j] = out[j].v;
                have_f = true;
            }
        }
        if (f && !have_f) *f = eval(x, t);
    }

    void second_partials(const Vec& x, double t, std::vector<Mat>& hxx, Mat& hxt, Vec& htt) const override
    {
        using D = Dual<double>;
        using DD = Dual<D>;
        const int n = dimension();
        hxx.assign(n, Mat::Zero(n, n));
        hxt = Mat::Zero(n, n);
        htt = Vec::Zero(n);
        std::vector<DD> xd(n), out(n);
        // Variable n stands for t.
        auto seed = [&](int a, int b) {
            for (int k = 0; k < n; ++k) xd[k] = DD(D(x[k]));
            DD td{D(t)};
            auto set = [&](int v, bool inner) {
                DD& target = v < n ? xd[v] : td;
                if (inner) target.v.d = 1.0;
                else target.d.v = 1.0;
            };
            set(a, true);
            set(b, false);
            self().template residual<DD>(xd.data(), td, out.data());
        };
        for (int a = 0; a <= n; ++a) {
            for (int b = a; b <= n; ++b) {
                seed(a, b);
                for (int j = 0; j < n; ++j) {
                    double v = out[j].d.d;
                    if (a < n && b < n) {
                        hxx[j](a, b) = v;
                        hxx[j](b, a) = v;
                    } else if (a < n && b == n) {
                        hxt(j, a) = v;
                    } else {
                        htt[j] = v;
                    }
                }
            }
        }
    }

private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }
};

}  // namespace eqcont
