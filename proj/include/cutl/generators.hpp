#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cutl/process.hpp"

// Built-in process families. Each declares an exact moment profile (or an
// exact value plus an explicit slack band when only envelopes are honest)
// and a regime tag; the classifier is expected to reproduce the tag from the
// profile alone, and the moment-consistency tests check sampled increments
// against the bands.

namespace cutl {

// Witness for the minorized-up-move property: a single step climbs with
// probability at least delta.
struct MoveWitness {
    int m;
    double delta;
};

namespace detail {

inline bool is_nonneg_integer(double x) {
    return std::isfinite(x) && x >= 0.0 && std::abs(x - std::round(x)) < 1e-9;
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Birth-death chain with Lamperti drift: from x >= x_floor steps +1 with
// probability p(x) = 1/2 + a/(4x) [+ c/(4 x log x)], -1 otherwise; below
// x_floor the up-step is forced so the chain stays on {0,1,2,...}.

class BdLamperti final : public ScalarProcess {
public:
    BdLamperti(double a, std::optional<double> c = std::nullopt,
               double x_floor = 2.0)
        : a_(a), c_(c), x_floor_(x_floor) {
        if (!(x_floor >= 2.0) || !detail::is_nonneg_integer(x_floor))
            throw std::invalid_argument("bd_lamperti: x_floor must be an integer >= 2");
        const double worst = std::abs(a) / (4.0 * x_floor) +
                             std::abs(c.value_or(0.0)) /
                                 (4.0 * x_floor * std::log(x_floor));
        // |p - 1/2| is bounded by `worst` on [x_floor, inf), so this keeps
        // p(x) inside [0, 1] everywhere at once.
        if (worst > 0.5)
            throw std::invalid_argument(
                "bd_lamperti: p(x) leaves [0,1] near x_floor; raise x_floor");
        build_profile();
    }

    double up_prob(double x) const {
        if (x < x_floor_) return 1.0;
        double p = 0.5 + a_ / (4.0 * x);
        if (c_) p += *c_ / (4.0 * x * std::log(x));
        return p;
    }

    std::string id() const override {
        std::string s = "bd_lamperti(a=" + detail::num(a_);
        if (c_) s += ",c=" + detail::num(*c_);
        return s + ",x_floor=" + detail::num(x_floor_) + ")";
    }
    const MomentProfile& profile() const override { return profile_; }
    bool in_state_set(double x) const override { return detail::is_nonneg_integer(x); }

    std::vector<Atom> support(double x) const override {
        if (!in_state_set(x)) throw std::invalid_argument(id() + ms_state);
        if (x < x_floor_) return {{x + 1.0, 1.0}};
        const double p = up_prob(x);
        return {{x + 1.0, p}, {x - 1.0, 1.0 - p}};
    }

    std::unique_ptr<ScalarStepper> make_stepper() const override {
        class S final : public ScalarStepper {
        public:
            explicit S(const BdLamperti& o) : o_(o) {}
            void reset(double x0) override { x_ = x0; }
            double position() const override { return x_; }
            double step(Rng& rng) override {
                x_ += rng.bernoulli(o_.up_prob(x_)) ? 1.0 : -1.0;
                return x_;
            }
        private:
            const BdLamperti& o_;
            double x_ = 0.0;
        };
        return std::make_unique<S>(*this);
    }

    MoveWitness move_witness() const {
        double lo = 0.5;
        if (a_ < 0.0 || c_.value_or(0.0) < 0.0)
            for (double x = x_floor_; x < x_floor_ + 4096.0; x += 1.0)
                lo = std::min(lo, up_prob(x));
        return {1, lo};
    }

    double a() const { return a_; }
    std::optional<double> c() const { return c_; }
    double x_floor() const { return x_floor_; }

private:
    void build_profile() {
        const double a = a_, xf = x_floor_;
        const std::optional<double> c = c_;
        // mu1 = 2p - 1 exactly; mu2 = 1 (unit steps).
        auto mu1 = [a, c, xf](double x) {
            if (x < xf) return 1.0;
            double v = a / (2.0 * x);
            if (c) v += *c / (2.0 * x * std::log(x));
            return v;
        };
        profile_.mu1_lower = mu1;
        profile_.mu1_upper = mu1;
        profile_.mu2_lower = [](double) { return 1.0; };
        profile_.mu2_upper = [](double) { return 1.0; };
        profile_.jump_bound = 1.0;
        const double ceff = c_.value_or(0.0);
        if (a > 1.0)
            profile_.regime_tag = Regime::transient_many_cutpoints;
        else if (a == 1.0 && ceff > 1.0)
            profile_.regime_tag = Regime::critical_window;
        else if (a < 1.0 || (a == 1.0 && ceff < 1.0))
            profile_.regime_tag = Regime::recurrent;
        else
            profile_.regime_tag = Regime::unclassified;
    }

    static constexpr const char* ms_state = ": state outside {0,1,2,...}";
    double a_;
    std::optional<double> c_;
    double x_floor_;
    MomentProfile profile_;
};

// ---------------------------------------------------------------------------
// Skip-down chain: +1 with probability p(x) = 2/3 + a/(6x), -2 otherwise;
// forced up below x_floor. mu1 = a/(2x), mu2 = 2 - a/(2x), jumps bounded by 2.

class PlusOneMinusTwo final : public ScalarProcess {
public:
    explicit PlusOneMinusTwo(double a, double x_floor = 2.0)
        : a_(a), x_floor_(x_floor) {
        if (!(x_floor >= 2.0) || !detail::is_nonneg_integer(x_floor))
            throw std::invalid_argument(
                "plus_one_minus_two: x_floor must be an integer >= 2");
        if (std::abs(a) / (6.0 * x_floor) > 1.0 / 3.0)
            throw std::invalid_argument(
                "plus_one_minus_two: p(x) leaves [0,1] near x_floor; raise x_floor");
        build_profile();
    }

    double up_prob(double x) const {
        if (x < x_floor_) return 1.0;
        return 2.0 / 3.0 + a_ / (6.0 * x);
    }

    std::string id() const override {
        return "plus_one_minus_two(a=" + detail::num(a_) +
               ",x_floor=" + detail::num(x_floor_) + ")";
    }
    const MomentProfile& profile() const override { return profile_; }
    bool in_state_set(double x) const override { return detail::is_nonneg_integer(x); }

    std::vector<Atom> support(double x) const override {
        if (!in_state_set(x))
            throw std::invalid_argument(id() + ": state outside {0,1,2,...}");
        if (x < x_floor_) return {{x + 1.0, 1.0}};
        const double p = up_prob(x);
        return {{x + 1.0, p}, {x - 2.0, 1.0 - p}};
    }

    std::unique_ptr<ScalarStepper> make_stepper() const override {
        class S final : public ScalarStepper {
        public:
            explicit S(const PlusOneMinusTwo& o) : o_(o) {}
            void reset(double x0) override { x_ = x0; }
            double position() const override { return x_; }
            double step(Rng& rng) override {
                x_ += rng.bernoulli(o_.up_prob(x_)) ? 1.0 : -2.0;
                return x_;
            }
        private:
            const PlusOneMinusTwo& o_;
            double x_ = 0.0;
        };
        return std::make_unique<S>(*this);
    }

    MoveWitness move_witness() const {
        double lo = 2.0 / 3.0;
        if (a_ < 0.0)
            for (double x = x_floor_; x < x_floor_ + 4096.0; x += 1.0)
                lo = std::min(lo, up_prob(x));
        return {1, lo};
    }

    double a() const { return a_; }
    double x_floor() const { return x_floor_; }

private:
    void build_profile() {
        const double a = a_, xf = x_floor_;
        auto mu1 = [a, xf](double x) {
            return x < xf ? 1.0 : a / (2.0 * x);
        };
        auto mu2 = [a, xf](double x) {
            return x < xf ? 1.0 : 2.0 - a / (2.0 * x);
        };
        profile_.mu1_lower = mu1;
        profile_.mu1_upper = mu1;
        profile_.mu2_lower = mu2;
        profile_.mu2_upper = mu2;
        profile_.jump_bound = 2.0;
        profile_.regime_tag = a > 2.0 ? Regime::transient_many_cutpoints
                                      : Regime::recurrent;
    }

    double a_;
    double x_floor_;
    MomentProfile profile_;
};

// ---------------------------------------------------------------------------
// X_{n+1} = X_n + 1: the degenerate sanity path. Drifts hard but fails the
// bounded x*mu1 condition, so it carries no regime certificate.

class DeterministicPlusOne final : public ScalarProcess {
public:
    DeterministicPlusOne() {
        profile_.mu1_lower = [](double) { return 1.0; };
        profile_.mu1_upper = [](double) { return 1.0; };
        profile_.mu2_lower = [](double) { return 1.0; };
        profile_.mu2_upper = [](double) { return 1.0; };
        profile_.jump_bound = 1.0;
        profile_.regime_tag = Regime::unclassified;
    }

    std::string id() const override { return "deterministic_plus_one"; }
    const MomentProfile& profile() const override { return profile_; }
    bool in_state_set(double x) const override {
        return std::isfinite(x) && x >= 0.0;
    }
    std::vector<Atom> support(double x) const override { return {{x + 1.0, 1.0}}; }

    std::unique_ptr<ScalarStepper> make_stepper() const override {
        class S final : public ScalarStepper {
        public:
            void reset(double x0) override { x_ = x0; }
            double position() const override { return x_; }
            double step(Rng&) override { return x_ += 1.0; }
        private:
            double x_ = 0.0;
        };
        return std::make_unique<S>();
    }

private:
    MomentProfile profile_;
};

// ---------------------------------------------------------------------------
// Norm of simple random walk on Z^d. The scalar position is ||U_n|| for a
// hidden lattice walk U_n; resets take an integer radius and place the walk
// at the axis representative (x, 0, ..., 0). The profile bands are
//   mu1 in (d-1)/(2dx) +- 2/x^2,   mu2 in 1/d +- 2/x   (clamped to [0,1]),
// which hold at every lattice point, not only on the axis.

namespace detail {

inline MomentProfile ssrw_radial_profile(std::size_t d) {
    MomentProfile p;
    const double dd = static_cast<double>(d);
    p.mu1_lower = [dd](double x) {
        const double xe = std::max(x, 1.0);
        return (dd - 1.0) / (2.0 * dd * xe) - 2.0 / (xe * xe);
    };
    p.mu1_upper = [dd](double x) {
        const double xe = std::max(x, 1.0);
        return (dd - 1.0) / (2.0 * dd * xe) + 2.0 / (xe * xe);
    };
    p.mu2_lower = [dd](double x) {
        const double xe = std::max(x, 1.0);
        return std::max(0.0, 1.0 / dd - 2.0 / xe);
    };
    p.mu2_upper = [dd](double x) {
        const double xe = std::max(x, 1.0);
        return std::min(1.0, 1.0 / dd + 2.0 / xe);
    };
    p.jump_bound = 1.0;
    p.regime_tag = d >= 3 ? Regime::transient_many_cutpoints : Regime::recurrent;
    return p;
}

} // namespace detail

class SsrwNorm final : public ScalarProcess {
public:
    explicit SsrwNorm(std::size_t d) : d_(d) {
        if (d < 1) throw std::invalid_argument("ssrw_norm: need d >= 1");
        profile_ = detail::ssrw_radial_profile(d);
    }

    std::string id() const override {
        return "ssrw_norm(d=" + std::to_string(d_) + ")";
    }
    const MomentProfile& profile() const override { return profile_; }
    bool in_state_set(double x) const override { return detail::is_nonneg_integer(x); }
    std::size_t dim() const { return d_; }

    // One-step law from the axis representative of an integer radius.
    std::vector<Atom> support(double x) const override {
        if (!in_state_set(x))
            throw std::invalid_argument(id() + ": resets need an integer radius");
        const double n = static_cast<double>(2 * d_);
        std::map<double, double> law;
        law[x + 1.0] += 1.0 / n;
        law[std::abs(x - 1.0)] += 1.0 / n;
        if (d_ > 1) law[std::sqrt(x * x + 1.0)] += (n - 2.0) / n;
        std::vector<Atom> out;
        for (const auto& [y, p] : law) out.push_back({y, p});
        return out;
    }

    std::unique_ptr<ScalarStepper> make_stepper() const override {
        class S final : public ScalarStepper {
        public:
            explicit S(std::size_t d) : u_(d, 0) {}
            void reset(double x0) override {
                if (!detail::is_nonneg_integer(x0))
                    throw std::invalid_argument(
                        "ssrw_norm: resets need an integer radius");
                std::fill(u_.begin(), u_.end(), std::int64_t{0});
                u_[0] = static_cast<std::int64_t>(std::llround(x0));
            }
            double position() const override { return std::sqrt(norm2()); }
            double step(Rng& rng) override {
                const std::uint64_t move = rng.below(2 * u_.size());
                u_[move / 2] += (move & 1) ? 1 : -1;
                return position();
            }
        private:
            double norm2() const {
                std::int64_t s = 0;
                for (std::int64_t v : u_) s += v * v;
                return static_cast<double>(s);
            }
            std::vector<std::int64_t> u_;
        };
        return std::make_unique<S>(d_);
    }

private:
    std::size_t d_;
    MomentProfile profile_;
};

// ---------------------------------------------------------------------------
// Radial/tangential walk in R^d: from x != 0, with probability 1/2 move
// +-rho along x-hat, otherwise +-sigma along a tangent direction drawn
// uniformly from a deterministic orthonormal basis of the tangent space;
// from the origin, jump to +-rho*e1. The norm alone is Markov: tangent
// steps land at sqrt(x^2 + sigma^2) no matter which direction fires, and
// EllipticRadial below samples that scalar law directly.
//
// Exact radial moments (x > 0):
//   mu1 = rho/4 + (|x-rho| - x)/4 + t(x)/2,   t(x) = sigma^2/(x + hypot(x,sigma))
//   mu2 = rho^2/4 + (|x-rho| - x)^2/4 + t(x)^2/2
// The declared profile widens these by B^2/(2x log x) on mu1 and B^2/log x
// on mu2: the walk itself is exact, but the profile is deliberately no
// sharper than the asymptotics the classifier is entitled to use, so the
// balanced case rho == sigma abstains rather than over-certifying.

namespace detail {

inline double elliptic_tangent_delta(double x, double sigma) {
    // sqrt(x^2 + sigma^2) - x without cancellation at large x.
    return sigma * sigma / (x + std::hypot(x, sigma));
}

inline double elliptic_down_delta(double x, double rho) {
    // |x - rho| - x, branched: the naive form loses the -rho entirely once
    // x - rho rounds to x (the classifier probes x = 1e16, where it does).
    return x >= rho ? -rho : rho - 2.0 * x;
}

inline double elliptic_mu1(double x, double rho, double sigma) {
    if (x == 0.0) return rho;
    return 0.25 * rho + 0.25 * elliptic_down_delta(x, rho) +
           0.5 * elliptic_tangent_delta(x, sigma);
}

inline double elliptic_mu2(double x, double rho, double sigma) {
    if (x == 0.0) return rho * rho;
    const double down = elliptic_down_delta(x, rho);
    const double t = elliptic_tangent_delta(x, sigma);
    return 0.25 * rho * rho + 0.25 * down * down + 0.5 * t * t;
}

inline MomentProfile elliptic_radial_profile(double rho, double sigma) {
    MomentProfile p;
    const double B = std::max(rho, sigma);
    const double B2 = B * B;
    auto s1 = [B2](double x) {
        const double xe = std::max(x, 2.8);
        return B2 / (2.0 * xe * std::log(xe));
    };
    auto s2 = [B2](double x) {
        const double xe = std::max(x, 2.8);
        return B2 / std::log(xe);
    };
    p.mu1_lower = [rho, sigma, s1](double x) {
        return detail::elliptic_mu1(x, rho, sigma) - s1(x);
    };
    p.mu1_upper = [rho, sigma, s1](double x) {
        return detail::elliptic_mu1(x, rho, sigma) + s1(x);
    };
    p.mu2_lower = [rho, sigma, s2, B2](double x) {
        return std::max(0.0, detail::elliptic_mu2(x, rho, sigma) - s2(x));
    };
    p.mu2_upper = [rho, sigma, s2, B2](double x) {
        return std::min(B2, detail::elliptic_mu2(x, rho, sigma) + s2(x));
    };
    p.jump_bound = B;
    if (sigma > rho)
        p.regime_tag = Regime::transient_many_cutpoints;
    else if (sigma < rho)
        p.regime_tag = Regime::recurrent;
    else
        p.regime_tag = Regime::unclassified;
    return p;
}

} // namespace detail

class EllipticRadial final : public ScalarProcess {
public:
    EllipticRadial(double rho, double sigma) : rho_(rho), sigma_(sigma) {
        if (!(rho > 0.0) || !(sigma > 0.0))
            throw std::invalid_argument("elliptic_radial: need rho, sigma > 0");
        profile_ = detail::elliptic_radial_profile(rho, sigma);
    }

    std::string id() const override {
        return "elliptic_radial(rho=" + detail::num(rho_) +
               ",sigma=" + detail::num(sigma_) + ")";
    }
    const MomentProfile& profile() const override { return profile_; }
    bool in_state_set(double x) const override {
        return std::isfinite(x) && x >= 0.0;
    }

    std::vector<Atom> support(double x) const override {
        if (!in_state_set(x)) throw std::invalid_argument(id() + ": need x >= 0");
        if (x == 0.0) return {{rho_, 1.0}};
        return {{x + rho_, 0.25},
                {std::abs(x - rho_), 0.25},
                {x + detail::elliptic_tangent_delta(x, sigma_), 0.5}};
    }

    std::unique_ptr<ScalarStepper> make_stepper() const override {
        class S final : public ScalarStepper {
        public:
            S(double rho, double sigma) : rho_(rho), sigma_(sigma) {}
            void reset(double x0) override { x_ = x0; }
            double position() const override { return x_; }
            double step(Rng& rng) override {
                if (x_ == 0.0) return x_ = rho_;
                if (rng.bernoulli(0.5))
                    x_ = rng.bernoulli(0.5) ? x_ + rho_ : std::abs(x_ - rho_);
                else
                    x_ += detail::elliptic_tangent_delta(x_, sigma_);
                return x_;
            }
        private:
            double rho_, sigma_, x_ = 0.0;
        };
        return std::make_unique<S>(rho_, sigma_);
    }

    double rho() const { return rho_; }
    double sigma() const { return sigma_; }

private:
    double rho_, sigma_;
    MomentProfile profile_;
};

// ---------------------------------------------------------------------------
// Vector-valued processes.

class SsrwVector final : public VectorProcess {
public:
    explicit SsrwVector(std::size_t d) : d_(d) {
        if (d < 1) throw std::invalid_argument("ssrw: need d >= 1");
        profile_ = detail::ssrw_radial_profile(d);
    }

    std::string id() const override { return "ssrw(d=" + std::to_string(d_) + ")"; }
    std::size_t dim() const override { return d_; }
    const MomentProfile& profile() const override { return profile_; }
    bool in_state_set(const std::vector<double>& x) const override {
        if (x.size() != d_) return false;
        for (double v : x)
            if (!std::isfinite(v) || std::abs(v - std::round(v)) > 1e-9)
                return false;
        return true;
    }

    std::unique_ptr<VectorStepper> make_stepper() const override {
        class S final : public VectorStepper {
        public:
            explicit S(std::size_t d) : pos_(d, 0.0) {}
            void reset(const std::vector<double>& x0) override {
                pos_.assign(x0.begin(), x0.end());
                for (double& v : pos_) v = std::round(v);
            }
            const std::vector<double>& position() const override { return pos_; }
            void step(Rng& rng) override {
                const std::uint64_t move = rng.below(2 * pos_.size());
                pos_[move / 2] += (move & 1) ? 1.0 : -1.0;
            }
        private:
            std::vector<double> pos_;
        };
        return std::make_unique<S>(d_);
    }

private:
    std::size_t d_;
    MomentProfile profile_;
};

namespace detail {

// Deterministic orthonormal basis of the tangent space at direction xhat:
// Gram-Schmidt over the standard basis, skipping the axis where |xhat| is
// largest (lowest index on ties) so the remaining d-1 vectors stay
// independent of xhat.
inline std::vector<std::vector<double>> tangent_basis(
    const std::vector<double>& xhat) {
    const std::size_t d = xhat.size();
    std::size_t pivot = 0;
    for (std::size_t i = 1; i < d; ++i)
        if (std::abs(xhat[i]) > std::abs(xhat[pivot])) pivot = i;
    std::vector<std::vector<double>> basis;
    basis.reserve(d - 1);
    for (std::size_t j = 0; j < d; ++j) {
        if (j == pivot) continue;
        std::vector<double> v(d, 0.0);
        v[j] = 1.0;
        const double cx = xhat[j];
        for (std::size_t k = 0; k < d; ++k) v[k] -= cx * xhat[k];
        for (const auto& b : basis) {
            double cb = 0.0;
            for (std::size_t k = 0; k < d; ++k) cb += v[k] * b[k];
            for (std::size_t k = 0; k < d; ++k) v[k] -= cb * b[k];
        }
        double n2 = 0.0;
        for (double vk : v) n2 += vk * vk;
        if (n2 < 1e-24)
            throw std::logic_error("tangent basis degenerated");
        const double inv = 1.0 / std::sqrt(n2);
        for (double& vk : v) vk *= inv;
        basis.push_back(std::move(v));
    }
    return basis;
}

} // namespace detail

class EllipticWalk final : public VectorProcess {
public:
    EllipticWalk(std::size_t d, double rho, double sigma)
        : d_(d), rho_(rho), sigma_(sigma) {
        if (d < 2) throw std::invalid_argument("elliptic: need d >= 2");
        if (!(rho > 0.0) || !(sigma > 0.0))
            throw std::invalid_argument("elliptic: need rho, sigma > 0");
        profile_ = detail::elliptic_radial_profile(rho, sigma);
    }

    std::string id() const override {
        return "elliptic(d=" + std::to_string(d_) + ",rho=" + detail::num(rho_) +
               ",sigma=" + detail::num(sigma_) + ")";
    }
    std::size_t dim() const override { return d_; }
    const MomentProfile& profile() const override { return profile_; }
    bool in_state_set(const std::vector<double>& x) const override {
        if (x.size() != d_) return false;
        for (double v : x)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::unique_ptr<VectorStepper> make_stepper() const override {
        class S final : public VectorStepper {
        public:
            S(std::size_t d, double rho, double sigma)
                : pos_(d, 0.0), rho_(rho), sigma_(sigma) {}
            void reset(const std::vector<double>& x0) override {
                pos_.assign(x0.begin(), x0.end());
            }
            const std::vector<double>& position() const override { return pos_; }
            void step(Rng& rng) override {
                const std::size_t d = pos_.size();
                double r2 = 0.0;
                for (double v : pos_) r2 += v * v;
                if (r2 == 0.0) {
                    pos_[0] = rng.sign() > 0 ? rho_ : -rho_;
                    return;
                }
                const double r = std::sqrt(r2);
                std::vector<double> xhat(d);
                for (std::size_t k = 0; k < d; ++k) xhat[k] = pos_[k] / r;
                // Draw order: branch, then direction index, then sign.
                if (rng.bernoulli(0.5)) {
                    const double s = rng.sign() > 0 ? rho_ : -rho_;
                    for (std::size_t k = 0; k < d; ++k) pos_[k] += s * xhat[k];
                } else {
                    const auto basis = detail::tangent_basis(xhat);
                    const auto& t = basis[rng.below(d - 1)];
                    const double s = rng.sign() > 0 ? sigma_ : -sigma_;
                    for (std::size_t k = 0; k < d; ++k) pos_[k] += s * t[k];
                }
            }
        private:
            std::vector<double> pos_;
            double rho_, sigma_;
        };
        return std::make_unique<S>(d_, rho_, sigma_);
    }

    double rho() const { return rho_; }
    double sigma() const { return sigma_; }

private:
    std::size_t d_;
    double rho_, sigma_;
    MomentProfile profile_;
};

} // namespace cutl
