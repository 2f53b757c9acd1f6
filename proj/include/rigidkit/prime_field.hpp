#ifndef RIGIDKIT_PRIME_FIELD_HPP
#define RIGIDKIT_PRIME_FIELD_HPP

#include <Eigen/Core>
#include <cstdint>

namespace rigidkit {

// Arithmetic modulo the Mersenne prime 2^61 - 1. Used as the exact scalar for
// the randomized rank oracle; the failure probability of a rank deficit is
// Schwartz-Zippel bounded by (total degree)/p per trial.
class Fp61 {
public:
    static constexpr std::uint64_t P = (1ULL << 61) - 1;

    constexpr Fp61() = default;
    constexpr explicit Fp61(std::uint64_t v) : v_(v % P) {}
    constexpr Fp61(int v) : v_(v >= 0 ? static_cast<std::uint64_t>(v) % P
                                      : P - (static_cast<std::uint64_t>(-static_cast<std::int64_t>(v)) % P)) {
        if (v_ == P) v_ = 0;
    }

    constexpr std::uint64_t value() const { return v_; }
    constexpr bool is_zero() const { return v_ == 0; }

    friend constexpr Fp61 operator+(Fp61 a, Fp61 b) {
        std::uint64_t s = a.v_ + b.v_;
        if (s >= P) s -= P;
        return from_raw(s);
    }
    friend constexpr Fp61 operator-(Fp61 a, Fp61 b) {
        return from_raw(a.v_ >= b.v_ ? a.v_ - b.v_ : a.v_ + P - b.v_);
    }
    friend constexpr Fp61 operator-(Fp61 a) { return from_raw(a.v_ == 0 ? 0 : P - a.v_); }
    friend constexpr Fp61 operator*(Fp61 a, Fp61 b) {
        const unsigned __int128 prod = static_cast<unsigned __int128>(a.v_) * b.v_;
        // fast Mersenne reduction
        std::uint64_t lo = static_cast<std::uint64_t>(prod & P);
        std::uint64_t hi = static_cast<std::uint64_t>(prod >> 61);
        std::uint64_t s = lo + hi;
        if (s >= P) s -= P;
        return from_raw(s);
    }
    friend constexpr Fp61 operator/(Fp61 a, Fp61 b) { return a * b.inverse(); }

    Fp61& operator+=(Fp61 o) { return *this = *this + o; }
    Fp61& operator-=(Fp61 o) { return *this = *this - o; }
    Fp61& operator*=(Fp61 o) { return *this = *this * o; }
    Fp61& operator/=(Fp61 o) { return *this = *this / o; }

    friend constexpr bool operator==(Fp61 a, Fp61 b) { return a.v_ == b.v_; }
    friend constexpr bool operator!=(Fp61 a, Fp61 b) { return a.v_ != b.v_; }

    constexpr Fp61 pow(std::uint64_t e) const {
        Fp61 base = *this, acc = from_raw(1);
        while (e) {
            if (e & 1) acc *= base;
            base *= base;
            e >>= 1;
        }
        return acc;
    }
    constexpr Fp61 inverse() const { return pow(P - 2); }

    static constexpr Fp61 from_raw(std::uint64_t v) {
        Fp61 f;
        f.v_ = v;
        return f;
    }

private:
    std::uint64_t v_ = 0;
};

using MatrixFp = Eigen::Matrix<Fp61, Eigen::Dynamic, Eigen::Dynamic>;
using VectorFp = Eigen::Matrix<Fp61, Eigen::Dynamic, 1>;

// Rank by plain Gaussian elimination (any nonzero pivot is exact).
int rank_mod_p(MatrixFp m);

} // namespace rigidkit

namespace Eigen {
template <>
struct NumTraits<rigidkit::Fp61> {
    using Real = rigidkit::Fp61;
    using NonInteger = rigidkit::Fp61;
    using Literal = rigidkit::Fp61;
    using Nested = rigidkit::Fp61;
    enum {
        IsComplex = 0,
        IsInteger = 1,
        IsSigned = 0,
        RequireInitialization = 0,
        ReadCost = 1,
        AddCost = 2,
        MulCost = 4
    };
    static inline Real epsilon() { return rigidkit::Fp61(0); }
    static inline Real dummy_precision() { return rigidkit::Fp61(0); }
    static inline int digits10() { return 18; }
};
} // namespace Eigen

#endif
