#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <compare>
#include <iosfwd>
#include <string>
#include <string_view>

#include "rvc/error.hpp"

namespace rvc {

using Integer = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

Rational parse_rational(std::string_view text); // "p", "-p", "p/q"
std::string to_string(const Rational& r);

// Value in Q ∪ {∞} under the cost arithmetic:
//   a + ∞ = ∞,  0·∞ = 0,  a·∞ = ∞ for a > 0,  a < ∞ for all finite a.
class Cost {
public:
    Cost() : infinite_(false), value_(0) {}
    Cost(int v) : infinite_(false), value_(v) {}
    Cost(Rational v) : infinite_(false), value_(std::move(v)) {}

    static Cost infinity()
    {
        Cost c;
        c.infinite_ = true;
        return c;
    }

    bool is_infinite() const { return infinite_; }
    bool is_finite() const { return !infinite_; }

    const Rational& value() const
    {
        if (infinite_)
            throw Error("value() on infinite cost");
        return value_;
    }

    Cost& operator+=(const Cost& o)
    {
        if (o.infinite_)
            infinite_ = true;
        else if (!infinite_)
            value_ += o.value_;
        return *this;
    }

    friend Cost operator+(Cost a, const Cost& b)
    {
        a += b;
        return a;
    }

    // Scaling by a non-negative rational; 0·∞ = 0.
    friend Cost operator*(const Rational& r, const Cost& c)
    {
        if (r < 0 && c.infinite_)
            throw Error("negative scaling of an infinite cost is undefined");
        if (c.infinite_)
            return r == 0 ? Cost(0) : Cost::infinity();
        return Cost(r * c.value_);
    }

    friend bool operator==(const Cost& a, const Cost& b)
    {
        if (a.infinite_ || b.infinite_)
            return a.infinite_ == b.infinite_;
        return a.value_ == b.value_;
    }

    friend std::strong_ordering operator<=>(const Cost& a, const Cost& b)
    {
        if (a.infinite_ && b.infinite_)
            return std::strong_ordering::equal;
        if (a.infinite_)
            return std::strong_ordering::greater;
        if (b.infinite_)
            return std::strong_ordering::less;
        if (a.value_ < b.value_)
            return std::strong_ordering::less;
        if (a.value_ == b.value_)
            return std::strong_ordering::equal;
        return std::strong_ordering::greater;
    }

    std::string str() const; // "p/q" or "inf"

    static Cost parse(std::string_view text); // "p/q", "p", "inf"

private:
    bool infinite_;
    Rational value_;
};

std::ostream& operator<<(std::ostream& os, const Cost& c);

} // namespace rvc
