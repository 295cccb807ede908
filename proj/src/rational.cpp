#include "rvc/rational.hpp"

#include <cctype>
#include <ostream>

namespace rvc {

Rational parse_rational(std::string_view text)
{
    auto fail = [&] { throw Error("invalid rational '" + std::string(text) + "'"); };
    if (text.empty())
        fail();
    size_t slash = text.find('/');
    auto parse_int = [&](std::string_view part) -> Integer {
        if (part.empty())
            fail();
        size_t i = 0;
        if (part[0] == '-' || part[0] == '+')
            i = 1;
        if (i == part.size())
            fail();
        for (size_t j = i; j < part.size(); ++j)
            if (!std::isdigit(static_cast<unsigned char>(part[j])))
                fail();
        return Integer(std::string(part));
    };
    if (slash == std::string_view::npos)
        return Rational(parse_int(text));
    Integer num = parse_int(text.substr(0, slash));
    Integer den = parse_int(text.substr(slash + 1));
    if (den == 0)
        throw Error("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
}

std::string to_string(const Rational& r)
{
    std::string s = numerator(r).str();
    if (denominator(r) != 1)
        s += "/" + denominator(r).str();
    return s;
}

std::string Cost::str() const
{
    return infinite_ ? "inf" : to_string(value_);
}

Cost Cost::parse(std::string_view text)
{
    if (text == "inf" || text == "infinity" || text == "∞")
        return Cost::infinity();
    return Cost(parse_rational(text));
}

std::ostream& operator<<(std::ostream& os, const Cost& c)
{
    return os << c.str();
}

} // namespace rvc
