#include "ponzilens/semver.hpp"

#include "ponzilens/error.hpp"

#include <cctype>
#include <charconv>
#include <regex>

namespace ponzilens {

namespace {

struct PartialVersion
{
    Version version;
    int parts = 0;  // number of numeric components present; wildcards stop the count
};

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::optional<PartialVersion> parse_partial(std::string_view text)
{
    text = trim(text);
    if (!text.empty() && (text.front() == 'v' || text.front() == 'V'))
        text.remove_prefix(1);
    PartialVersion out;
    int* slots[] = {&out.version.major, &out.version.minor, &out.version.patch};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        if (pos >= text.size())
            break;
        if (text[pos] == 'x' || text[pos] == 'X' || text[pos] == '*')
            break;
        int value = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
        if (ec != std::errc{})
            return std::nullopt;
        *slots[i] = value;
        out.parts = i + 1;
        pos = static_cast<std::size_t>(ptr - text.data());
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            continue;
        }
        break;
    }
    if (out.parts == 0 && !(text.size() == 1 && (text[0] == '*' || text[0] == 'x' || text[0] == 'X')))
        return std::nullopt;
    return out;
}

Version bump_for_partial(const PartialVersion& p)
{
    // Upper bound (exclusive) of the range a partial version denotes.
    Version v = p.version;
    if (p.parts <= 1)
        return {v.major + 1, 0, 0};
    if (p.parts == 2)
        return {v.major, v.minor + 1, 0};
    return {v.major, v.minor, v.patch + 1};
}

}  // namespace

std::optional<Version> Version::parse(std::string_view text)
{
    text = trim(text);
    if (!text.empty() && (text.front() == 'v' || text.front() == 'V'))
        text.remove_prefix(1);
    Version v;
    int* slots[] = {&v.major, &v.minor, &v.patch};
    const char* p = text.data();
    const char* end = text.data() + text.size();
    for (int i = 0; i < 3; ++i) {
        auto [ptr, ec] = std::from_chars(p, end, *slots[i]);
        if (ec != std::errc{})
            return std::nullopt;
        p = ptr;
        if (i < 2) {
            if (p == end || *p != '.')
                return std::nullopt;
            ++p;
        }
    }
    if (p != end && *p != '+' && *p != '-' && !std::isspace(static_cast<unsigned char>(*p)))
        return std::nullopt;
    return v;
}

std::string Version::str() const
{
    return std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch);
}

const std::vector<Version>& supported_releases()
{
    static const std::vector<Version> releases = [] {
        std::vector<Version> out;
        for (int p = 11; p <= 26; ++p)
            out.push_back({0, 4, p});
        for (int p = 0; p <= 17; ++p)
            out.push_back({0, 5, p});
        for (int p = 0; p <= 12; ++p)
            out.push_back({0, 6, p});
        for (int p = 0; p <= 6; ++p)
            out.push_back({0, 7, p});
        for (int p = 0; p <= 23; ++p)
            out.push_back({0, 8, p});
        return out;
    }();
    return releases;
}

VersionConstraint VersionConstraint::parse(std::string_view text)
{
    VersionConstraint out;
    out.text_ = std::string(trim(text));
    std::string_view rest = out.text_;
    auto fail = [&] {
        return Error(ErrorCode::UnsupportedVersion, "cannot parse version constraint '" + out.text_ + "'");
    };
    if (rest.empty())
        throw fail();

    while (true) {
        std::size_t bar = rest.find("||");
        std::string_view alt = trim(rest.substr(0, bar));
        Conjunction conj;

        // Tokenise on whitespace, keeping operators glued to their version.
        std::vector<std::string> tokens;
        std::string current;
        for (char c : alt) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                if (!current.empty()) {
                    tokens.push_back(current);
                    current.clear();
                }
            } else {
                current.push_back(c);
            }
        }
        if (!current.empty())
            tokens.push_back(current);
        // Re-attach lone operators (`>= 0.4.0`).
        std::vector<std::string> merged;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const std::string& t = tokens[i];
            bool op_only = !t.empty() && t.find_first_not_of("<>=^~") == std::string::npos;
            if (op_only && i + 1 < tokens.size() && tokens[i + 1] != "-") {
                merged.push_back(t + tokens[i + 1]);
                ++i;
            } else {
                merged.push_back(t);
            }
        }

        for (std::size_t i = 0; i < merged.size(); ++i) {
            if (i + 2 < merged.size() && merged[i + 1] == "-") {
                auto lo = parse_partial(merged[i]);
                auto hi = parse_partial(merged[i + 2]);
                if (!lo || !hi)
                    throw fail();
                conj.push_back({Op::Ge, lo->version});
                if (hi->parts == 3)
                    conj.push_back({Op::Le, hi->version});
                else
                    conj.push_back({Op::Lt, bump_for_partial(*hi)});
                i += 2;
                continue;
            }
            std::string_view tok = merged[i];
            std::string_view op;
            std::size_t n = tok.find_first_not_of("<>=^~");
            if (n == std::string_view::npos)
                throw fail();
            op = tok.substr(0, n);
            auto pv = parse_partial(tok.substr(n));
            if (!pv)
                throw fail();
            const Version& v = pv->version;
            if (op == "^") {
                Version upper;
                if (v.major > 0 || pv->parts == 1)
                    upper = {v.major + 1, 0, 0};
                else if (v.minor > 0 || pv->parts == 2)
                    upper = {0, v.minor + 1, 0};
                else
                    upper = {0, 0, v.patch + 1};
                conj.push_back({Op::Ge, v});
                conj.push_back({Op::Lt, upper});
            } else if (op == "~") {
                conj.push_back({Op::Ge, v});
                conj.push_back({Op::Lt, pv->parts <= 1 ? Version{v.major + 1, 0, 0} : Version{v.major, v.minor + 1, 0}});
            } else if (op.empty() || op == "=") {
                if (pv->parts == 3) {
                    conj.push_back({Op::Eq, v});
                } else if (pv->parts > 0) {
                    conj.push_back({Op::Ge, v});
                    conj.push_back({Op::Lt, bump_for_partial(*pv)});
                }
            } else if (op == ">=") {
                conj.push_back({Op::Ge, v});
            } else if (op == ">") {
                conj.push_back(pv->parts == 3 ? Comparator{Op::Gt, v} : Comparator{Op::Ge, bump_for_partial(*pv)});
            } else if (op == "<=") {
                conj.push_back(pv->parts == 3 ? Comparator{Op::Le, v} : Comparator{Op::Lt, bump_for_partial(*pv)});
            } else if (op == "<") {
                conj.push_back({Op::Lt, v});
            } else {
                throw fail();
            }
        }
        out.alternatives_.push_back(std::move(conj));
        if (bar == std::string_view::npos)
            break;
        rest = rest.substr(bar + 2);
    }
    return out;
}

bool VersionConstraint::satisfied_by(const Version& v) const
{
    for (const auto& conj : alternatives_) {
        bool ok = true;
        for (const auto& c : conj) {
            switch (c.op) {
                case Op::Eq: ok = v == c.version; break;
                case Op::Lt: ok = v < c.version; break;
                case Op::Le: ok = v <= c.version; break;
                case Op::Gt: ok = v > c.version; break;
                case Op::Ge: ok = v >= c.version; break;
            }
            if (!ok)
                break;
        }
        if (ok)
            return true;
    }
    return false;
}

std::optional<Version> VersionConstraint::exact() const
{
    if (alternatives_.size() == 1 && alternatives_[0].size() == 1 && alternatives_[0][0].op == Op::Eq)
        return alternatives_[0][0].version;
    return std::nullopt;
}

std::optional<Version> VersionConstraint::lowest_supported() const
{
    for (const auto& v : supported_releases())
        if (satisfied_by(v))
            return v;
    return std::nullopt;
}

std::optional<std::string> find_pragma(std::string_view source)
{
    static const std::regex re(R"(pragma\s+solidity\s+([^;]+);)");
    std::cmatch m;
    if (std::regex_search(source.data(), source.data() + source.size(), m, re))
        return std::string(trim(std::string_view(m[1].first, static_cast<std::size_t>(m[1].length()))));
    return std::nullopt;
}

}  // namespace ponzilens
