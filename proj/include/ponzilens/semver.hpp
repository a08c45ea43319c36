#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ponzilens {

struct Version
{
    int major = 0;
    int minor = 0;
    int patch = 0;

    auto operator<=>(const Version&) const = default;

    /// Parses `0.8.23`, `v0.4.26+commit.4563c3fc` and similar. Trailing build
    /// metadata is ignored.
    static std::optional<Version> parse(std::string_view text);
    [[nodiscard]] std::string str() const;
};

inline constexpr Version kMinSupportedVersion{0, 4, 11};
inline constexpr Version kMaxSupportedVersion{0, 8, 23};

/// Every published compiler release between the supported bounds, ascending.
const std::vector<Version>& supported_releases();

/// A `pragma solidity` version expression: `^0.4.11`, `>=0.5.0 <0.7.0`,
/// `0.4.24`, `~0.6`, `0.4.0 - 0.5.0`, alternatives joined by `||`.
class VersionConstraint
{
public:
    static VersionConstraint parse(std::string_view text);

    [[nodiscard]] bool satisfied_by(const Version& v) const;
    /// The version pinned by a single `=x.y.z` / `x.y.z` comparator, if any.
    [[nodiscard]] std::optional<Version> exact() const;
    /// Lowest supported release satisfying the constraint.
    [[nodiscard]] std::optional<Version> lowest_supported() const;
    [[nodiscard]] const std::string& text() const { return text_; }

private:
    enum class Op { Eq, Lt, Le, Gt, Ge };
    struct Comparator
    {
        Op op;
        Version version;
    };
    using Conjunction = std::vector<Comparator>;

    std::string text_;
    std::vector<Conjunction> alternatives_;
};

/// Extracts the first `pragma solidity ...;` expression from source text.
std::optional<std::string> find_pragma(std::string_view source);

}  // namespace ponzilens
