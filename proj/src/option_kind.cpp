#include "bergomi/option_kind.hpp"

#include "bergomi/errors.hpp"

#include <algorithm>
#include <cctype>

namespace bergomi {

namespace {

struct KindInfo {
    OptionKind kind;
    std::string_view tag;
    std::string_view name;
};

constexpr std::array<KindInfo, 10> kInfo = {{
    {OptionKind::VanillaCall, "vc", "vanilla_call"},
    {OptionKind::VanillaPut, "vp", "vanilla_put"},
    {OptionKind::UpInCall, "uic", "up_in_call"},
    {OptionKind::UpOutCall, "uoc", "up_out_call"},
    {OptionKind::DownInCall, "dic", "down_in_call"},
    {OptionKind::DownOutCall, "doc", "down_out_call"},
    {OptionKind::UpInPut, "uip", "up_in_put"},
    {OptionKind::UpOutPut, "uop", "up_out_put"},
    {OptionKind::DownInPut, "dip", "down_in_put"},
    {OptionKind::DownOutPut, "dop", "down_out_put"},
}};

} // namespace

bool is_call(OptionKind k) {
    switch (k) {
    case OptionKind::VanillaCall:
    case OptionKind::UpInCall:
    case OptionKind::UpOutCall:
    case OptionKind::DownInCall:
    case OptionKind::DownOutCall:
        return true;
    default:
        return false;
    }
}

bool is_vanilla(OptionKind k) { return k == OptionKind::VanillaCall || k == OptionKind::VanillaPut; }

bool is_barrier(OptionKind k) { return !is_vanilla(k); }

bool is_knock_in(OptionKind k) {
    return k == OptionKind::UpInCall || k == OptionKind::DownInCall || k == OptionKind::UpInPut ||
           k == OptionKind::DownInPut;
}

bool is_knock_out(OptionKind k) { return is_barrier(k) && !is_knock_in(k); }

bool is_up(OptionKind k) {
    return k == OptionKind::UpInCall || k == OptionKind::UpOutCall || k == OptionKind::UpInPut ||
           k == OptionKind::UpOutPut;
}

double eta(OptionKind k) { return is_call(k) ? 1.0 : -1.0; }

double zeta(OptionKind k) {
    if (is_vanilla(k)) throw UsageError("zeta is undefined for vanilla options");
    return is_up(k) ? 1.0 : -1.0;
}

OptionKind vanilla_of(OptionKind k) { return is_call(k) ? OptionKind::VanillaCall : OptionKind::VanillaPut; }

OptionKind knock_in_of(OptionKind k) {
    switch (k) {
    case OptionKind::UpInCall:
    case OptionKind::UpOutCall:
        return OptionKind::UpInCall;
    case OptionKind::DownInCall:
    case OptionKind::DownOutCall:
        return OptionKind::DownInCall;
    case OptionKind::UpInPut:
    case OptionKind::UpOutPut:
        return OptionKind::UpInPut;
    case OptionKind::DownInPut:
    case OptionKind::DownOutPut:
        return OptionKind::DownInPut;
    default:
        throw UsageError("vanilla options have no knock-in partner");
    }
}

OptionKind knock_out_of(OptionKind k) {
    switch (knock_in_of(k)) {
    case OptionKind::UpInCall:
        return OptionKind::UpOutCall;
    case OptionKind::DownInCall:
        return OptionKind::DownOutCall;
    case OptionKind::UpInPut:
        return OptionKind::UpOutPut;
    default:
        return OptionKind::DownOutPut;
    }
}

std::string_view to_string(OptionKind k) {
    for (const auto& info : kInfo)
        if (info.kind == k) return info.tag;
    return "?";
}

OptionKind parse_option_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::replace(lower.begin(), lower.end(), '-', '_');
    for (const auto& info : kInfo)
        if (lower == info.tag || lower == info.name) return info.kind;
    throw UsageError("unknown option kind '" + std::string(text) + "'");
}

} // namespace bergomi
