#pragma once

#include <array>
#include <string>
#include <string_view>

namespace bergomi {

enum class OptionKind {
    VanillaCall,
    VanillaPut,
    UpInCall,
    UpOutCall,
    DownInCall,
    DownOutCall,
    UpInPut,
    UpOutPut,
    DownInPut,
    DownOutPut,
};

inline constexpr std::array<OptionKind, 10> kAllKinds = {
    OptionKind::VanillaCall, OptionKind::VanillaPut, OptionKind::UpInCall,  OptionKind::UpOutCall,
    OptionKind::DownInCall,  OptionKind::DownOutCall, OptionKind::UpInPut,  OptionKind::UpOutPut,
    OptionKind::DownInPut,   OptionKind::DownOutPut,
};

bool is_call(OptionKind k);
bool is_vanilla(OptionKind k);
bool is_barrier(OptionKind k);
bool is_knock_in(OptionKind k);
bool is_knock_out(OptionKind k);
bool is_up(OptionKind k);

/// +1 for calls, -1 for puts.
double eta(OptionKind k);
/// +1 for up barriers, -1 for down barriers. Throws UsageError for vanillas.
double zeta(OptionKind k);

/// Vanilla option with the same payoff (call or put).
OptionKind vanilla_of(OptionKind k);
/// Knock-in partner of a knock-out (identity for knock-ins). Throws for vanillas.
OptionKind knock_in_of(OptionKind k);
/// Knock-out partner of a knock-in (identity for knock-outs). Throws for vanillas.
OptionKind knock_out_of(OptionKind k);

/// Short tags: vc vp uic uoc dic doc uip uop dip dop.
std::string_view to_string(OptionKind k);
/// Accepts the short tags and the long names ("up_in_call", "vanilla_put", ...).
OptionKind parse_option_kind(std::string_view text);

} // namespace bergomi
