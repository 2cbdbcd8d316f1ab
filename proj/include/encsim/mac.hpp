#pragma once

#include "encsim/isa.hpp"
#include "encsim/regfile.hpp"

namespace encsim {

enum class Right { R, W, X };

// Literal rights matrix; the entry point is the single address ts.
bool mac_cell(const Layout& L, Addr f, Right rght, Addr t);

// Only the emptiness of the backup matters to the access control.
bool mac_ok(const Layout& L, const Instruction& i, Addr pcold, const RegisterFile& R, bool backup_present);

}  // namespace encsim
