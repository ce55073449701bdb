#pragma once

namespace ctcount {

/// Serial runs the plain reference loop; Parallel runs the tiled OpenMP
/// kernel. Both reduce in a fixed order, so results do not depend on the
/// thread count.
enum class Exec { Serial, Parallel };

}  // namespace ctcount
