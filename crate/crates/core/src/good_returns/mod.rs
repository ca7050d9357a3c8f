//! Good returns of skew products: balanced times of the renormalization
//! orbit, and searches for points whose return is recurrent for the cocycle,
//! dense, and continuous on a one-sided neighbourhood.

mod certificate;
mod intervals;
mod orbit;
mod search;
mod times;

pub use certificate::{certify, Certificate, CertifyRequest, WindowRecord};
pub use intervals::IntervalSet;
pub use orbit::{continuity_interval, continuity_rooms, max_gap, orbit_density_gap, Side};
pub use search::{
    good_return_search, recurrence_search, verify_good_return, Found, GoodReturn, GoodReturnBounds,
    Recurrence, SearchConfig, SearchStats, Verification,
};
pub use times::{
    balanced_times, balanced_times_with, disjoint_side, BalancedConstants, BalancedTime,
    BalancedTimes, BalancedTimesConfig, GrowthCheck, ReturnRule,
};
