//! Example programs bundled with the library.

pub const P1: &str = include_str!("../corpus/p1.mus");
pub const P2: &str = include_str!("../corpus/p2.mus");
pub const SWAP: &str = include_str!("../corpus/swap.mus");
pub const SWAP_DRIVER: &str = include_str!("../corpus/swap_driver.mus");
pub const SWAP_SAME: &str = include_str!("../corpus/swap_same.mus");
pub const ASSIGN_INCR: &str = include_str!("../corpus/assign_incr.mus");
pub const ALLOC: &str = include_str!("../corpus/alloc.mus");
pub const CYCLE: &str = include_str!("../corpus/cycle.mus");
pub const LIST_BUILD: &str = include_str!("../corpus/list_build.mus");
pub const UNCHECKED_ALIAS: &str = include_str!("../corpus/unchecked_alias.mus");
pub const NULL_DEREF: &str = include_str!("../corpus/null_deref.mus");

/// Every bundled program with its file name.
pub const ALL: [(&str, &str); 11] = [
    ("p1.mus", P1),
    ("p2.mus", P2),
    ("swap.mus", SWAP),
    ("swap_driver.mus", SWAP_DRIVER),
    ("swap_same.mus", SWAP_SAME),
    ("assign_incr.mus", ASSIGN_INCR),
    ("alloc.mus", ALLOC),
    ("cycle.mus", CYCLE),
    ("list_build.mus", LIST_BUILD),
    ("unchecked_alias.mus", UNCHECKED_ALIAS),
    ("null_deref.mus", NULL_DEREF),
];
