//! Deciding when a periodic tree-pair has at most one unfaced end, and
//! certifying the answer on concrete balls.

pub mod ball;
pub mod corpus;
pub mod end;
pub mod local;
pub mod multiplicity;
pub mod ptp;
pub mod classify;
pub mod lifting;
pub mod witness;
pub mod oracle;
pub mod dot;
pub mod random;
