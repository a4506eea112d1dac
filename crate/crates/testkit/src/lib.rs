//! Test support: exact-arithmetic oracles, third-party reference decoders
//! and seeded generators of random inputs.

pub mod facade;
pub mod gen;
pub mod oracle;
pub mod reference;
