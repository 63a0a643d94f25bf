//! Classic MFP and feasible-path MFP data-flow analysis over MiniIR.

pub mod clients;
pub mod fpmfp;
pub mod frontend;
pub mod gen;
pub mod lattice;
pub mod mfp;
pub mod mips;
pub mod par;
pub mod oracle;
pub mod pipeline;
