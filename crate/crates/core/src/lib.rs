//! Round-accurate simulation of the (Quantum) Congested Clique and CONGEST
//! models: clique listing and detection, cycle detection, and the nested
//! distributed search they are built on.

pub mod cliquedetect;
pub mod cliquelist;
pub mod cycledetect;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod instance;
pub mod netsim;
pub mod par;
pub mod qsearch;
pub mod seed;
pub mod sizing;

pub use error::{Error, Result};
