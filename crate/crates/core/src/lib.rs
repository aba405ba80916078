//! Upward and downward closures of Petri net coverability languages.
//!
//! The crate builds finite automata for `uc(L)` and `dc(L)` where `L` is the
//! covering language of a labelled Petri net instance, decides inclusion of
//! simple regular expressions in those closures (for general and for BPP
//! nets), and decides whether `L` itself is upward or downward closed.
//!
//! ```
//! use pnclosure::{closures, generators, net::Word};
//!
//! let inst = generators::gen_bpp_power(2);
//! let dc = closures::dc_fsa_bpp(&inst, &Default::default()).unwrap();
//! assert!(dc.fsa.accepts(&Word::from_chars("aaa")));
//! assert!(!dc.fsa.accepts(&Word::from_chars("aaaaa")));
//! ```

pub mod closures;
pub mod fsa;
pub mod generators;
pub mod inclusion;
pub mod io;
pub mod net;
pub mod omega;
pub mod presburger;
pub mod reach;
pub mod sre;
pub mod traces;

use thiserror::Error;

/// Resource limits shared by all exploration engines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of explored states, graph nodes or solver nodes.
    pub nodes: usize,
    /// Maximum number of iterations of outer refinement loops.
    pub steps: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            nodes: 200_000,
            steps: 100_000,
        }
    }
}

impl Budget {
    pub fn with_nodes(nodes: usize) -> Self {
        Budget {
            nodes,
            ..Budget::default()
        }
    }
}

/// Umbrella error for callers that do not care which engine failed.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Net(#[from] net::NetError),
    #[error(transparent)]
    Fsa(#[from] fsa::FsaError),
    #[error(transparent)]
    Reach(#[from] reach::ReachError),
    #[error(transparent)]
    Closure(#[from] closures::ClosureError),
    #[error(transparent)]
    Inclusion(#[from] inclusion::InclusionError),
    #[error(transparent)]
    Presburger(#[from] presburger::PresburgerError),
    #[error(transparent)]
    Trace(#[from] traces::TraceError),
    #[error(transparent)]
    Generator(#[from] generators::GeneratorError),
    #[error(transparent)]
    Parse(#[from] io::ParseError),
}
