//! Multi-rendezvous sequence planning on ΔV matrices.
//!
//! A ΔV matrix holds the minimum ΔV of a transfer between two objects over a
//! grid of departure epochs (columns) and transfer durations (rows). This
//! crate builds those matrices from Keplerian catalogs with a Lambert
//! targeter, folds stay and wait times into them, concatenates them with a
//! structure-preserving min-plus operator and selects the cheapest object
//! sequences in two independent ways:
//!
//! * [`sequence`]: depth-first enumeration of object permutations over
//!   concatenated matrices with minimum-sum pruning;
//! * [`graphsearch`]: a label-constrained shortest path on the product of a
//!   time-expanded object graph and a sequence automaton.
//!
//! The two solvers agree on every instance; the acceptance suite checks it.

pub mod consts;
pub mod dvmatrix;
pub mod ephemeris;
pub mod graphsearch;
pub mod lambert;
pub mod pipeline;
pub mod sequence;

pub use ephemeris::{AngleUnit, Catalog, EphemerisError, OrbitalElements, StateVector};

pub use dvmatrix::{DvMatrix, GridSpec, MatrixError};
pub use graphsearch::{DfaVariant, GraphError, SequenceDfa, TimeExpandedGraph, TimeHorizon};
pub use lambert::{LambertConfig, LambertError, TransferSolution};
pub use pipeline::{Adjustments, MatrixSet};
pub use sequence::{LegSchedule, SearchConfig, SearchError, SequenceResult};

