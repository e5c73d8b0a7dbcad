//! Path-based distances on weighted music graphs and the Vietoris-Rips
//! persistent homology they induce.
//!
//! A [`WeightedGraph`] is built from a monophonic note sequence
//! ([`music`]), turned into one of three all-pairs distance matrices
//! ([`distance`]), filtered ([`filtration`]) and reduced ([`persistence`]).
//! [`inclusion`] then compares the three one-dimensional barcodes of the
//! same graph by their birth edges.
//!
//! All numeric code is generic over [`Scalar`]. The aliases below fix the
//! exact rational instantiation used by the command-line tool, plus float
//! variants for exploratory work.

pub mod distance;
pub mod error;
pub mod filtration;
pub mod graph;
pub mod inclusion;
pub mod music;
pub mod oracle;
pub mod persistence;
pub mod pipeline;
pub mod scalar;
pub mod verify;

pub use distance::{DistanceKind, DistanceMatrix, MetricReport, PathWitness};
pub use error::{Error, Result};
pub use filtration::{Filtration, Simplex};
pub use graph::{VertexId, WeightTransform, WeightedGraph};
pub use inclusion::{InclusionReport, InjectionReport, MatchType};
pub use music::{IngestOptions, NoteEvent, NoteFormat, NoteSequence, Pitch};
pub use persistence::{BarcodeSet, PersistencePair};
pub use scalar::Scalar;

/// Exact arbitrary-precision rational.
pub type Rational = num_rational::BigRational;

pub type Graph = WeightedGraph<Rational>;
pub type Matrix = DistanceMatrix<Rational>;
pub type Barcode = BarcodeSet<Rational>;

pub type GraphF64 = WeightedGraph<f64>;
pub type MatrixF64 = DistanceMatrix<f64>;
pub type BarcodeF64 = BarcodeSet<f64>;

pub type GraphF32 = WeightedGraph<f32>;
