//! Exact combinatorics of total Donaldson-Thomas partition functions for
//! generalised conifolds `C_{m,n} = {xy = z^m w^n}`.
//!
//! The crepant resolutions of `C_{m,n}` are the maximal lattice
//! triangulations of a two-row strip; each contributes a finite product of
//! MacMahon factors indexed by runs of interior edges. This crate
//! enumerates the triangulations ([`strip`]), multiplies the per-resolution
//! products into exact exponent vectors and checks the homogeneity of the
//! result ([`macmahon`]), rewrites the product of the `C_{1,n}` flop chain
//! in a fixed curve basis ([`flop`]), factors totals of partially resolved
//! strips ([`partial`]), and expands any of these as exact truncated
//! `q`-series for coefficientwise cross-checks ([`qseries`]).
//!
//! All arithmetic is exact: big integers for exponents and counts, big
//! rationals where a derivation passes through fractions. Enumeration-heavy
//! reductions run on a thread pool when the default `parallel` feature is
//! enabled; disabling it leaves the same sequential code paths that the
//! parallel results are tested against.

pub mod error;
pub mod flop;
pub mod laurent;
pub mod macmahon;
pub mod partial;
pub mod qseries;
pub mod strip;
pub mod verify;

pub use error::{Error, Result};
pub use flop::{flop_chain_bases, flop_total, SignedFactorList};
pub use laurent::LaurentMonomial;
pub use macmahon::{
    check_homogeneity, degree_formula, degree_probabilistic, reduced_partition,
    signature_bruteforce, signature_closed_form, total_partition, total_partition_seq,
    unreduced_total, ExponentMap, HomogeneityReport,
};
pub use partial::{
    block_multiplicities, enumerate_decompositions, factorize, restricted_total,
    restricted_triangulations, BlockDecomposition, BlockFactor, Factorization,
};
pub use qseries::{
    evaluate_exponent_map, evaluate_factor_list, macmahon_exp_series, macmahon_series, QSeries,
};
pub use strip::{
    binomial, edge_path_list, enumerate_triangulations, triangulation_at_lex_index, EdgePath,
    StripCounts, StripDiagram, Triangulation, DEFAULT_ENUM_BIT_LIMIT, ENUM_BITS_ENV,
};

#[cfg(feature = "parallel")]
pub use macmahon::total_partition_par;
#[cfg(feature = "parallel")]
pub use partial::restricted_total_par;
