//! Approximate Perron-Frobenius eigenvectors for maps on the integer lattice.
//!
//! A map `A: Z₊ᵈ → Z₊ᵈ` that is Lipschitz in the Hilbert projective metric
//! and keeps its images uniformly inside the cone has, on every integer
//! sphere `{‖x‖₁ = k}`, a point `y_k` whose image direction is within
//! `(4Ld/c² + 2√d)/k` of its own. This crate certifies the constants `L`,
//! `c`, `a`, `b` by exhaustive scans in exact arithmetic, finds `y_k`, and
//! checks the resulting bounds.
//!
//! ```
//! use perron_lattice::{certify_constants, find_best, rat, AffineMap, CertifyOptions,
//!     IntegerMap, SphereSlice};
//!
//! let map: IntegerMap = AffineMap::new(vec![vec![2, 1], vec![1, 2]], vec![0, 0])?.into();
//! let slice = SphereSlice::new(2, 4, Some(rat(1, 4)))?;
//! let cert = certify_constants(&map, &slice, &CertifyOptions::default())?;
//! let report = find_best(&map, &slice, &cert, None)?;
//! assert_eq!(report.y_k.entries(), &[2, 2]);
//! assert_eq!(report.theorem_pass, Some(true));
//! # Ok::<(), perron_lattice::Error>(())
//! ```

pub mod analysis;
pub mod cone;
pub mod config;
pub mod error;
pub mod exact;
pub mod finder;
pub mod map;
pub mod models;
pub mod simplex;

pub use analysis::{
    ceil_hypotheses, ceil_lipschitz_bound, certify_constants, check_lipschitz_bound,
    check_nonexpansive, check_scalability, growth_bound_estimate, verify_concavity,
    CeilHypotheses, CertifyOptions, ConcavityReport, ConstantsCertificate, GrowthRow, PairCheck,
    PairWitness, Sampling, ScalabilityReport,
};
pub use cone::{
    cone_compare, hilbert_distance, lambda_factor, norm, ConeOrder, HilbertDistance,
    LatticeVector, Norm, RationalVector,
};
pub use error::{Error, Result};
pub use exact::{format_rational, parse_rational, rat, Rational, Q};
pub use finder::{
    find_best, heuristic_iterate, theorem_bound, theorem_numerator, verify_corollary,
    HeuristicRun, HeuristicStop, ResidualReport, SearchMode,
};
pub use map::{AffineMap, AffinePiece, ConcaveRealMap, IntegerMap, TableMap, ZigzagMap};
pub use simplex::{
    enumerate_slice, enumerate_slice_parallel, nearest_slice_argmin, nearest_slice_point, NearestPoint, SphereSlice,
};
