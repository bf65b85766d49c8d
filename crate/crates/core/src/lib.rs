//! Corona certification and invertible Bezout synthesis for pairs of
//! real-symmetric polynomials on the closed unit disc.
//!
//! Given `f1`, `f2` with real coefficients and no common zero on the closed
//! disc, [`synthesize`] produces grid samples of `g1`, `g2` with
//! `f1 g1 + f2 g2 = 1`, `g1` zero-free and both real-symmetric, provided `f1`
//! has one sign at the real zeros of `f2` in `[-1, 1]`.

pub mod certify;
pub mod corpus;
pub mod dbar;
pub mod error;
pub mod grid;
pub mod logbranch;
pub mod poly;
pub mod regions;
pub mod synth;
pub mod verify;

pub use certify::{bezout_euclid, cayley_pullback, corona_delta, parity_interlacing, poz_check, symmetrize, CoronaCertificate, PozReport, Symmetrize};
pub use dbar::{cauchy_transform, cauchy_transform_with, CauchyMethod};
pub use error::{Error, Result};
pub use grid::{dbar_fd, dist_transform, euclidean_dist_transform, mirror_defect, sample, DiscGrid, Field, NodeId, RegionMask};
pub use regions::{build_s, cutoff_q, level_mask, select_threshold, Cutoff, RegionConfig};
pub use logbranch::log_branch;
pub use synth::{synthesize, SynthConfig, SynthesisRecord, SynthesisResult};
pub use verify::{inject, verify, Fault, Thresholds, VerifyReport};
pub use poly::{ComplexPolynomial, RealPolynomial, RealRoot};
