//! Exact symbolic Chern-class engine for weighted blow-ups, stratum
//! networks of local embeddings, and moduli of genus-zero stable maps.
//!
//! Modules:
//! - [`gring`]: truncated graded polynomials over the rationals and
//!   presented quotient rings.
//! - [`wblow`]: Chern classes of weighted projective fibrations and
//!   weighted blow-ups.
//! - [`stablemaps`]: nested-set combinatorics and the total Chern classes
//!   of the blow-up tower of stable-map spaces.
//! - [`stratnet`]: stratum networks, chain counts, weights, pushforward
//!   and the network Chow decomposition.
//! - [`groupoidlift`]: finite groupoid models of étale presentations and
//!   the arrow-subtraction construction.
//! - [`cli`]: the batch front-end behind the `stackchern` binary.

pub mod gring;
pub mod groupoidlift;
pub mod linalg;
pub mod stratnet;
pub mod wblow;
pub mod stablemaps;
pub mod cli;
