//! Network coding with random packet-index assignment.
//!
//! Sources that share a spatio-temporal slot pick random canonical header
//! subvectors instead of globally coordinated indices. Relays mix packets
//! over GF(2); the sink recovers the originals with a branch-and-prune tree
//! search over the block echelon form of what it received, using a payload
//! hash to discard inconsistent candidates.
//!
//! Modules:
//! - [`gf2`]: bit-packed GF(2) vectors and matrices, RREF, block RREF.
//! - [`packet`]: header layout, payload hash, serialization.
//! - [`encoder`]: random index assignment and recombination.
//! - [`decoder`]: Gaussian fast path, tree decoder (SLE and LUT), brute force.
//! - [`analytics`]: rank distributions, branch counts, error and cost models.
//! - [`netsim`]: random geometric networks and header-length comparisons.

pub mod analytics;
pub mod decoder;
pub mod encoder;
pub mod error;
pub mod gf2;
pub mod netsim;
pub mod packet;

pub use error::{Error, Result};
pub use gf2::{BinaryMatrix, BitVec, EchelonDecomposition};
pub use packet::{CodedPacket, HeaderConfig, SourcePacket, Sts};
