//! Exact computation of the local structure (loops and neighbor tables) of
//! product vertices in the (l,l)-isogeny graph of principally polarized
//! superspecial abelian surfaces, together with a small-prime elliptic
//! curve backend used to cross-validate the symbolic layer.

pub mod num;
pub mod cli;
pub mod concrete;
pub mod hermitian;
pub mod isotropic;
pub mod kernels;
pub mod partition;
pub mod quat;
pub mod report;
pub mod rings;
