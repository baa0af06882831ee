//! Computational toolkit for finitely presented groups: word problems with
//! replayable certificates, small cancellation, homology, finite quotients,
//! the Rips construction and fibre-product presentations.

pub mod abelian;
pub mod certificate;
pub mod constructions;
pub mod error;
pub mod fibre;
pub mod pipeline;
pub mod presentation;
pub mod quotients;
pub mod rips;
pub mod smallcanc;
pub mod text;
pub mod word;
pub mod wp;

pub use error::{Error, Result};
pub use presentation::{GenMap, Presentation};
pub use word::{Alphabet, Gen, Letter, Run, Word};
