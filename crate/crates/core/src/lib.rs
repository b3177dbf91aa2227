//! Device-independent randomness quantities against no-signalling adversaries.
//!
//! * [`game`]: nonlocal games, behaviors, and the bundled games.
//! * [`lp`]: exact rational linear programming with dual certificates.
//! * [`ns`]: single-round no-signalling and ε-almost-no-signalling values.
//! * [`tons`]: multi-round guessing probabilities under time-ordered and
//!   box no-signalling constraints.
//! * [`ks`]: no-signalling attacks on pseudotelepathy games from Kochen–Specker sets.
//! * [`bounds`]: concentration and parallel-repetition bounds.
//! * [`chain_entropy`]: analytic min-entropy curves for the chained Bell expression.

pub mod bounds;
pub mod chain_entropy;
pub mod error;
pub mod game;
pub mod index;
pub mod ks;
pub mod lp;
pub mod ns;
pub mod rational;
pub mod tons;

pub use error::{Error, Result};
pub use game::{Behavior, Game, Scenario};
pub use lp::{LinProgram, LpSolution};
pub use rational::Rational;
