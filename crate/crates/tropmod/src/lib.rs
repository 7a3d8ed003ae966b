//! Tropical invariants of modular curves by pure finite group theory.
//!
//! For a prime p >= 5, an exponent n >= 1 and an auxiliary level M coprime
//! to p, this crate computes the pruned Berkovich skeleton, the toric rank,
//! the component group (with its odd-part structure) and the geometric
//! Tamagawa number of the modular curves
//!
//!   X_0(p^n M),  X_1(p^n M),  X_sp(p^n M),  X_sp^+(p^n M),
//!
//! working entirely with exact arithmetic: orbits of finite matrix groups
//! on coset schemes over Z/p^n Z, metric graphs with rational edge lengths,
//! and Smith normal forms of integer Gram matrices. Every closed formula is
//! backed by an independent brute-force oracle; `verify::run_all` exercises
//! the full cross-validation suite.
//!
//! Module layout:
//!
//! * [`rings`]    — arithmetic mod p^n, SL_2(Z/mZ) matrices, unit/square tests,
//!   and a brute-force group enumerator.
//! * [`cosets`]   — the coset schemes F_0, F_1, F_1^{+-}, F_sp, F_sp^+, the
//!   SL_2 action, and double-coset tables (closed form and brute force).
//! * [`graph`]    — finite metric graphs, labeled trees, covering towers,
//!   pruning, cycle bases and length-pairing Gram matrices.
//! * [`skeleton`] — supersingular counts and types, the canonical
//!   supersingular tree, pruned skeleta, toric ranks.
//! * [`homology`] — monodromy matrices, continuants, Smith normal form,
//!   component groups and Tamagawa numbers.
//! * [`verify`]   — the acceptance suite cross-checking all of the above.

pub mod cosets;
pub mod error;
pub mod exec;
pub mod graph;
pub mod homology;
pub mod rings;
pub mod skeleton;
pub mod verify;

pub use error::Error;

/// Default cap on brute-force enumeration sizes (overridable per call or
/// via the `TROPMOD_CAP` environment variable in the CLI).
pub const DEFAULT_CAP: u64 = 3000;
