// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

//! Quantum speed limit (QSL) bounds from the Fubini-Study / Bures geometry.
//!
//! The crate evaluates two independent lower bounds on the time a state needs
//! to travel between two points of state space:
//!
//! - the *global* bound, geodesic length divided by the largest speed of the
//!   whole state, and
//! - the *local* bounds, one per chart parameter, endpoint displacement divided
//!   by the largest rate of that parameter.
//!
//! The QSL time is the larger of the global bound and the best local bound.
//!
//! Three scenario engines integrate the dynamics directly so every bound can be
//! checked against an actual evolution time:
//!
//! - [`lz`]: nonlinear Landau-Zener two-mode condensate on the Bloch sphere,
//! - [`transport`]: split-step propagation of an atom in a moving lattice,
//! - [`jc`]: the damped Jaynes-Cummings qubit with a Lorentzian reservoir.
//!
//! Units follow ħ = 1 throughout.

#![forbid(unsafe_code)]
// `!(x > 0.0)` is the idiom for rejecting NaN along with the range
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod geometry;
pub mod jc;
pub mod lz;
pub mod ode;
pub mod par;
pub mod quad;
pub mod transport;

pub use error::{QslError, Result};
