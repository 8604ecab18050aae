// Copyright 2026 The qsl Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the geometry, bounds and scenario modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QslError {
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("eigenvalue {index} vanishes while its derivative does not; metric is singular")]
    SingularEigenvalue { index: usize },

    #[error("Bloch pole reached at chi = {chi:.3e} with cos(phi) = {cos_phi:.3e}")]
    Pole { chi: f64, cos_phi: f64 },

    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("forbidden region: radicand {radicand} < 0 at eta = {eta}")]
    Infeasible { eta: f64, radicand: f64 },

    #[error("t = {t} lies beyond the end of the valid domain t_end = {t_end}")]
    BeyondDomain { t: f64, t_end: f64 },

    #[error("grid too small: boundary density {boundary_density:e} exceeds limit")]
    GridTooSmall { boundary_density: f64 },

    #[error("integration tolerance exceeded: {0}")]
    IntegrationTolerance(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, QslError>;

pub(crate) fn contract(msg: impl Into<String>) -> QslError {
    QslError::ContractViolation(msg.into())
}
