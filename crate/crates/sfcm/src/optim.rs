//! Bias-corrected Adam, shared by the contrastive stage and the head.
//!
//! Parameters are stored in 32-bit; moments and all arithmetic are 64-bit.
//! The sparse-row stepper is exactly equivalent to a dense step: a row whose
//! moments and gradient are all zero provably stays at zero, so only rows
//! that have ever received gradient need visiting.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.05,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Optimizer state: first and second moment per coordinate plus the step
/// counter.
#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    /// Rows with nonzero moments (sparse mode only).
    touched: BTreeSet<usize>,
}

impl Adam {
    pub fn new(len: usize, cfg: AdamConfig) -> Self {
        Adam {
            cfg,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            touched: BTreeSet::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    fn correction(&self) -> (f64, f64) {
        let t = self.t as i32;
        (
            1.0 - self.cfg.beta1.powi(t),
            1.0 - self.cfg.beta2.powi(t),
        )
    }

    fn update_coord(&mut self, idx: usize, grad: f64, param: &mut f32, c1: f64, c2: f64) {
        let cfg = &self.cfg;
        self.m[idx] = cfg.beta1 * self.m[idx] + (1.0 - cfg.beta1) * grad;
        self.v[idx] = cfg.beta2 * self.v[idx] + (1.0 - cfg.beta2) * grad * grad;
        let m_hat = self.m[idx] / c1;
        let v_hat = self.v[idx] / c2;
        *param = (f64::from(*param) - cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon))
            as f32;
    }

    /// One Adam step over every coordinate.
    pub fn step_dense(&mut self, params: &mut [f32], grad: &[f64]) {
        assert_eq!(params.len(), grad.len());
        assert_eq!(params.len(), self.m.len());
        self.t += 1;
        let (c1, c2) = self.correction();
        for i in 0..params.len() {
            self.update_coord(i, grad[i], &mut params[i], c1, c2);
        }
    }

    /// One Adam step where the gradient is nonzero only on the given rows of
    /// a row-major matrix. Rows never touched before keep zero moments and
    /// zero update, so the result is bit-identical to a dense step.
    pub fn step_rows(
        &mut self,
        params: &mut [f32],
        row_len: usize,
        grad_rows: &BTreeMap<usize, Vec<f64>>,
    ) {
        assert_eq!(params.len(), self.m.len());
        self.t += 1;
        let (c1, c2) = self.correction();
        self.touched.extend(grad_rows.keys().copied());
        let rows: Vec<usize> = self.touched.iter().copied().collect();
        for row in rows {
            let base = row * row_len;
            match grad_rows.get(&row) {
                Some(g) => {
                    for k in 0..row_len {
                        self.update_coord(base + k, g[k], &mut params[base + k], c1, c2);
                    }
                }
                None => {
                    // moment decay with zero gradient still moves the row
                    for k in 0..row_len {
                        self.update_coord(base + k, 0.0, &mut params[base + k], c1, c2);
                    }
                }
            }
        }
    }
}
