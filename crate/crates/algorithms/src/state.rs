//! Explicit iteration state for the four methods. Step functions take a
//! state by value and return the successor, so every transition is a pure
//! function of (state, sampled randomness).

use crate::{AlgorithmError, CallCounter};
use operator_core::{OperatorEnsemble, Vector};

fn sq_dist(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm_squared()
}

/// Uncorrected stochastic proximal point: just the iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SppmState {
    pub x: Vector,
    /// Completed iterations.
    pub k: u64,
}

impl SppmState {
    pub fn new(x0: Vector) -> Self {
        Self { x: x0, k: 0 }
    }

    pub fn sq_error(&self, x_star: &Vector) -> f64 {
        sq_dist(&self.x, x_star)
    }
}

/// Online-correction variant: no carried randomness, the correction is
/// recomputed from scratch each step.
#[derive(Debug, Clone, PartialEq)]
pub struct SppmOcState {
    pub x: Vector,
}

impl SppmOcState {
    pub fn new(x0: Vector) -> Self {
        Self { x: x0 }
    }

    pub fn sq_error(&self, x_star: &Vector) -> f64 {
        sq_dist(&self.x, x_star)
    }
}

/// Loopless variance reduction: an anchor `w`, the stored full element
/// `a_bar` evaluated at `w`, and the iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct LsvrpState {
    pub x: Vector,
    pub w: Vector,
    /// Mean ensemble element at `w`, refreshed whenever the anchor moves.
    pub a_bar: Vector,
}

impl LsvrpState {
    /// Anchors at the start point (`w0 = x0`), so the stored element is the
    /// genuine mean at the anchor. Charges one full-operator call.
    pub fn init(
        ens: &OperatorEnsemble,
        x0: Vector,
        counter: &mut CallCounter,
    ) -> Result<Self, AlgorithmError> {
        let a_bar = ens.mean_element(&x0)?;
        counter.add_full(1);
        Ok(Self {
            x: x0.clone(),
            w: x0,
            a_bar,
        })
    }

    pub fn from_parts(x: Vector, w: Vector, a_bar: Vector) -> Self {
        Self { x, w, a_bar }
    }

    pub fn sq_error(&self, x_star: &Vector) -> f64 {
        sq_dist(&self.x, x_star)
    }

    /// `||x - x*||^2 + (gamma*mu/p) ||w - x*||^2`.
    pub fn lyapunov(&self, x_star: &Vector, gamma: f64, mu: f64, p: f64) -> f64 {
        self.sq_error(x_star) + gamma * mu / p * sq_dist(&self.w, x_star)
    }
}

/// Table-based variance reduction: one stored element per member and their
/// running mean. `shadow_w` optionally tracks the point each table entry was
/// recovered at — needed only for Lyapunov values, so it is off by default.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSagaState {
    pub x: Vector,
    pub table: Vec<Vector>,
    /// Running mean of `table`; drifts by at most rounding and is recomputed
    /// periodically by the run driver.
    pub a_bar: Vector,
    pub shadow_w: Option<Vec<Vector>>,
}

impl PointSagaState {
    /// Fills the table with the member elements at the start point, charging
    /// one member call each. Requires uniform weights: the running-mean
    /// update replaces one entry at weight `1/n`.
    pub fn init(
        ens: &OperatorEnsemble,
        x0: Vector,
        track_shadow: bool,
        counter: &mut CallCounter,
    ) -> Result<Self, AlgorithmError> {
        if !ens.is_uniform() {
            return Err(AlgorithmError::InvalidConfig(
                "the table method requires uniform weights".into(),
            ));
        }
        let table = ens
            .members()
            .iter()
            .map(|m| m.evaluate_element(&x0))
            .collect::<Result<Vec<_>, _>>()?;
        counter.add_member(ens.len() as u64);
        let a_bar = mean_of(&table);
        let shadow_w = track_shadow.then(|| vec![x0.clone(); ens.len()]);
        Ok(Self {
            x: x0,
            table,
            a_bar,
            shadow_w,
        })
    }

    /// State with a caller-provided table; `a_bar` is derived from the table.
    pub fn from_parts(x: Vector, table: Vec<Vector>, shadow_w: Option<Vec<Vector>>) -> Self {
        let a_bar = mean_of(&table);
        Self {
            x,
            table,
            a_bar,
            shadow_w,
        }
    }

    pub fn sq_error(&self, x_star: &Vector) -> f64 {
        sq_dist(&self.x, x_star)
    }

    /// Exact mean of the stored table.
    pub fn table_mean(&self) -> Vector {
        mean_of(&self.table)
    }

    /// Discards accumulated running-mean rounding.
    pub fn recompute_mean(&mut self) {
        self.a_bar = self.table_mean();
    }

    /// `||x - x*||^2 + gamma*mu * sum_i ||w_i - x*||^2`; needs the shadow
    /// points.
    pub fn lyapunov(&self, x_star: &Vector, gamma: f64, mu: f64) -> Result<f64, AlgorithmError> {
        let shadow = self.shadow_w.as_ref().ok_or(AlgorithmError::ShadowNotTracked)?;
        let anchor_sum: f64 = shadow.iter().map(|w| sq_dist(w, x_star)).sum();
        Ok(self.sq_error(x_star) + gamma * mu * anchor_sum)
    }
}

fn mean_of(table: &[Vector]) -> Vector {
    let mut acc = Vector::zeros(table[0].len());
    for t in table {
        acc += t;
    }
    acc / table.len() as f64
}
