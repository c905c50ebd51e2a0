use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }
}

/// One bias-corrected ADAM update. Non-finite gradients abort the step
/// before anything is modified.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<()> {
    if params.len() != grads.len() || state.m.len() != params.len() || state.v.len() != params.len() {
        return Err(Error::Shape("optimizer buffers do not match parameters".into()));
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!("gradient component {i}")));
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for (((p, g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = beta1 * *m + (1.0 - beta1) * g;
        *v = beta2 * *v + (1.0 - beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= learning_rate * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = vec![1.0];
        let mut s = AdamState::new(1);
        adam_step(&mut p, &[1.0], &mut s, 0.001, B1, B2, EPS).unwrap();
        assert!((p[0] - (1.0 - 0.001 / (1.0 + EPS))).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = vec![0.5, -2.0];
        let mut s = AdamState::new(2);
        for _ in 0..3 {
            adam_step(&mut p, &[0.0, 0.0], &mut s, 0.01, B1, B2, EPS).unwrap();
        }
        assert_eq!(p, vec![0.5, -2.0]);
    }

    #[test]
    fn two_constant_steps() {
        // With constant g, m_hat = g and v_hat = g^2 at every step, so each
        // step subtracts lr * g / (|g| + eps).
        let g = 0.5;
        let mut p = vec![0.0];
        let mut s = AdamState::new(1);
        adam_step(&mut p, &[g], &mut s, 0.01, B1, B2, EPS).unwrap();
        adam_step(&mut p, &[g], &mut s, 0.01, B1, B2, EPS).unwrap();
        let expected = -2.0 * 0.01 * g / (g + EPS);
        assert!((p[0] - expected).abs() < 1e-15, "{} vs {expected}", p[0]);
        // hand-iterated moments
        assert!((s.m[0] - (0.1 * 0.9 * g + 0.1 * g)).abs() < 1e-15);
        assert!((s.v[0] - (0.001 * 0.999 * g * g + 0.001 * g * g)).abs() < 1e-15);
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut p = vec![1.0, 1.0];
        let mut s = AdamState::new(2);
        assert!(adam_step(&mut p, &[0.1, f64::NAN], &mut s, 0.01, B1, B2, EPS).is_err());
        assert_eq!(p, vec![1.0, 1.0]);
        assert_eq!(s.t, 0);
    }
}
