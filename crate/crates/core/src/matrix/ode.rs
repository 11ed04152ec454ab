use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::Matrix;
use crate::{Error, Result};

/// A square linear map applied as `y = M x`.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// Overwrites `y` with `M x`. Both slices have length [`dim`](Self::dim).
    fn apply_into(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for Matrix {
    fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.rows) {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Sampled solution of a linear ODE.
///
/// States are stored agent-major: with `agent_dim = n`, agent `i` occupies
/// entries `i·n .. (i+1)·n` of every snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub agent_dim: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn agents(&self) -> usize {
        self.states.first().map_or(0, |s| s.len() / self.agent_dim)
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// State of `agent` in snapshot `k`.
    pub fn agent_state(&self, k: usize, agent: usize) -> &[f64] {
        &self.states[k][agent * self.agent_dim..(agent + 1) * self.agent_dim]
    }
}

/// Classical RK4 on `ẋ = M x`, sampling every step.
pub fn integrate_linear<M: LinearOperator + ?Sized>(
    m: &M,
    x0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    integrate_linear_strided(m, x0, t_end, dt, 1)
}

/// Classical RK4 on `ẋ = M x`, recording `t = 0`, every `stride`-th step and `t_end`.
///
/// Steps land on `k·dt`; when `t_end` is not a multiple of `dt` the final step
/// is shortened to finish exactly at `t_end`.
pub fn integrate_linear_strided<M: LinearOperator + ?Sized>(
    m: &M,
    x0: &[f64],
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    let n = m.dim();
    if x0.len() != n {
        return Err(Error::Dimension {
            op: "integrate_linear",
            detail: format!(
                "initial state has {} entries, operator is {n}x{n}",
                x0.len()
            ),
        });
    }
    if !(dt > 0.0 && dt.is_finite() && t_end.is_finite() && dt <= t_end) {
        return Err(Error::Domain(format!(
            "need 0 < dt <= t_end, got dt = {dt}, t_end = {t_end}"
        )));
    }
    if stride == 0 {
        return Err(Error::Domain("output stride must be at least 1".into()));
    }

    let steps = step_count(t_end, dt);
    let time_at = |k: usize| if k == steps { t_end } else { k as f64 * dt };

    let capacity = steps / stride + 2;
    let mut times = Vec::with_capacity(capacity);
    let mut states = Vec::with_capacity(capacity);
    times.push(0.0);
    states.push(x0.to_vec());

    let mut x = x0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    for k in 1..=steps {
        let h = time_at(k) - time_at(k - 1);
        m.apply_into(&x, &mut k1);
        axpy_into(&x, 0.5 * h, &k1, &mut tmp);
        m.apply_into(&tmp, &mut k2);
        axpy_into(&x, 0.5 * h, &k2, &mut tmp);
        m.apply_into(&tmp, &mut k3);
        axpy_into(&x, h, &k3, &mut tmp);
        m.apply_into(&tmp, &mut k4);
        let w = h / 6.0;
        for i in 0..n {
            x[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                step: k,
                time: time_at(k),
            });
        }
        if k % stride == 0 || k == steps {
            times.push(time_at(k));
            states.push(x.clone());
        }
    }
    Ok(Trajectory {
        times,
        states,
        agent_dim: n,
    })
}

/// Number of RK4 steps covering `[0, t_end]`, tolerant of round-off in `t_end / dt`.
pub(crate) fn step_count(t_end: f64, dt: f64) -> usize {
    let ratio = t_end / dt;
    let nearest = libm::round(ratio);
    if libm::fabs(ratio - nearest) <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        libm::ceil(ratio) as usize
    }
}

fn axpy_into(x: &[f64], a: f64, y: &[f64], out: &mut [f64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}
