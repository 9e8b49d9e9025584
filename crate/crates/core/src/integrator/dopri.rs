//! Dormand–Prince 5(4) with local extrapolation and max-norm error control.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: u64 = 5_000_000;

/// Step counters accumulated over an integration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stats {
    pub steps: u64,
    pub rejected: u64,
    /// Largest accepted local error estimate (max norm, unscaled).
    pub max_error: f64,
}

impl Stats {
    pub fn merge(&mut self, o: &Stats) {
        self.steps += o.steps;
        self.rejected += o.rejected;
        self.max_error = self.max_error.max(o.max_error);
    }
}

/// An integrator positioned at `s` with state `y`; successive `advance_to`
/// calls continue with the last accepted step size.
pub struct Stepper<F, P> {
    f: F,
    post: P,
    pub s: f64,
    pub y: Vec<f64>,
    rtol: f64,
    atol: f64,
    h: f64,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    ynew: Vec<f64>,
    pub stats: Stats,
}

impl<F, P> Stepper<F, P>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(&mut [f64]),
{
    /// `post` renormalizes the state after each accepted step.
    pub fn new(f: F, post: P, s0: f64, y0: Vec<f64>, rtol: f64, atol: f64) -> Result<Self> {
        if !(rtol > 0.0 && atol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        let d = y0.len();
        Ok(Self {
            f,
            post,
            s: s0,
            y: y0,
            rtol,
            atol,
            h: 0.0,
            k: std::array::from_fn(|_| vec![0.0; d]),
            tmp: vec![0.0; d],
            ynew: vec![0.0; d],
            stats: Stats::default(),
        })
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.atol + self.rtol * a.abs().max(b.abs())
    }

    /// Initial step from the size of `y` and `f(y)`.
    fn initial_step(&mut self, dir: f64) -> f64 {
        (self.f)(self.s, &self.y, &mut self.k[0]);
        let mut d0 = 0.0f64;
        let mut d1 = 0.0f64;
        for i in 0..self.y.len() {
            let sc = self.scale(self.y[i], self.y[i]);
            d0 = d0.max((self.y[i] / sc).abs());
            d1 = d1.max((self.k[0][i] / sc).abs());
        }
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        for i in 0..self.y.len() {
            self.tmp[i] = self.y[i] + dir * h0 * self.k[0][i];
        }
        (self.f)(self.s + dir * h0, &self.tmp, &mut self.k[1]);
        let mut d2 = 0.0f64;
        for i in 0..self.y.len() {
            let sc = self.scale(self.y[i], self.y[i]);
            d2 = d2.max(((self.k[1][i] - self.k[0][i]) / sc).abs() / h0);
        }
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1)
    }

    /// Integrates up to `target` exactly.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        let span = target - self.s;
        if span == 0.0 || self.y.is_empty() {
            self.s = target;
            return Ok(());
        }
        let dir = span.signum();
        if self.h == 0.0 || self.h.signum() != dir {
            self.h = dir * self.initial_step(dir).min(span.abs());
        }
        let d = self.y.len();
        let mut steps = 0u64;
        while (target - self.s) * dir > 0.0 {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::StepUnderflow { at: self.s, step: self.h });
            }
            let remaining = target - self.s;
            let last = self.h.abs() >= remaining.abs();
            let h = if last { remaining } else { self.h };
            if h.abs() <= 16.0 * f64::EPSILON * self.s.abs().max(1.0) && !last {
                return Err(Error::StepUnderflow { at: self.s, step: h });
            }
            (self.f)(self.s, &self.y, &mut self.k[0]);
            for st in 1..7 {
                for i in 0..d {
                    let mut acc = self.y[i];
                    for (j, a) in A[st].iter().enumerate().take(st) {
                        acc += h * a * self.k[j][i];
                    }
                    self.tmp[i] = acc;
                }
                (self.f)(self.s + C[st] * h, &self.tmp, &mut self.k[st]);
            }
            self.ynew.copy_from_slice(&self.tmp);
            let mut err = 0.0f64;
            let mut raw = 0.0f64;
            for i in 0..d {
                let mut e = 0.0;
                for (j, ej) in E.iter().enumerate() {
                    e += ej * self.k[j][i];
                }
                let e = (h * e).abs();
                raw = raw.max(e);
                err = err.max(e / self.scale(self.y[i], self.ynew[i]));
            }
            if !err.is_finite() {
                self.h = h * 0.1;
                self.stats.rejected += 1;
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                self.s = if last { target } else { self.s + h };
                std::mem::swap(&mut self.y, &mut self.ynew);
                (self.post)(&mut self.y);
                self.stats.steps += 1;
                self.stats.max_error = self.stats.max_error.max(raw);
                if !last {
                    self.h = h * factor;
                }
            } else {
                self.stats.rejected += 1;
                self.h = h * factor.min(1.0);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut st = Stepper::new(|_, y: &[f64], dy: &mut [f64]| dy[0] = -y[0], |_: &mut [f64]| {}, 0.0, vec![1.0], 1e-12, 1e-12)
            .unwrap();
        st.advance_to(2.0).unwrap();
        assert!((st.y[0] - (-2.0f64).exp()).abs() < 1e-11);
        st.advance_to(0.0).unwrap();
        assert!((st.y[0] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_order() {
        let run = |tol: f64| {
            let mut st = Stepper::new(
                |_, y: &[f64], dy: &mut [f64]| {
                    dy[0] = y[1];
                    dy[1] = -y[0];
                },
                |_: &mut [f64]| {},
                0.0,
                vec![1.0, 0.0],
                tol,
                tol,
            )
            .unwrap();
            st.advance_to(10.0).unwrap();
            (st.y[0] - 10f64.cos()).abs()
        };
        let coarse = run(1e-6);
        let fine = run(1e-9);
        assert!(coarse < 1e-4 && fine < 1e-7 && fine < coarse);
    }
}
