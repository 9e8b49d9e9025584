//! Certified sums and suprema of `coef · k^power · e^(−decay·k)` over integer labels.

use crate::numeric::CompensatedSum;

/// Explicit summation is abandoned past this many terms.
const MAX_EXPLICIT_TERMS: u64 = 50_000_000;

/// Envelope `coef · k^power · e^(−decay·k)`, meaningful for labels `k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub coef: f64,
    pub power: f64,
    pub decay: f64,
}

impl Envelope {
    pub fn new(coef: f64, power: f64, decay: f64) -> Self {
        Self { coef, power, decay }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(c, 0.0, 0.0)
    }

    pub fn eval(&self, k: f64) -> f64 {
        if self.coef == 0.0 {
            return 0.0;
        }
        (self.coef.ln() + self.power * k.ln() - self.decay * k).exp()
    }

    pub fn mul(self, o: Envelope) -> Envelope {
        Envelope::new(self.coef * o.coef, self.power + o.power, self.decay + o.decay)
    }

    pub fn powf(self, e: f64) -> Envelope {
        Envelope::new(self.coef.powf(e), self.power * e, self.decay * e)
    }

    pub fn scale(self, s: f64) -> Envelope {
        Envelope::new(self.coef * s, self.power, self.decay)
    }

    /// True when `Σ_{k≥k0}` diverges (as a lower envelope this certifies divergence).
    pub fn sum_diverges(&self) -> bool {
        self.coef > 0.0 && (self.decay < 0.0 || (self.decay == 0.0 && self.power >= -1.0))
    }

    /// True when the envelope is unbounded in `k`.
    pub fn unbounded(&self) -> bool {
        self.coef > 0.0 && (self.decay < 0.0 || (self.decay == 0.0 && self.power > 0.0))
    }

    /// Certified upper bound on `Σ_{k≥k0} f(k)`, or `None` if the series diverges
    /// or cannot be bounded within the explicit-term budget.
    pub fn sum_from(&self, k0: u64) -> Option<f64> {
        let k0 = k0.max(1);
        if self.coef == 0.0 {
            return Some(0.0);
        }
        if self.decay < 0.0 {
            return None;
        }
        if self.decay == 0.0 {
            if self.power >= -1.0 {
                return None;
            }
            // Σ_{k≥K} k^p ≤ K^p + ∫_K^∞ x^p dx
            let k = k0 as f64;
            let a = self.power;
            return Some(self.coef * (k.powf(a) + k.powf(a + 1.0) / (-a - 1.0)));
        }
        // ratio f(k+1)/f(k) = e^(−decay)·((k+1)/k)^power
        let q = (-self.decay).exp();
        let target = q + 0.02 * (1.0 - q);
        let ratio = |k: f64| q * ((k + 1.0) / k).powf(self.power.max(0.0));
        let mut k_cut = k0;
        if self.power > 0.0 {
            // smallest K with ratio(K) ≤ target
            let needed = 1.0 / ((target / q).powf(1.0 / self.power) - 1.0);
            k_cut = k_cut.max(needed.ceil() as u64);
        }
        if k_cut - k0 > MAX_EXPLICIT_TERMS {
            return None;
        }
        let mut s = CompensatedSum::new();
        for k in k0..k_cut {
            s.add(self.eval(k as f64));
        }
        let r = ratio(k_cut as f64);
        debug_assert!(r < 1.0);
        s.add(self.eval(k_cut as f64) / (1.0 - r));
        Some(s.value())
    }

    /// Upper bound on `sup_{k≥k0} f(k)`, `None` if unbounded.
    pub fn sup_from(&self, k0: u64) -> Option<f64> {
        let k0 = k0.max(1) as f64;
        if self.coef == 0.0 {
            return Some(0.0);
        }
        if self.decay < 0.0 {
            return None;
        }
        if self.power <= 0.0 {
            return Some(self.eval(k0));
        }
        if self.decay == 0.0 {
            return None;
        }
        let peak = self.power / self.decay;
        Some(self.eval(peak.max(k0)))
    }

    /// Human-readable form used in divergence certificates.
    pub fn describe(&self) -> String {
        if self.decay == 0.0 {
            format!("{:.6e}·k^{:.4}", self.coef, self.power)
        } else {
            format!("{:.6e}·k^{:.4}·exp(−{:.4}·k)", self.coef, self.power, self.decay)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(e: &Envelope, k0: u64, k1: u64) -> f64 {
        (k0..k1).map(|k| e.eval(k as f64)).sum()
    }

    #[test]
    fn geometric_sum_is_upper_bound() {
        let e = Envelope::new(2.0, 3.0, 0.5);
        let bound = e.sum_from(1).unwrap();
        let direct = brute(&e, 1, 2000);
        assert!(bound >= direct);
        assert!(bound < direct * 1.01);
    }

    #[test]
    fn pure_exponential_sum_is_exact() {
        let e = Envelope::new(1.0, 0.0, 1.0);
        let exact = (-1.0f64).exp() / (1.0 - (-1.0f64).exp());
        assert!((e.sum_from(1).unwrap() - exact).abs() < 1e-14);
    }

    #[test]
    fn p_series_bound() {
        let e = Envelope::new(1.0, -2.0, 0.0);
        let b = e.sum_from(1).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 6.0;
        assert!(b >= exact && b <= 2.0 + 1e-12);
        let b10 = e.sum_from(10).unwrap();
        assert!(b10 >= brute(&e, 10, 1_000_000));
    }

    #[test]
    fn harmonic_diverges() {
        let e = Envelope::new(1.0, -1.0, 0.0);
        assert!(e.sum_from(1).is_none());
        assert!(e.sum_diverges());
        assert!(!e.unbounded());
    }

    #[test]
    fn sup_at_interior_peak() {
        let e = Envelope::new(1.0, 2.0, 0.5);
        let s = e.sup_from(1).unwrap();
        let direct = (1..100).map(|k| e.eval(k as f64)).fold(0.0f64, f64::max);
        assert!(s >= direct);
        assert!((s - e.eval(4.0)).abs() < 1e-12);
    }

    #[test]
    fn growth_is_unbounded() {
        assert!(Envelope::new(1.0, 0.5, 0.0).sup_from(1).is_none());
        assert!(Envelope::new(1.0, 0.5, 0.0).unbounded());
    }
}
