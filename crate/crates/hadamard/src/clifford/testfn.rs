//! A small family of test functions in `C_0(R)` with computable
//! oscillation and odd-mean functionals.
//!
//! The `r`-oscillation and odd mean of a function `f` are
//!
//! ```text
//! Omega_r f = sup { |f(t) - f(t')| : |t - t'| <= r }
//! Theta_r f = r * sup { |f(t) - f(-t)| / (2t) : t >= r }
//! ```
//!
//! Both satisfy `Omega_r f <= 2 ||f||` and `Theta_r f <= ||f||`, tend to 0
//! as `r -> 0`, and transform exactly under the rescaling action
//! `(sigma_s f)(t) = f(t / s)`:
//! `Omega_r(sigma_s f) = Omega_{r/s} f` and likewise for `Theta`.
//!
//! Family members evaluate these functionals through their normalized
//! shape, so the rescaling identities hold to the last bit for unit-scale
//! members. The hat shapes have closed forms; the Gaussian shapes use a
//! deterministic scan-and-refine maximizer accurate to well below `1e-10`.
//! Grid-backed functions and products fall back to a dense grid
//! (step [`tol::GRID_STEP`], half-width [`tol::GRID_HALF_WIDTH`], in units
//! of the natural scale) with documented error [`tol::GRID_FUNCTIONAL`].

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::tol;

/// Parity of a function under `t -> -t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// Sampled values on a uniform grid, extended by linear interpolation and
/// by zero outside the sampled range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

/// A bounded continuous function on `R` vanishing at infinity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum TestFunction {
    /// `exp(-(t/s)^2)`, even, peak 1.
    Gaussian { scale: f64 },
    /// `(t/s) exp(-(t/s)^2)`, odd.
    GaussianTimesT { scale: f64 },
    /// Peak 1 at 0, linear down to 0 at `|t| = s`, even.
    Hat { scale: f64 },
    /// `t/s` on `[-s, s]`, tapering linearly to 0 by `|t| = 2s`, odd.
    OddHat { scale: f64 },
    /// Explicitly sampled values.
    CustomGrid(GridFunction),
    /// Pointwise product of two members; sup functionals use the grid
    /// fallback.
    Product {
        left: Box<TestFunction>,
        right: Box<TestFunction>,
    },
}

impl TestFunction {
    pub fn gaussian(scale: f64) -> Self {
        assert!(scale > 0.0);
        TestFunction::Gaussian { scale }
    }

    pub fn gaussian_times_t(scale: f64) -> Self {
        assert!(scale > 0.0);
        TestFunction::GaussianTimesT { scale }
    }

    pub fn hat(scale: f64) -> Self {
        assert!(scale > 0.0);
        TestFunction::Hat { scale }
    }

    pub fn odd_hat(scale: f64) -> Self {
        assert!(scale > 0.0);
        TestFunction::OddHat { scale }
    }

    pub fn product(left: TestFunction, right: TestFunction) -> Self {
        TestFunction::Product {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// The canonical unit-scale members, one per family.
    pub fn family() -> Vec<TestFunction> {
        vec![
            TestFunction::gaussian(1.0),
            TestFunction::hat(1.0),
            TestFunction::odd_hat(1.0),
            TestFunction::gaussian_times_t(1.0),
        ]
    }

    /// Pointwise evaluation.
    pub fn value(&self, t: f64) -> f64 {
        match self {
            TestFunction::Gaussian { scale } => {
                let u = t / scale;
                (-u * u).exp()
            }
            TestFunction::GaussianTimesT { scale } => {
                let u = t / scale;
                u * (-u * u).exp()
            }
            TestFunction::Hat { scale } => {
                let u = (t / scale).abs();
                (1.0 - u).max(0.0)
            }
            TestFunction::OddHat { scale } => {
                let u = t / scale;
                let a = u.abs();
                if a <= 1.0 {
                    u
                } else if a <= 2.0 {
                    u.signum() * (2.0 - a)
                } else {
                    0.0
                }
            }
            TestFunction::CustomGrid(g) => g.value(t),
            TestFunction::Product { left, right } => left.value(t) * right.value(t),
        }
    }

    /// Even part `(f(t) + f(-t)) / 2` at `t`.
    pub fn even_value(&self, t: f64) -> f64 {
        0.5 * (self.value(t) + self.value(-t))
    }

    /// Odd part `(f(t) - f(-t)) / 2` at `t`.
    pub fn odd_value(&self, t: f64) -> f64 {
        0.5 * (self.value(t) - self.value(-t))
    }

    pub fn parity(&self) -> Parity {
        match self {
            TestFunction::Gaussian { .. } | TestFunction::Hat { .. } => Parity::Even,
            TestFunction::GaussianTimesT { .. } | TestFunction::OddHat { .. } => Parity::Odd,
            TestFunction::CustomGrid(_) => Parity::Mixed,
            TestFunction::Product { left, right } => match (left.parity(), right.parity()) {
                (Parity::Even, Parity::Even) | (Parity::Odd, Parity::Odd) => Parity::Even,
                (Parity::Even, Parity::Odd) | (Parity::Odd, Parity::Even) => Parity::Odd,
                _ => Parity::Mixed,
            },
        }
    }

    /// Sup norm; exact for family members, grid-accurate otherwise.
    pub fn sup_norm(&self) -> f64 {
        match self {
            TestFunction::Gaussian { .. } | TestFunction::Hat { .. } | TestFunction::OddHat { .. } => 1.0,
            TestFunction::GaussianTimesT { .. } => (0.5_f64).sqrt() * (-0.5_f64).exp(),
            TestFunction::CustomGrid(g) => g.values.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            TestFunction::Product { .. } => {
                let (vals, _) = self.grid_samples();
                vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
            }
        }
    }

    /// The length unit of the function: the scale parameter for family
    /// members, the grid unit otherwise.
    pub fn natural_scale(&self) -> f64 {
        match self {
            TestFunction::Gaussian { scale }
            | TestFunction::GaussianTimesT { scale }
            | TestFunction::Hat { scale }
            | TestFunction::OddHat { scale } => *scale,
            TestFunction::CustomGrid(_) => 1.0,
            TestFunction::Product { left, right } => {
                left.natural_scale().min(right.natural_scale())
            }
        }
    }

    /// The rescaling `(sigma_s f)(t) = f(t / s)`.
    pub fn rescale(&self, s: f64) -> Result<TestFunction> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::usage(format!("rescale factor must be positive, got {s}")));
        }
        Ok(match self {
            TestFunction::Gaussian { scale } => TestFunction::Gaussian { scale: scale * s },
            TestFunction::GaussianTimesT { scale } => {
                TestFunction::GaussianTimesT { scale: scale * s }
            }
            TestFunction::Hat { scale } => TestFunction::Hat { scale: scale * s },
            TestFunction::OddHat { scale } => TestFunction::OddHat { scale: scale * s },
            TestFunction::CustomGrid(g) => TestFunction::CustomGrid(GridFunction {
                start: g.start * s,
                step: g.step * s,
                values: g.values.clone(),
            }),
            TestFunction::Product { left, right } => TestFunction::Product {
                left: Box::new(left.rescale(s)?),
                right: Box::new(right.rescale(s)?),
            },
        })
    }

    /// The `r`-oscillation `Omega_r f`.
    pub fn oscillation(&self, r: f64) -> Result<f64> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::usage(format!("oscillation radius must be >= 0, got {r}")));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            TestFunction::Hat { scale } => (r / scale).min(1.0),
            TestFunction::OddHat { scale } => (r / scale).min(2.0),
            TestFunction::Gaussian { scale } => {
                smooth_shape_oscillation(|u| (-u * u).exp(), &[0.0], 8.0, r / scale)
            }
            TestFunction::GaussianTimesT { scale } => {
                let e = (0.5_f64).sqrt();
                smooth_shape_oscillation(|u| u * (-u * u).exp(), &[-e, e], 8.0, r / scale)
            }
            TestFunction::CustomGrid(g) => {
                let k = window_len(r, g.step);
                sliding_oscillation(&g.values, k)
            }
            TestFunction::Product { .. } => {
                let (vals, step) = self.grid_samples();
                sliding_oscillation(&vals, window_len(r, step))
            }
        })
    }

    /// The odd mean functional `Theta_r f`, defined for `r > 0`.
    pub fn mean_functional(&self, r: f64) -> Result<f64> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::usage(format!("mean functional needs r > 0, got {r}")));
        }
        if self.parity() == Parity::Even {
            return Ok(0.0);
        }
        Ok(match self {
            TestFunction::GaussianTimesT { scale } => {
                let u = r / scale;
                u * (-u * u).exp()
            }
            TestFunction::OddHat { scale } => {
                let u = r / scale;
                if u <= 1.0 {
                    u
                } else if u <= 2.0 {
                    2.0 - u
                } else {
                    0.0
                }
            }
            _ => {
                // Grid scan of |f(t) - f(-t)| / (2t) over t >= r.
                let ns = self.natural_scale();
                let hi = tol::GRID_HALF_WIDTH * ns;
                let step = tol::GRID_STEP * ns;
                let mut sup: f64 = 0.0;
                let mut t = r;
                while t <= hi {
                    sup = sup.max((self.value(t) - self.value(-t)).abs() / (2.0 * t));
                    t += step;
                }
                r * sup
            }
        })
    }

    /// Dense samples on the documented grid, in units of the natural scale.
    fn grid_samples(&self) -> (Vec<f64>, f64) {
        let ns = self.natural_scale();
        let step = tol::GRID_STEP * ns;
        let half = tol::GRID_HALF_WIDTH * ns;
        let n = (2.0_f64 * half / step).round() as usize;
        let vals = (0..=n).map(|i| self.value(-half + i as f64 * step)).collect();
        (vals, step)
    }
}

impl GridFunction {
    pub fn value(&self, t: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let pos = (t - self.start) / self.step;
        if pos < 0.0 || pos > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return self.values[self.values.len() - 1];
        }
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

/// Window length in samples for the separation `r` on a grid of the given
/// step; a small guard keeps exact multiples of the step stable.
fn window_len(r: f64, step: f64) -> usize {
    ((r / step) * (1.0 + 1e-12) + 1e-9).floor() as usize
}

/// `max over windows of (window max - window min)` for windows of `k + 1`
/// consecutive samples, via monotone deques.
fn sliding_oscillation(values: &[f64], k: usize) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let k = k.min(values.len() - 1);
    let mut best = 0.0_f64;
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    for i in 0..values.len() {
        while maxq.front().is_some_and(|&j| i >= k + 1 && j + k + 1 <= i) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&j| i >= k + 1 && j + k + 1 <= i) {
            minq.pop_front();
        }
        while maxq.back().is_some_and(|&j| values[j] <= values[i]) {
            maxq.pop_back();
        }
        maxq.push_back(i);
        while minq.back().is_some_and(|&j| values[j] >= values[i]) {
            minq.pop_back();
        }
        minq.push_back(i);
        if i >= k {
            best = best.max(values[maxq[0]] - values[minq[0]]);
        }
    }
    best
}

/// Oscillation of a smooth shape: the optimum pair either sits at the full
/// separation `r` (maximize `|g(t + r) - g(t)|` by scan plus ternary
/// refinement) or consists of two interior extrema within distance `r`.
fn smooth_shape_oscillation(
    shape: impl Fn(f64) -> f64 + Copy,
    extrema: &[f64],
    bound: f64,
    r: f64,
) -> f64 {
    let lo = -bound - r;
    let hi = bound;
    let d = move |t: f64| (shape(t + r) - shape(t)).abs();
    const N: usize = 4000;
    let step = (hi - lo) / N as f64;
    let mut best = 0.0_f64;
    let mut best_t = lo;
    for i in 0..=N {
        let t = lo + i as f64 * step;
        let v = d(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let refined = ternary_max(d, best_t - step, best_t + step);
    let mut out = best.max(refined);
    for i in 0..extrema.len() {
        for j in (i + 1)..extrema.len() {
            if (extrema[i] - extrema[j]).abs() <= r {
                out = out.max((shape(extrema[i]) - shape(extrema[j])).abs());
            }
        }
    }
    out
}

fn ternary_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    f(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent dense-grid oracle for both functionals, step 1e-4 in
    /// absolute units over [-50, 50].
    fn grid_omega_oracle(f: &TestFunction, r: f64) -> f64 {
        let step = 1e-4;
        let half = 50.0;
        let n = (2.0_f64 * half / step).round() as usize;
        let vals: Vec<f64> = (0..=n).map(|i| f.value(-half + i as f64 * step)).collect();
        let k = ((r / step) + 0.5).floor() as usize;
        sliding_oscillation(&vals, k)
    }

    fn grid_theta_oracle(f: &TestFunction, r: f64) -> f64 {
        let step = 1e-4;
        let mut sup: f64 = 0.0;
        let mut t = r;
        while t <= 50.0 {
            sup = sup.max((f.value(t) - f.value(-t)).abs() / (2.0 * t));
            t += step;
        }
        r * sup
    }

    #[test]
    fn hat_oscillation_is_min_r_one() {
        let hat = TestFunction::hat(1.0);
        for r in [0.1, 0.5, 0.9, 1.0, 2.0, 10.0] {
            assert_eq!(hat.oscillation(r).unwrap(), r.min(1.0));
            let oracle = grid_omega_oracle(&hat, r);
            assert!((hat.oscillation(r).unwrap() - oracle).abs() <= 1e-6);
        }
        assert_eq!(hat.oscillation(0.0).unwrap(), 0.0);
    }

    #[test]
    fn odd_hat_mean_functional_closed_form() {
        let g = TestFunction::odd_hat(1.0);
        for r in [0.1, 0.4, 1.0] {
            assert!((g.mean_functional(r).unwrap() - r).abs() <= 1e-15);
        }
        assert!((g.mean_functional(1.5).unwrap() - 0.5).abs() <= 1e-12);
        assert_eq!(g.mean_functional(2.5).unwrap(), 0.0);
        for r in [0.2, 0.7, 1.3, 1.9] {
            let oracle = grid_theta_oracle(&g, r);
            assert!((g.mean_functional(r).unwrap() - oracle).abs() <= 1e-6);
        }
        assert!(g.mean_functional(0.0).is_err());
    }

    #[test]
    fn gaussian_functionals_match_grid_oracle() {
        let f = TestFunction::gaussian(1.0);
        for r in [0.001, 0.01, 0.1, 1.0, 3.0] {
            let mine = f.oscillation(r).unwrap();
            let oracle = grid_omega_oracle(&f, r);
            assert!(
                (mine - oracle).abs() <= 1e-6,
                "r = {r}: {mine} vs oracle {oracle}"
            );
        }
        assert_eq!(f.mean_functional(0.5).unwrap(), 0.0);

        let g = TestFunction::gaussian_times_t(1.0);
        for r in [0.01, 0.1, 1.0, 2.0] {
            let mine = g.oscillation(r).unwrap();
            let oracle = grid_omega_oracle(&g, r);
            assert!(
                (mine - oracle).abs() <= 1e-6,
                "r = {r}: {mine} vs oracle {oracle}"
            );
            let tm = g.mean_functional(r).unwrap();
            let to = grid_theta_oracle(&g, r);
            assert!((tm - to).abs() <= 1e-6, "r = {r}: {tm} vs {to}");
        }
    }

    #[test]
    fn rescaling_identities_are_exact_for_unit_scale_members() {
        for f in TestFunction::family() {
            for s in [2.0, 10.0, 100.0] {
                let fs = f.rescale(s).unwrap();
                for r in [0.01, 0.1, 1.0, 5.0] {
                    let lhs = fs.oscillation(r).unwrap();
                    let rhs = f.oscillation(r / s).unwrap();
                    assert_eq!(lhs.to_bits(), rhs.to_bits(), "Omega mismatch");
                    let lhs = fs.mean_functional(r).unwrap();
                    let rhs = f.mean_functional(r / s).unwrap();
                    assert_eq!(lhs.to_bits(), rhs.to_bits(), "Theta mismatch");
                }
                assert_eq!(fs.sup_norm(), f.sup_norm());
            }
            // s = 1 is the identity.
            assert_eq!(f.rescale(1.0).unwrap(), f);
        }
        assert!(TestFunction::gaussian(1.0).rescale(0.0).is_err());
        assert!(TestFunction::gaussian(1.0).rescale(-2.0).is_err());
    }

    #[test]
    fn rescaled_hat_example() {
        // Omega_1(sigma_2 hat) = Omega_{1/2}(hat) = 1/2.
        let hat = TestFunction::hat(1.0);
        let s2 = hat.rescale(2.0).unwrap();
        assert_eq!(s2.oscillation(1.0).unwrap(), 0.5);
        let oracle = grid_omega_oracle(&s2, 1.0);
        assert!((0.5 - oracle).abs() <= 1e-6);
    }

    #[test]
    fn functionals_decay_as_r_shrinks() {
        for f in TestFunction::family() {
            let rs = [1.0, 0.1, 0.01, 0.001];
            let omegas: Vec<f64> = rs.iter().map(|&r| f.oscillation(r).unwrap()).collect();
            let thetas: Vec<f64> = rs.iter().map(|&r| f.mean_functional(r).unwrap()).collect();
            for w in omegas.windows(2) {
                assert!(w[1] <= w[0] + 1e-12);
            }
            assert!(omegas[3] <= 2e-3, "Omega_0.001 = {}", omegas[3]);
            assert!(thetas[3] <= 1e-3 + 1e-12, "Theta_0.001 = {}", thetas[3]);
            // Bounds against the sup norm.
            for (&r, &o) in rs.iter().zip(&omegas) {
                let _ = r;
                assert!(o <= 2.0 * f.sup_norm() + 1e-12);
            }
            for &t in &thetas {
                assert!(t <= f.sup_norm() + 1e-12);
            }
        }
    }

    #[test]
    fn products_fall_back_to_the_documented_grid() {
        let p = TestFunction::product(TestFunction::gaussian(1.0), TestFunction::odd_hat(1.0));
        assert_eq!(p.parity(), Parity::Odd);
        for r in [0.1, 0.5, 1.0] {
            let mine = p.oscillation(r).unwrap();
            let oracle = grid_omega_oracle(&p, r);
            assert!((mine - oracle).abs() <= 1e-6, "r = {r}: {mine} vs {oracle}");
        }
        // Pointwise evaluation multiplies the factors exactly.
        let a = TestFunction::gaussian(1.0);
        let b = TestFunction::odd_hat(1.0);
        for t in [-1.3, -0.2, 0.0, 0.37, 1.9] {
            assert_eq!(p.value(t), a.value(t) * b.value(t));
        }
    }

    #[test]
    fn custom_grid_round_trip_and_functionals() {
        // Sample the hat on a coarse grid; functionals follow the samples.
        let step = 1e-3;
        let n = 4000;
        let values: Vec<f64> = (0..=n)
            .map(|i| {
                let t: f64 = -2.0 + i as f64 * step;
                (1.0 - t.abs()).max(0.0)
            })
            .collect();
        let g = TestFunction::CustomGrid(GridFunction {
            start: -2.0,
            step,
            values,
        });
        assert!((g.value(0.0) - 1.0).abs() <= 1e-12);
        assert!((g.oscillation(0.5).unwrap() - 0.5).abs() <= 2e-3);
        let json = serde_json::to_string(&g).unwrap();
        assert!(json.contains("custom-grid"));
        let back: TestFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn family_serialization_tags() {
        let f = TestFunction::gaussian_times_t(2.0);
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.contains("gaussian-times-t"), "{json}");
        let back: TestFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
    }
}
