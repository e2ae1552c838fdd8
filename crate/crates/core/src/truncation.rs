//! Smooth saturations of `v²`, `v` and `v³/3` used by the truncated system.
//!
//! With level `M ≥ 1` the family is
//!
//! * `f(v) = v²` for `|v| ≤ M`, `f(v) = |v|` for `|v| ≥ M² + 1`, blended in
//!   between with the quintic smoothstep `s(t) = t³(10 − 15t + 6t²)`;
//! * `g(v) = v` for `|v| ≤ M`, `g(v) = ±3M/2` for `|v| ≥ 2M`, with
//!   `g'(v) = 1 − s((|v| − M)/M)` on the ramp;
//! * `F(v) = ∫₀^v f`, evaluated from closed-form polynomial antiderivatives.
//!
//! The blends are C², which is all the Newton iteration needs. Inside
//! `|v| ≤ M` every function takes an explicit branch that performs the same
//! floating-point operations as [`Truncation::Off`], so a run whose long
//! wave stays below `M` is bitwise identical to the untruncated run.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Truncation {
    /// `f(v) = v²`, `g(v) = v`, `F(v) = v³/3`.
    #[default]
    Off,
    Active { level: f64 },
}

#[inline]
fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

#[inline]
fn smoothstep_prime(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    let u = t * (1.0 - t);
    30.0 * u * u
}

// ∫₀^t (1 − s(r)) dr
#[inline]
fn ramp_integral(t: f64) -> f64 {
    t - t * t * t * t * (2.5 + t * (-3.0 + t))
}

/// Coefficients `c[k]` of the polynomial `s(τ)·p(τ)`, where `p` is the
/// quadratic `p0 + p1 τ + p2 τ²`.
fn smoothstep_times_quadratic(p: [f64; 3]) -> [f64; 8] {
    const S: [f64; 6] = [0.0, 0.0, 0.0, 10.0, -15.0, 6.0];
    let mut c = [0.0; 8];
    for (i, si) in S.iter().enumerate() {
        for (k, pk) in p.iter().enumerate() {
            c[i + k] += si * pk;
        }
    }
    c
}

fn integrate_poly(c: &[f64; 8], t: f64) -> f64 {
    // Σ c_k t^{k+1}/(k+1), Horner from the top
    c.iter()
        .enumerate()
        .rev()
        .fold(0.0, |acc, (k, ck)| acc * t + ck / (k as f64 + 1.0))
        * t
}

impl Truncation {
    pub fn active(level: f64) -> Result<Self> {
        if !(level.is_finite() && level >= 1.0) {
            return Err(Error::invalid("M", format!("truncation level must be finite and >= 1, got {level}")));
        }
        Ok(Truncation::Active { level })
    }

    pub fn level(&self) -> Option<f64> {
        match *self {
            Truncation::Off => None,
            Truncation::Active { level } => Some(level),
        }
    }

    /// Coarse bound on `sup |f'|` for the active family, `2(M² + 1) + 1`.
    pub fn f_prime_bound(&self) -> Option<f64> {
        self.level().map(|m| 2.0 * (m * m + 1.0) + 1.0)
    }

    pub fn f(&self, v: f64) -> f64 {
        match *self {
            Truncation::Off => v * v,
            Truncation::Active { level: m } => {
                let a = v.abs();
                if a <= m {
                    v * v
                } else if a >= m * m + 1.0 {
                    a
                } else {
                    let theta = smoothstep((a - m) / (m * m + 1.0 - m));
                    (1.0 - theta) * v * v + theta * a
                }
            }
        }
    }

    pub fn f_prime(&self, v: f64) -> f64 {
        match *self {
            Truncation::Off => 2.0 * v,
            Truncation::Active { level: m } => {
                let a = v.abs();
                if a <= m {
                    2.0 * v
                } else if a >= m * m + 1.0 {
                    v.signum()
                } else {
                    let w = m * m + 1.0 - m;
                    let t = (a - m) / w;
                    let theta = smoothstep(t);
                    let dtheta = smoothstep_prime(t) / w;
                    v.signum() * ((1.0 - theta) * 2.0 * a + theta - dtheta * (a * a - a))
                }
            }
        }
    }

    pub fn g(&self, v: f64) -> f64 {
        match *self {
            Truncation::Off => v,
            Truncation::Active { level: m } => {
                let a = v.abs();
                if a <= m {
                    v
                } else if a >= 2.0 * m {
                    v.signum() * 1.5 * m
                } else {
                    v.signum() * (m + m * ramp_integral((a - m) / m))
                }
            }
        }
    }

    pub fn g_prime(&self, v: f64) -> f64 {
        match *self {
            Truncation::Off => 1.0,
            Truncation::Active { level: m } => {
                let a = v.abs();
                if a <= m {
                    1.0
                } else if a >= 2.0 * m {
                    0.0
                } else {
                    1.0 - smoothstep((a - m) / m)
                }
            }
        }
    }

    /// Needed by the Newton Jacobian of the `g'(v)|u|²` forcing. Continuous,
    /// since `s'` vanishes at both ends of the ramp.
    pub fn g_second(&self, v: f64) -> f64 {
        match *self {
            Truncation::Off => 0.0,
            Truncation::Active { level: m } => {
                let a = v.abs();
                if a <= m || a >= 2.0 * m {
                    0.0
                } else {
                    -v.signum() * smoothstep_prime((a - m) / m) / m
                }
            }
        }
    }

    /// `F(v) = ∫₀^v f(s) ds`.
    pub fn f_integral(&self, v: f64) -> f64 {
        match *self {
            Truncation::Off => v * v * v / 3.0,
            Truncation::Active { level: m } => {
                let a = v.abs();
                if a <= m {
                    return v * v * v / 3.0;
                }
                let top = m * m + 1.0;
                let w = top - m;
                // ∫_M^a θ(s)(s − s²) ds with s = M + wτ
                let blend = |t: f64| {
                    let p = [m - m * m, w - 2.0 * m * w, -w * w];
                    w * integrate_poly(&smoothstep_times_quadratic(p), t)
                };
                let value = if a < top {
                    a * a * a / 3.0 + blend((a - m) / w)
                } else {
                    top * top * top / 3.0 + blend(1.0) + 0.5 * (a * a - top * top)
                };
                v.signum() * value
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fam(m: f64) -> Truncation {
        Truncation::active(m).unwrap()
    }

    // Adaptive Simpson; independent of the closed-form antiderivative.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
            let m = 0.5 * (a + b);
            let fm = f(m);
            (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
        }
        #[allow(clippy::too_many_arguments)]
        fn recurse(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            fa: f64,
            b: f64,
            fb: f64,
            m: f64,
            fm: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let (lm, flm, left) = simpson(f, a, fa, m, fm);
            let (rm, frm, right) = simpson(f, m, fm, b, fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                return left + right + delta / 15.0;
            }
            recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
        }
        let (fa, fb) = (f(a), f(b));
        let (m, fm, whole) = simpson(f, a, fa, b, fb);
        recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
    }

    #[test]
    fn level_must_exceed_one() {
        assert!(Truncation::active(0.99).is_err());
        assert!(Truncation::active(1.0).is_ok());
        assert!(Truncation::active(f64::INFINITY).is_err());
        assert!(Truncation::active(1.5).is_ok());
    }

    #[test]
    fn f_examples() {
        let t = fam(2.0);
        assert_eq!(t.f(1.5), 2.25);
        assert_eq!(t.f(6.0), 6.0);
        assert_eq!(t.f(-6.0), 6.0);
        assert!((t.f(3.5) - 7.875).abs() <= 1e-14);
    }

    #[test]
    fn smoothstep_antiderivative_plateau() {
        assert!((ramp_integral(1.0) - 0.5).abs() < 1e-15);
        assert_eq!(ramp_integral(0.0), 0.0);
    }

    #[test]
    fn g_examples() {
        let t = fam(2.0);
        assert_eq!(t.g(1.0), 1.0);
        assert_eq!(t.g(5.0), 3.0);
        assert_eq!(t.g(-5.0), -3.0);
        assert!((t.g(4.0) - 3.0).abs() < 1e-14, "ramp reaches the plateau continuously");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let v: f64 = rng.random_range(-10.0..10.0);
            assert_eq!(t.g(-v), -t.g(v));
        }
    }

    #[test]
    fn g_prime_examples() {
        let t = fam(2.5);
        assert_eq!(t.g_prime(0.0), 1.0);
        assert_eq!(t.g_prime(5.0), 0.0);
        assert_eq!(t.g_prime(-5.0), 0.0);
    }

    #[test]
    fn f_prime_examples() {
        let t = fam(3.0);
        assert_eq!(t.f_prime(0.0), 0.0);
        assert_eq!(t.f_prime(2.5), 5.0);
        assert_eq!(t.f_prime(-1.25), -2.5);
    }

    fn fd_check(name: &str, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, m: f64, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let step = 1e-6;
        for _ in 0..100 {
            let v: f64 = rng.random_range(-(m * m + 3.0)..(m * m + 3.0));
            let fd = (f(v + step) - f(v - step)) / (2.0 * step);
            let exact = df(v);
            assert!(
                (fd - exact).abs() <= 1e-6 * exact.abs().max(1.0),
                "{name} at v = {v}: fd {fd} vs analytic {exact}"
            );
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for (seed, m) in [(1, 1.5), (2, 2.0), (3, 4.0)] {
            let t = fam(m);
            fd_check("f'", |v| t.f(v), |v| t.f_prime(v), m, seed);
            fd_check("g'", |v| t.g(v), |v| t.g_prime(v), m, seed + 10);
            fd_check("g''", |v| t.g_prime(v), |v| t.g_second(v), m, seed + 20);
            fd_check("F'", |v| t.f_integral(v), |v| t.f(v), m, seed + 30);
        }
    }

    #[test]
    fn f_integral_examples() {
        let t = fam(2.0);
        assert_eq!(t.f_integral(0.0), 0.0);
        assert_eq!(t.f_integral(1.0), 1.0 / 3.0);
        let f = |s: f64| t.f(s);
        for v in [6.0, 3.5, 4.9, -6.0, 12.0] {
            let quad = adaptive_simpson(&f, 0.0, v, 1e-13);
            assert!((t.f_integral(v) - quad).abs() <= 1e-10, "v = {v}");
        }
    }

    #[test]
    fn f_integral_continuous_at_region_edges() {
        for m in [1.5, 2.0, 3.0, 7.0] {
            let t = fam(m);
            for edge in [m, m * m + 1.0] {
                let below = t.f_integral(edge * (1.0 - f64::EPSILON));
                let above = t.f_integral(edge * (1.0 + f64::EPSILON));
                let slope = t.f(edge).abs() * edge * f64::EPSILON;
                let ulp = edge.powi(3) * f64::EPSILON;
                assert!((below - above).abs() <= 4.0 * ulp + 2.0 * slope, "M = {m} edge {edge}");
            }
        }
    }

    #[test]
    fn sandwich_and_bounds_on_many_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for m in [1.01, 1.5, 2.0, 5.0, 10.0] {
            let t = fam(m);
            let c = t.f_prime_bound().unwrap();
            let range = 2.0 * (m * m + 1.0);
            for _ in 0..100_000 {
                let v: f64 = rng.random_range(-range..range);
                let f = t.f(v);
                assert!(f >= 0.0 && f <= v * v, "sandwich at v = {v}, M = {m}");
                let gp = t.g_prime(v);
                assert!((0.0..=1.0).contains(&gp));
                assert!(t.f_prime(v).abs() + t.g(v).abs() <= c + 1.5 * m);
                assert!(t.f_prime(v).abs() <= c);
                let big_f = t.f_integral(v);
                assert!(big_f.abs() <= (m * m + 1.0).powi(2) * v.abs() + v * v);
            }
        }
    }

    #[test]
    fn exactness_region_is_bitwise_untruncated() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples: Vec<f64> = (0..10_000).map(|_| rng.random_range(-3.0..3.0)).collect();
        let max = samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let on = fam(max + 0.1);
        let off = Truncation::Off;
        for &v in &samples {
            assert_eq!(on.f(v).to_bits(), off.f(v).to_bits());
            assert_eq!(on.f_prime(v).to_bits(), off.f_prime(v).to_bits());
            assert_eq!(on.g(v).to_bits(), off.g(v).to_bits());
            assert_eq!(on.g_prime(v).to_bits(), off.g_prime(v).to_bits());
            assert_eq!(on.g_second(v).to_bits(), off.g_second(v).to_bits());
            assert_eq!(on.f_integral(v).to_bits(), off.f_integral(v).to_bits());
        }
    }

    proptest::proptest! {
        #[test]
        fn f_integral_is_odd(v in -60.0f64..60.0, m in 1.1f64..6.0) {
            let t = fam(m);
            proptest::prop_assert_eq!(t.f_integral(-v), -t.f_integral(v));
            proptest::prop_assert_eq!(t.f(-v), t.f(v));
        }
    }
}
