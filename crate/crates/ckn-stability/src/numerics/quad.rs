//! Adaptive quadrature for singular/improper weighted integrals on `(0, inf)`
//! and for axisymmetric integrals over `R^N`.
//!
//! Each finite panel is first tried with a Gauss–Legendre 15/31 pair; panels
//! where the pair disagrees fall back to tanh-sinh refinement, which tolerates
//! integrable endpoint singularities. The half-line is covered by the caller's
//! split points followed by geometrically doubling tail panels.

use once_cell::sync::Lazy;

use crate::error::{CknError, Result};
use crate::numerics::gamma::sphere_area;
use crate::scalar::Real;

/// Tolerances and domain-decomposition policy for the integrators.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Strictly increasing interior split points (all `> 0`).
    pub split_points: Vec<f64>,
    pub tail_cutoff: TailCutoff,
    /// Maximum tanh-sinh refinement level per panel.
    pub max_subdivisions: u32,
}

/// How the improper tail beyond the last split point is truncated.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailCutoff {
    /// Double panel width until two consecutive panels contribute below the
    /// absolute budget; relies on the integrand decaying (super-)exponentially.
    ExpDecayBound,
    /// Hard cutoff: integrate `[0, R]` only.
    FixedR(f64),
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            split_points: vec![1.0],
            tail_cutoff: TailCutoff::ExpDecayBound,
            max_subdivisions: 12,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(CknError::InvalidInput(
                "quadrature tolerances must be positive".into(),
            ));
        }
        let mut prev = 0.0;
        for &s in &self.split_points {
            if !(s > prev) || !s.is_finite() {
                return Err(CknError::InvalidInput(
                    "split points must be finite, positive and strictly increasing".into(),
                ));
            }
            prev = s;
        }
        if let TailCutoff::FixedR(r) = self.tail_cutoff {
            if !(r > 0.0) || !r.is_finite() {
                return Err(CknError::InvalidInput("fixed cutoff must be positive".into()));
            }
        }
        Ok(())
    }

    /// Same policy with tolerances scaled by `factor` (used for nested and
    /// mesh-refinement runs).
    pub fn scaled_tol(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..self.clone()
        }
    }

    /// Same policy with a hard tail cutoff.
    pub fn with_fixed_r(&self, r: f64) -> Self {
        Self {
            tail_cutoff: TailCutoff::FixedR(r),
            ..self.clone()
        }
    }
}

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub err: T,
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes (computed once, stored as f64, converted on use).
// ---------------------------------------------------------------------------

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..64 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

static GL15: Lazy<Vec<(f64, f64)>> = Lazy::new(|| gauss_legendre(15));
static GL31: Lazy<Vec<(f64, f64)>> = Lazy::new(|| gauss_legendre(31));

fn gl_apply<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, rule: &[(f64, f64)]) -> T {
    let center = (a + b) * T::of(0.5);
    let half = (b - a) * T::of(0.5);
    let mut acc = T::zero();
    for &(x, w) in rule {
        acc = acc + T::of(w) * f(center + half * T::of(x));
    }
    acc * half
}

// ---------------------------------------------------------------------------
// tanh-sinh refinement for panels the Gauss pair cannot certify.
// ---------------------------------------------------------------------------

struct TsLevel<T> {
    estimate: T,
    err: T,
}

/// One trapezoid sweep at step `h`, summing only odd multiples when
/// `odd_only` (level refinement), including t = 0 otherwise.
fn ts_sweep<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    h: T,
    odd_only: bool,
) -> (T, bool, bool) {
    let half_pi = T::of(std::f64::consts::FRAC_PI_2);
    let half_span = (b - a) * T::of(0.5);
    let mut sum = T::zero();
    let mut k: u64 = if odd_only { 1 } else { 0 };
    let step: u64 = if odd_only { 2 } else { 1 };
    let mut non_finite = false;
    let mut prev_mag = T::infinity();
    let mut growth_streak = 0u32;
    let mut max_mag = T::zero();
    let mut quiet_streak = 0u32;
    loop {
        let t = h * T::of(k as f64);
        if t > T::of(6.8) {
            break;
        }
        let u = half_pi * t.sinh();
        let eu = (-(u + u)).exp();
        // distance of the node from the endpoint, in unit coordinates
        let d = (eu + eu) / (T::one() + eu);
        let sech = (T::of(2.0) * (-u).exp()) / (T::one() + eu);
        let w = half_pi * t.cosh() * sech * sech;
        let off = d * half_span;
        // Node floor: stay 30 orders above the panel scale. Integrands here
        // are either regularized by substitution or carry weights with net
        // exponent well above -1, so the excluded sliver is below any
        // tolerance, while algebraically singular evaluators would overflow.
        if off < half_span * T::of(1e-30) || w < T::of(1e-290) {
            break;
        }
        let term = if k == 0 {
            w * f(a + half_span)
        } else {
            w * (f(b - off) + f(a + off))
        };
        if !term.is_finite() {
            non_finite = true;
            break;
        }
        sum = sum + term;
        let mag = term.abs();
        max_mag = max_mag.max(mag);
        // Close to the endpoints the weight decays doubly exponentially;
        // sustained term growth surviving to the end of the sweep means the
        // endpoint is not integrable. Growth that later turns around (an
        // integrable ridge) resets the streak.
        if k > 0 && d < T::of(1e-3) {
            if mag > prev_mag && mag > T::of(1e-280) {
                growth_streak += 1;
            } else {
                growth_streak = 0;
            }
        }
        // Deep in the endpoint zone, once terms are negligible against the
        // running maximum they stay negligible for every integrand this
        // toolkit produces; stop before evaluators overflow at absurd radii.
        if d < T::of(1e-4) && mag <= max_mag * T::of(1e-30) {
            quiet_streak += 1;
            if quiet_streak >= 10 {
                break;
            }
        } else {
            quiet_streak = 0;
        }
        prev_mag = mag;
        k += step;
    }
    (sum * h * half_span, non_finite, growth_streak >= 8)
}

fn tanh_sinh<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    rel: T,
    abs: T,
    max_level: u32,
) -> Result<TsLevel<T>> {
    let (mut estimate, nf, grew) = ts_sweep(f, a, b, T::one(), false);
    if nf {
        return Err(CknError::SingularEndpoint(
            "non-finite integrand value inside panel".into(),
        ));
    }
    let mut err = estimate.abs();
    let mut h = T::one();
    let mut grew_last = grew;
    for _ in 1..=max_level {
        h = h * T::of(0.5);
        let (odd, nf, grew) = ts_sweep(f, a, b, h, true);
        if nf {
            return Err(CknError::SingularEndpoint(
                "non-finite integrand value inside panel".into(),
            ));
        }
        if grew && grew_last {
            return Err(CknError::SingularEndpoint(
                "successive refinements diverge at an endpoint".into(),
            ));
        }
        let new = estimate * T::of(0.5) + odd;
        err = (new - estimate).abs();
        estimate = new;
        grew_last = grew;
        if err <= abs.max(rel * estimate.abs()) {
            return Ok(TsLevel { estimate, err });
        }
    }
    if grew_last {
        return Err(CknError::SingularEndpoint(
            "refinement budget exhausted while boundary terms grow".into(),
        ));
    }
    let target = abs.max(rel * estimate.abs());
    if err <= target * T::of(30.0) {
        Ok(TsLevel { estimate, err })
    } else {
        Err(CknError::NonConvergence(format!(
            "panel error {err:?} above tolerance after max refinement"
        )))
    }
}

/// Integrate `f` over the finite panel `[a, b]`.
fn panel<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    rel: T,
    abs: T,
    max_level: u32,
) -> Result<Integral<T>> {
    if a == b {
        return Ok(Integral { value: T::zero(), err: T::zero() });
    }
    let i15 = gl_apply(f, a, b, &GL15);
    let i31 = gl_apply(f, a, b, &GL31);
    if i15.is_finite() && i31.is_finite() {
        let err = (i31 - i15).abs();
        if err <= abs.max(rel * i31.abs()) * T::of(0.25) {
            return Ok(Integral { value: i31, err });
        }
    }
    let ts = tanh_sinh(f, a, b, rel, abs, max_level)?;
    Ok(Integral { value: ts.estimate, err: ts.err })
}

// ---------------------------------------------------------------------------
// Half-line drivers.
// ---------------------------------------------------------------------------

/// Compute `int_0^inf f(r) r^m dr` for `f` continuous on `(0, inf)` with
/// integrable endpoint behavior.
///
/// The weight exponent `m` may be negative; for `-1 < m < 0` the panel
/// touching the origin is regularized by the substitution `r = t^{1/(1+m)}`.
/// For `m <= -1` the combined integrand `f(r) r^m` must itself be integrable
/// near zero (the caller absorbs known endpoint exponents).
pub fn integrate_radial<T: Real, F: Fn(T) -> T>(
    f: F,
    m: T,
    spec: &QuadratureSpec,
) -> Result<Integral<T>> {
    spec.validate()?;
    let rel = T::of(spec.rel_tol);
    let abs = T::of(spec.abs_tol);
    let max_level = spec.max_subdivisions;

    let cutoff = match spec.tail_cutoff {
        TailCutoff::FixedR(r) => Some(T::of(r)),
        TailCutoff::ExpDecayBound => None,
    };
    let mut edges: Vec<T> = vec![T::zero()];
    for &s in &spec.split_points {
        let s = T::of(s);
        if cutoff.map_or(true, |r| s < r) {
            edges.push(s);
        }
    }
    if let Some(r) = cutoff {
        edges.push(r);
    }

    let weighted = |r: T| f(r) * r.powf(m);
    let mut acc = T::zero();
    let mut err_acc = T::zero();

    for win in edges.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let abs_panel = (abs.max(rel * acc.abs())) * T::of(0.25);
        let part = if lo == T::zero() && m < T::zero() && m > -T::one() {
            // r = t^sigma, sigma = 1/(1+m): the weight is absorbed exactly.
            let sigma = T::one() / (T::one() + m);
            let upper = hi.powf(T::one() + m);
            let g = |t: T| f(t.powf(sigma));
            let p = panel(&g, T::zero(), upper, rel, abs_panel, max_level)?;
            Integral { value: p.value * sigma, err: p.err * sigma }
        } else {
            panel(&weighted, lo, hi, rel, abs_panel, max_level)?
        };
        acc = acc + part.value;
        err_acc = err_acc + part.err;
    }

    if cutoff.is_none() {
        // Tail: doubling panels until the measured contribution confirms the
        // decay bound, i.e. two consecutive panels below the budget.
        let mut lo = *edges.last().expect("at least the origin edge");
        if lo == T::zero() {
            lo = T::one();
        }
        let mut quiet = 0u32;
        let mut panels = 0u32;
        loop {
            let hi = lo + lo;
            let tail_tol = (abs.max(rel * acc.abs())) * T::of(0.125);
            let part = panel(&weighted, lo, hi, rel, tail_tol, max_level)?;
            acc = acc + part.value;
            err_acc = err_acc + part.err;
            if part.value.abs() <= tail_tol {
                quiet += 1;
                if quiet >= 2 {
                    break;
                }
            } else {
                quiet = 0;
            }
            lo = hi;
            panels += 1;
            if panels > 60 {
                return Err(CknError::NonConvergence(
                    "tail did not decay within the panel-doubling budget".into(),
                ));
            }
        }
    }

    Ok(Integral { value: acc, err: err_acc })
}

/// Integrate `f` over the single finite interval `[a, b]`.
pub fn integrate_segment<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    spec: &QuadratureSpec,
) -> Result<Integral<T>> {
    spec.validate()?;
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(CknError::InvalidInput(format!(
            "segment bounds must be finite and ordered, got {a:?}..{b:?}"
        )));
    }
    panel(
        &f,
        a,
        b,
        T::of(spec.rel_tol),
        T::of(spec.abs_tol),
        spec.max_subdivisions,
    )
}

/// Integrate `f` over `[from, inf)` with doubling tail panels.
pub fn integrate_tail<T: Real, F: Fn(T) -> T>(
    f: F,
    from: T,
    spec: &QuadratureSpec,
) -> Result<Integral<T>> {
    spec.validate()?;
    if !(from > T::zero()) || !from.is_finite() {
        return Err(CknError::InvalidInput(
            "tail integration starts at a positive finite point".into(),
        ));
    }
    let rel = T::of(spec.rel_tol);
    let abs = T::of(spec.abs_tol);
    let mut lo = from;
    let mut acc = T::zero();
    let mut err_acc = T::zero();
    let mut quiet = 0u32;
    for _ in 0..=60u32 {
        let hi = lo + lo;
        let tol = (abs.max(rel * acc.abs())) * T::of(0.125);
        let part = panel(&f, lo, hi, rel, tol, spec.max_subdivisions)?;
        acc = acc + part.value;
        err_acc = err_acc + part.err;
        if part.value.abs() <= tol {
            quiet += 1;
            if quiet >= 2 {
                return Ok(Integral { value: acc, err: err_acc });
            }
        } else {
            quiet = 0;
        }
        lo = hi;
    }
    Err(CknError::NonConvergence(
        "tail did not decay within the panel-doubling budget".into(),
    ))
}

/// Integrate `G` over `R^N` for an axisymmetric `G(x) = g(|x'|, x_N)` with
/// `x' in R^{N-1}`, via `|S^{N-2}| int int g(rho, z) rho^{N-2} drho dz`.
pub fn integrate_axisym<T: Real, F: Fn(T, T) -> T>(
    g: F,
    n_dim: u32,
    spec: &QuadratureSpec,
) -> Result<Integral<T>> {
    if n_dim < 2 {
        return Err(CknError::InvalidInput(
            "axisymmetric integration requires dimension >= 2".into(),
        ));
    }
    spec.validate()?;
    let coef: T = sphere_area(n_dim - 1);
    let inner_spec = spec.scaled_tol(0.1);
    let outer_spec = QuadratureSpec {
        abs_tol: spec.abs_tol / coef.to_f64().unwrap_or(1.0),
        ..spec.clone()
    };
    // Inner failures cannot cross the Fn boundary as errors; stash the first
    // one and surface NaN so the outer driver aborts.
    let inner_err: std::cell::RefCell<Option<CknError>> = std::cell::RefCell::new(None);
    let anchor = spec.split_points.first().copied().unwrap_or(1.0);
    let inner = |rho: T| -> T {
        // The weighted integrands this toolkit produces put negligible mass
        // on the axis sliver rho < 1e-12 * anchor; clamping keeps the inner
        // line integral's near-axis ridge at a height its quadrature can
        // resolve down to saturation.
        let rho = rho.max(T::of(1e-12 * anchor));
        // Weights singular on the axis ridge flatten out below z ~ rho; a
        // split there keeps each panel's endpoint behavior monotone.
        let mut spec_rho = inner_spec.clone();
        let rho_f = rho.to_f64().unwrap_or(0.0);
        if rho_f > 0.0 && rho_f.is_finite() {
            spec_rho.split_points.push(rho_f);
            spec_rho
                .split_points
                .sort_by(|a, b| a.partial_cmp(b).unwrap());
            spec_rho.split_points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
            if let TailCutoff::FixedR(r) = spec_rho.tail_cutoff {
                spec_rho.split_points.retain(|s| *s < r);
            }
        }
        let line = integrate_radial(|z: T| g(rho, z) + g(rho, -z), T::zero(), &spec_rho);
        match line {
            Ok(i) => i.value,
            Err(e) => {
                inner_err.borrow_mut().get_or_insert(e);
                T::nan()
            }
        }
    };
    let outer = integrate_radial(inner, T::of((n_dim - 2) as f64), &outer_spec);
    if let Some(e) = inner_err.into_inner() {
        return Err(e);
    }
    let outer = outer?;
    Ok(Integral { value: coef * outer.value, err: coef * outer.err })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gamma::gamma_fn;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn exponential_moments() {
        // int r e^{-2r} dr = 1/4
        let i = integrate_radial(|r: f64| (-2.0 * r).exp(), 1.0, &spec()).unwrap();
        assert!((i.value - 0.25).abs() < 1e-12, "got {}", i.value);
        // int r^3 e^{-r^2} dr = 1/2
        let i = integrate_radial(|r: f64| (-r * r).exp(), 3.0, &spec()).unwrap();
        assert!((i.value - 0.5).abs() < 1e-12, "got {}", i.value);
    }

    #[test]
    fn gamma_moment_grid() {
        // int_0^inf r^s e^{-q r^g} dr = Gamma((s+1)/g) / (g q^{(s+1)/g})
        let cases: Vec<(f64, f64, f64)> = vec![
            (0.0, 1.0, 1.0),
            (1.0, 2.0, 1.0),
            (2.5, 0.7, 1.0),
            (4.0, 1.3, 1.0),
            (-0.5, 1.0, 1.0),
            (-0.9, 2.0, 1.0),
            (0.0, 1.0, 2.0),
            (1.0, 1.0, 2.0),
            (3.0, 2.0, 2.0),
            (5.5, 0.5, 2.0),
            (-0.5, 1.0, 2.0),
            (0.5, 3.0, 0.75),
            (2.0, 1.0, 0.75),
            (6.0, 0.3, 0.75),
            (-0.3, 2.0, 0.75),
            (1.5, 1.5, 1.5),
            (3.25, 0.8, 1.25),
            (0.0, 5.0, 1.0),
            (2.0, 10.0, 2.0),
            (7.0, 1.0, 3.0),
        ];
        for &(s, q, g) in &cases {
            let want = gamma_fn((s + 1.0) / g).unwrap() / (g * q.powf((s + 1.0) / g));
            let got = integrate_radial(|r: f64| (-q * r.powf(g)).exp(), s, &spec()).unwrap();
            let rel = ((got.value - want) / want).abs();
            assert!(rel < 1e-10, "case ({s},{q},{g}): rel {rel}");
        }
    }

    #[test]
    fn halving_rel_tol_never_hurts_on_moment_grid() {
        let cases: Vec<(f64, f64, f64)> = vec![
            (1.0, 2.0, 1.0),
            (-0.5, 1.0, 1.0),
            (3.0, 2.0, 2.0),
            (2.0, 1.0, 0.75),
            (0.5, 3.0, 0.75),
        ];
        for &(s, q, g) in &cases {
            let want = gamma_fn((s + 1.0) / g).unwrap() / (g * q.powf((s + 1.0) / g));
            let mut loose = spec();
            loose.rel_tol = 1e-6;
            let mut prev_err = f64::INFINITY;
            for _ in 0..5 {
                let got =
                    integrate_radial(|r: f64| (-q * r.powf(g)).exp(), s, &loose).unwrap();
                let e = ((got.value - want) / want).abs();
                assert!(
                    e <= prev_err.max(5e-15) * 1.000_001,
                    "error grew to {e} from {prev_err} at rel_tol {}",
                    loose.rel_tol
                );
                prev_err = e;
                loose.rel_tol *= 0.5;
            }
        }
    }

    #[test]
    fn fixed_cutoff_and_splits() {
        let s = spec().with_fixed_r(2.0);
        // int_0^2 r dr = 2
        let i = integrate_radial(|_: f64| 1.0, 1.0, &s).unwrap();
        assert!((i.value - 2.0).abs() < 1e-12);
        let mut s2 = spec();
        s2.split_points = vec![0.5, 1.0, 3.0];
        let i = integrate_radial(|r: f64| (-r).exp(), 0.0, &s2).unwrap();
        assert!((i.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_endpoint_detected() {
        // int_0^1 1/r dr diverges: f = 1/r with m = 0.
        let out = integrate_radial(|r: f64| 1.0 / r, 0.0, &spec().with_fixed_r(1.0));
        assert!(matches!(out, Err(CknError::SingularEndpoint(_))), "{out:?}");
        // Non-integrable even with the weight: r^{-1.5} total.
        let out = integrate_radial(|r: f64| r.powf(-0.8), -0.7, &spec().with_fixed_r(1.0));
        assert!(matches!(out, Err(CknError::SingularEndpoint(_))), "{out:?}");
    }

    #[test]
    fn integrable_singularities_ok() {
        // int_0^1 r^{-1/2} dr = 2 via the substitution branch
        let i = integrate_radial(|_: f64| 1.0, -0.5, &spec().with_fixed_r(1.0)).unwrap();
        assert!((i.value - 2.0).abs() < 1e-10, "got {}", i.value);
        // f carries the singular factor itself (m <= -1, net exponent 0.5):
        // int_0^1 r^{1.5} r^{-1} dr = 2/3
        let i = integrate_radial(|r: f64| r.powf(1.5), -1.0, &spec().with_fixed_r(1.0)).unwrap();
        assert!((i.value - 2.0 / 3.0).abs() < 1e-9, "got {}", i.value);
    }

    #[test]
    fn linearity_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a: f64 = rng.gen_range(-3.0..3.0);
            let b: f64 = rng.gen_range(-3.0..3.0);
            let q1: f64 = rng.gen_range(0.5..2.0);
            let q2: f64 = rng.gen_range(0.5..2.0);
            let f = move |r: f64| (-q1 * r).exp();
            let g = move |r: f64| (-q2 * r * r).exp();
            let m = 1.5;
            let s = spec();
            let if_ = integrate_radial(f, m, &s).unwrap().value;
            let ig = integrate_radial(g, m, &s).unwrap().value;
            let comb = integrate_radial(|r| a * f(r) + b * g(r), m, &s).unwrap().value;
            let want = a * if_ + b * ig;
            let scale = if_.abs().max(ig.abs()).max(1e-30);
            assert!(
                (comb - want).abs() <= 10.0 * 1e-10 * scale + 1e-13,
                "linearity off: {comb} vs {want}"
            );
        }
    }

    #[test]
    fn axisym_gaussian_r4() {
        // int_{R^4} e^{-|x|^2} dx = pi^2
        let i = integrate_axisym(|rho: f64, z: f64| (-(rho * rho + z * z)).exp(), 4, &spec())
            .unwrap();
        let want = std::f64::consts::PI.powi(2);
        assert!(((i.value - want) / want).abs() < 1e-9, "got {}", i.value);
    }

    #[test]
    fn axisym_matches_independent_2d_oracle() {
        // g = e^{-rho - |z|} * sqrt(rho^2+z^2) / rho over R^4;
        // reference from a 50-digit independent 2D quadrature.
        let want = 61.194149874552913701;
        let g = |rho: f64, z: f64| (-(rho + z.abs())).exp() * (rho * rho + z * z).sqrt() / rho;
        let i = integrate_axisym(g, 4, &spec()).unwrap();
        assert!(((i.value - want) / want).abs() < 1e-8, "got {}", i.value);
    }

    #[test]
    fn axisym_of_radial_profile_matches_radial() {
        for n_dim in [2u32, 3, 4, 9] {
            let g = |rho: f64, z: f64| {
                let s2 = rho * rho + z * z;
                (-s2).exp() * (1.0 + s2).recip()
            };
            let ax = integrate_axisym(g, n_dim, &spec()).unwrap();
            let rad = integrate_radial(
                |r: f64| (-r * r).exp() / (1.0 + r * r),
                (n_dim - 1) as f64,
                &spec(),
            )
            .unwrap();
            let want = sphere_area::<f64>(n_dim) * rad.value;
            assert!(
                ((ax.value - want) / want).abs() < 1e-8,
                "n={n_dim}: {} vs {}",
                ax.value,
                want
            );
        }
    }

    #[test]
    fn separable_slab() {
        // Separable integrand: result is the product of 1D integrals. The rho
        // factor is truncated at the default split point so the kink sits on
        // a panel edge.
        let g = |rho: f64, z: f64| (1.0 - rho * rho).max(0.0) * (-z * z).exp();
        let i = integrate_axisym(g, 3, &spec()).unwrap();
        // |S^1| int_0^1 rho(1-rho^2) drho * int_R e^{-z^2} dz
        let want = 2.0 * std::f64::consts::PI * 0.25 * std::f64::consts::PI.sqrt();
        assert!(((i.value - want) / want).abs() < 1e-9, "got {}", i.value);
    }
}
