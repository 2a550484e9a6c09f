//! Derivative-free minimization: bounded Brent in 1D, Nelder–Mead in 2D.

use crate::error::{CknError, Result};
use crate::scalar::Real;

/// Outcome of a 1D or 2D minimization.
#[derive(Debug, Clone)]
pub struct OptimizeResult<T> {
    /// One entry for scalar searches, two for planar ones.
    pub argmin: Vec<T>,
    pub value: T,
    pub iterations: u32,
    pub converged: bool,
    /// Argmin pinned to the edge of the search box.
    pub at_boundary: bool,
}

const GOLDEN: f64 = 0.381_966_011_250_105_1;

fn edge_threshold<T: Real>(tol: T) -> T {
    T::of(1e-6).max(T::of(4.0) * tol)
}

/// Minimize `phi` over the bracket `[lo, hi]` with a bounded Brent scheme
/// (golden-section steps with safeguarded parabolic interpolation).
pub fn minimize_scalar<T: Real, F: FnMut(T) -> T>(
    mut phi: F,
    bracket: (T, T),
    tol: T,
) -> Result<OptimizeResult<T>> {
    let (lo, hi) = bracket;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(CknError::InvalidBracket(format!("bracket {lo:?}..{hi:?}")));
    }
    if !(tol > T::zero()) {
        return Err(CknError::InvalidBracket("tolerance must be positive".into()));
    }
    let (mut a, mut b) = (lo, hi);
    let golden = T::of(GOLDEN);
    let mut x = a + golden * (b - a);
    let mut w = x;
    let mut v = x;
    let mut fx = phi(x);
    if !fx.is_finite() {
        return Err(CknError::InvalidBracket(
            "objective non-finite at initial probe".into(),
        ));
    }
    let mut fw = fx;
    let mut fv = fx;
    let mut d = T::zero();
    let mut e = T::zero();
    let mut converged = false;
    let mut iterations = 0u32;

    for iter in 0..200u32 {
        iterations = iter + 1;
        let mid = (a + b) * T::of(0.5);
        let tol1 = tol * (T::one() + x.abs());
        let tol2 = tol1 + tol1;
        if (x - mid).abs() <= tol2 - (b - a) * T::of(0.5) {
            converged = true;
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            // parabolic fit through (x, w, v)
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = (q - r) * T::of(2.0);
            if q > T::zero() {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            e = d;
            if p.abs() < (q * e_prev * T::of(0.5)).abs()
                && p > q * (a - x)
                && p < q * (b - x)
            {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < mid { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < mid { b - x } else { a - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > T::zero() {
            x + tol1
        } else {
            x - tol1
        };
        let mut fu = phi(u);
        if !fu.is_finite() {
            fu = T::infinity();
        }
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    let thresh = edge_threshold(tol * (T::one() + x.abs()));
    let at_boundary = (x - lo).abs() <= thresh || (hi - x).abs() <= thresh;
    Ok(OptimizeResult {
        argmin: vec![x],
        value: fx,
        iterations,
        converged,
        at_boundary,
    })
}

/// Minimize `phi` over the box `[lower, upper]` with a clamped Nelder–Mead
/// simplex started deterministically from `init`.
pub fn minimize_2d<T: Real, F: FnMut([T; 2]) -> T>(
    mut phi: F,
    init: [T; 2],
    lower: [T; 2],
    upper: [T; 2],
    tol: T,
) -> Result<OptimizeResult<T>> {
    for i in 0..2 {
        if !(lower[i] < upper[i]) || !lower[i].is_finite() || !upper[i].is_finite() {
            return Err(CknError::InvalidBracket(format!(
                "box axis {i}: {:?}..{:?}",
                lower[i], upper[i]
            )));
        }
    }
    let clamp = |p: [T; 2]| -> [T; 2] {
        [
            p[0].max(lower[0]).min(upper[0]),
            p[1].max(lower[1]).min(upper[1]),
        ]
    };
    let mut eval = |p: [T; 2]| -> T {
        let f = phi(p);
        if f.is_finite() {
            f
        } else {
            T::infinity()
        }
    };

    let x0 = clamp(init);
    let mut simplex: Vec<[T; 2]> = vec![x0];
    for i in 0..2 {
        let width = upper[i] - lower[i];
        let mut step = (width * T::of(0.08)).max(T::of(1e-3));
        if x0[i] + step > upper[i] {
            step = -step;
        }
        let mut p = x0;
        p[i] = p[i] + step;
        simplex.push(clamp(p));
    }
    let mut fvals: Vec<T> = simplex.iter().map(|&p| eval(p)).collect();

    let (alpha, gamma, rho, sigma) = (T::one(), T::of(2.0), T::of(0.5), T::of(0.5));
    let mut iterations = 0u32;
    let mut converged = false;

    for iter in 0..600u32 {
        iterations = iter + 1;
        // order ascending by value
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| fvals[i].partial_cmp(&fvals[j]).unwrap_or(std::cmp::Ordering::Equal));
        let ordered: Vec<[T; 2]> = idx.iter().map(|&i| simplex[i]).collect();
        let fordered: Vec<T> = idx.iter().map(|&i| fvals[i]).collect();
        simplex = ordered;
        fvals = fordered;

        let spread = (0..2)
            .map(|i| {
                (simplex[1][i] - simplex[0][i])
                    .abs()
                    .max((simplex[2][i] - simplex[0][i]).abs())
            })
            .fold(T::zero(), |a, b| a.max(b));
        let scale = T::one() + simplex[0][0].abs().max(simplex[0][1].abs());
        if spread <= tol * scale {
            converged = true;
            break;
        }

        let centroid = [
            (simplex[0][0] + simplex[1][0]) * T::of(0.5),
            (simplex[0][1] + simplex[1][1]) * T::of(0.5),
        ];
        let worst = simplex[2];
        let reflect = clamp([
            centroid[0] + alpha * (centroid[0] - worst[0]),
            centroid[1] + alpha * (centroid[1] - worst[1]),
        ]);
        let fr = eval(reflect);
        if fr < fvals[0] {
            let expand = clamp([
                centroid[0] + gamma * (reflect[0] - centroid[0]),
                centroid[1] + gamma * (reflect[1] - centroid[1]),
            ]);
            let fe = eval(expand);
            if fe < fr {
                simplex[2] = expand;
                fvals[2] = fe;
            } else {
                simplex[2] = reflect;
                fvals[2] = fr;
            }
        } else if fr < fvals[1] {
            simplex[2] = reflect;
            fvals[2] = fr;
        } else {
            let contract_base = if fr < fvals[2] { reflect } else { worst };
            let fc_base = if fr < fvals[2] { fr } else { fvals[2] };
            let contract = clamp([
                centroid[0] + rho * (contract_base[0] - centroid[0]),
                centroid[1] + rho * (contract_base[1] - centroid[1]),
            ]);
            let fc = eval(contract);
            if fc < fc_base {
                simplex[2] = contract;
                fvals[2] = fc;
            } else {
                for i in 1..3 {
                    let shrunk = clamp([
                        simplex[0][0] + sigma * (simplex[i][0] - simplex[0][0]),
                        simplex[0][1] + sigma * (simplex[i][1] - simplex[0][1]),
                    ]);
                    simplex[i] = shrunk;
                    fvals[i] = eval(shrunk);
                }
            }
        }
    }

    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| fvals[i].partial_cmp(&fvals[j]).unwrap_or(std::cmp::Ordering::Equal));
    let best = simplex[idx[0]];
    let fbest = fvals[idx[0]];
    let thresh = edge_threshold(tol * (T::one() + best[0].abs().max(best[1].abs())));
    let at_boundary = (0..2).any(|i| {
        (best[i] - lower[i]).abs() <= thresh || (upper[i] - best[i]).abs() <= thresh
    });
    Ok(OptimizeResult {
        argmin: best.to_vec(),
        value: fbest,
        iterations,
        converged,
        at_boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_1d() {
        let r = minimize_scalar(|x: f64| (x - 2.0) * (x - 2.0), (0.0, 5.0), 1e-10).unwrap();
        assert!(r.converged);
        assert!((r.argmin[0] - 2.0).abs() < 1e-8, "argmin {}", r.argmin[0]);
        assert!(r.value < 1e-15);
        assert!(!r.at_boundary);
    }

    #[test]
    fn monotone_hits_boundary() {
        let r = minimize_scalar(|x: f64| -x, (0.0, 3.0), 1e-10).unwrap();
        assert!(r.at_boundary);
        assert!((r.argmin[0] - 3.0).abs() < 1e-4);
    }

    #[test]
    fn invalid_bracket_rejected() {
        assert!(minimize_scalar(|x: f64| x, (2.0, 1.0), 1e-8).is_err());
        assert!(minimize_scalar(|x: f64| x, (0.0, 1.0), -1.0).is_err());
    }

    #[test]
    fn unimodal_matches_analytic_minimizer() {
        // strictly unimodal, minimum at x = ln 3
        let f = |x: f64| x.exp() - 3.0 * x;
        let r = minimize_scalar(f, (-2.0, 4.0), 1e-11).unwrap();
        assert!(r.converged);
        assert!((r.argmin[0] - 3.0f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn quadratic_2d() {
        let r = minimize_2d(
            |p: [f64; 2]| (p[0] - 1.0).powi(2) + (p[1] + 2.0).powi(2),
            [0.0, 0.0],
            [-5.0, -5.0],
            [5.0, 5.0],
            1e-9,
        )
        .unwrap();
        assert!(r.converged);
        assert!((r.argmin[0] - 1.0).abs() < 1e-6, "{:?}", r.argmin);
        assert!((r.argmin[1] + 2.0).abs() < 1e-6, "{:?}", r.argmin);
        assert!(!r.at_boundary);
    }

    #[test]
    fn constant_objective_converges_at_init() {
        let r = minimize_2d(
            |_: [f64; 2]| 7.5,
            [0.3, -0.4],
            [-1.0, -1.0],
            [1.0, 1.0],
            1e-8,
        )
        .unwrap();
        assert!(r.converged);
        assert_eq!(r.value, 7.5);
        assert!((r.argmin[0] - 0.3).abs() < 0.2 && (r.argmin[1] + 0.4).abs() < 0.2);
    }

    #[test]
    fn rosenbrock_like_valley() {
        let r = minimize_2d(
            |p: [f64; 2]| {
                let (x, y) = (p[0], p[1]);
                (1.0 - x).powi(2) + 5.0 * (y - x * x).powi(2)
            },
            [-1.0, 1.5],
            [-3.0, -3.0],
            [3.0, 3.0],
            1e-10,
        )
        .unwrap();
        assert!((r.argmin[0] - 1.0).abs() < 1e-4 && (r.argmin[1] - 1.0).abs() < 1e-4);
    }
}
