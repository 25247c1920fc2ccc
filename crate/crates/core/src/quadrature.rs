//! Simpson rules: a composite rule on fixed panels (used by the integral
//! oracle) and an adaptive rule for the Young functions.

use crate::error::{Error, Result};

/// Composite Simpson on `[a, b]` with `intervals` (even) subintervals.
pub fn composite_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Nodes and weights of composite Simpson over consecutive breakpoints,
/// `intervals` subintervals per piece. Shared breakpoints are merged.
pub fn simpson_nodes(breaks: &[f64], intervals: usize) -> (Vec<f64>, Vec<f64>) {
    let n = intervals.max(2) + intervals % 2;
    let mut xs = Vec::new();
    let mut ws: Vec<f64> = Vec::new();
    for piece in breaks.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        if b <= a {
            continue;
        }
        let h = (b - a) / n as f64;
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            } * h
                / 3.0;
            if i == 0 && !xs.is_empty() && *xs.last().unwrap() == a {
                *ws.last_mut().unwrap() += w;
                continue;
            }
            xs.push(if i == n { b } else { a + i as f64 * h });
            ws.push(w);
        }
    }
    (xs, ws)
}

/// Adaptive Simpson with a global relative tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    // coarse pass fixes the absolute scale of the tolerance
    let coarse = composite_simpson(f, a, b, 64);
    let tol = (rel_tol * coarse.abs()).max(f64::MIN_POSITIVE);
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut budget = 2_000_000usize;
    let v = recurse(f, a, b, fa, fm, fb, whole, tol, 60, &mut budget);
    match v {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Quadrature {
            coarse,
            fine: f64::NAN,
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    budget: &mut usize,
) -> Option<f64> {
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget)?;
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget)?;
    Some(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_for_cubics() {
        let v = composite_simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 2);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nodes_merge_shared_breakpoints() {
        let (xs, ws) = simpson_nodes(&[0.0, 1.0, 3.0], 4);
        assert_eq!(xs.len(), 9);
        let total: f64 = ws.iter().sum();
        assert!((total - 3.0).abs() < 1e-14);
        let quad: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x * x).sum();
        assert!((quad - 9.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let v = adaptive_simpson(&|x: f64| x.sqrt(), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-9);
    }
}
