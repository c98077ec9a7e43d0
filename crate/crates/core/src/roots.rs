//! Bracketing scans and bisection for real secular functions.

/// Refines a sign-change bracket by bisection until the bracket is narrower than
/// `rel_tol * max(|a|, |b|, abs_floor)`.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> f64 {
    let mut fa = f(a);
    if fa == 0.0 {
        return a;
    }
    let fb = f(b);
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa.signum() != fb.signum(), "bisect needs a sign change");
    for _ in 0..300 {
        let m = 0.5 * (a + b);
        let scale = a.abs().max(b.abs()).max(abs_floor);
        if (b - a).abs() <= rel_tol * scale || m == a || m == b {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Scans `[lo, hi]` with the given step and returns every sign-change bracket.
/// A sample that evaluates to exactly zero is reported as a degenerate bracket `(x, x)`.
pub fn scan_brackets<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, step: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if hi <= lo {
        return out;
    }
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let mut x0 = lo;
    let mut f0 = f(x0);
    if f0 == 0.0 {
        out.push((x0, x0));
    }
    for i in 1..=n {
        let x1 = if i == n { hi } else { lo + i as f64 * (hi - lo) / n as f64 };
        let f1 = f(x1);
        if f1 == 0.0 {
            out.push((x1, x1));
        } else if f0 != 0.0 && f0.signum() != f1.signum() {
            out.push((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    out
}

/// All roots of `f` in `[lo, hi]` located on a grid of `step`, refined to `rel_tol`.
pub fn roots_in<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, step: f64, rel_tol: f64) -> Vec<f64> {
    let brackets = scan_brackets(&mut f, lo, hi, step);
    brackets
        .into_iter()
        .map(|(a, b)| if a == b { a } else { bisect(&mut f, a, b, rel_tol, 1.0) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sine_zeros() {
        let r = roots_in(f64::sin, 0.5, 10.0, 0.25, 1e-14);
        assert_eq!(r.len(), 3);
        for (k, x) in r.iter().enumerate() {
            assert!((x - (k + 1) as f64 * std::f64::consts::PI).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_grid_zero_is_reported_once() {
        let r = roots_in(|x| x, -1.0, 1.0, 0.5, 1e-14);
        assert_eq!(r, vec![0.0]);
    }
}
