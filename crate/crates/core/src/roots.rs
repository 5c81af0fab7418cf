//! Bracketed root polishing: Newton steps that fall back to bisection
//! whenever they would leave the current bracket.

/// Outcome of a failed bracketed solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootFailure {
    /// `f(lo)` and `f(hi)` have the same strict sign.
    NotBracketed,
    /// An evaluation produced NaN or infinity.
    NonFinite,
}

/// Finds a root of `f` in `[lo, hi]` given a sign change.
///
/// `fdf` returns `(f(t), f'(t))`. Iteration stops when `|f| <= ftol`, when the
/// bracket shrinks to a few ulps, or after `max_iter` steps; the best iterate
/// seen so far is returned in the last two cases.
pub fn newton_bisect<F>(mut fdf: F, mut lo: f64, mut hi: f64, ftol: f64, max_iter: usize) -> Result<f64, RootFailure>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut flo, _) = fdf(lo);
    let (fhi, _) = fdf(hi);
    if !flo.is_finite() || !fhi.is_finite() {
        return Err(RootFailure::NonFinite);
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(RootFailure::NotBracketed);
    }

    let mut t = 0.5 * (lo + hi);
    let mut best = (f64::INFINITY, t);
    for _ in 0..max_iter {
        let (f, df) = fdf(t);
        if !f.is_finite() {
            return Err(RootFailure::NonFinite);
        }
        if f.abs() < best.0 {
            best = (f.abs(), t);
        }
        if f.abs() <= ftol {
            return Ok(t);
        }
        if f.signum() == flo.signum() {
            lo = t;
            flo = f;
        } else {
            hi = t;
        }
        let width = (hi - lo).abs();
        if width <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        let newton = if df != 0.0 && df.is_finite() { t - f / df } else { f64::NAN };
        let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
        t = if newton > a && newton < b { newton } else { 0.5 * (lo + hi) };
    }
    Ok(best.1)
}
