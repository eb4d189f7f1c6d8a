use super::NumericsError;

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
/// Returns `(x, f(x))` with the bracket narrowed below `tol`.
pub fn minimize_scalar(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64), NumericsError> {
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) || !lo.is_finite() || !hi.is_finite() {
        return Err(NumericsError::BadInterval { lo, hi });
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(NumericsError::NonFiniteObjective(x))
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > tol.max(f64::EPSILON * (a.abs() + b.abs())) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let x = (a + b) / 2.0;
    let fx = eval(x)?;
    Ok((x, fx))
}
