use super::NumericsError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rk4Config {
    pub dt: f64,
    pub steps: usize,
}

/// Classical fourth-order Runge-Kutta. Returns `steps + 1` rows starting
/// with `x0`; step `r` starts at `t0 + r * dt`.
///
/// Operations are ordered like the formula-level step in the corpus, so
/// both round the same way.
pub fn rk4_integrate(
    x0: &[f64],
    t0: f64,
    cfg: &Rk4Config,
    deriv: impl Fn(&[f64], f64) -> Vec<f64>,
) -> Result<Vec<Vec<f64>>, NumericsError> {
    let dt = cfg.dt;
    let mut out = Vec::with_capacity(cfg.steps + 1);
    out.push(x0.to_vec());
    let scaled = |d: Vec<f64>| -> Vec<f64> { d.into_iter().map(|v| dt * v).collect() };
    let shifted = |x: &[f64], d: &[f64], half: bool| -> Vec<f64> {
        x.iter()
            .zip(d)
            .map(|(a, b)| if half { a + b / 2.0 } else { a + b })
            .collect()
    };
    for r in 0..cfg.steps {
        let t = t0 + r as f64 * dt;
        let x = out.last().expect("non-empty");
        let d1 = scaled(deriv(x, t));
        let d2 = scaled(deriv(&shifted(x, &d1, true), t + dt / 2.0));
        let d3 = scaled(deriv(&shifted(x, &d2, true), t + dt / 2.0));
        let d4 = scaled(deriv(&shifted(x, &d3, false), t + dt));
        let next: Vec<f64> = (0..x.len())
            .map(|i| x[i] + (d1[i] + 2.0 * d2[i] + 2.0 * d3[i] + d4[i]) / 6.0)
            .collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::NonFinite { step: r + 1, t: t + dt });
        }
        out.push(next);
    }
    Ok(out)
}
