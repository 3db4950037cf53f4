//! Explicit bound functions relating separators and expansion, evaluated
//! with log-space magnitudes so astronomically large values stay usable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::DEFAULT_N0;
use crate::separator::ceil_tol;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const BISECTION_CAP: usize = 500;

/// Residual `a^delta - 4c (1 + ln a)^2`, i.e. `a^delta - 4c ln^2(e a)`.
pub fn residual_a(a: f64, delta: f64, c: f64) -> f64 {
    let l = 1.0 + a.ln();
    a.powf(delta) - 4.0 * c * l * l
}

/// The root `a >= 1` of `a^delta = 4c ln^2(e a)`.
///
/// The residual is `1 - 4c < 0` at `a = 1`; the upper end of the bracket is
/// found by doubling, then the root is bisected. The smallest bracketed root
/// is returned.
pub fn solve_a(delta: f64, c: f64, tol: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    if !(c >= 1.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("c must be at least 1, got {c}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let mut lo = 1.0f64;
    let mut hi = 2.0f64;
    while residual_a(hi, delta, c) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() || hi > 1e300 {
            return Err(Error::Numeric(format!(
                "no bracket for a with delta = {delta}, c = {c}"
            )));
        }
    }
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = residual_a(mid, delta, c);
        if r.abs() <= tol {
            return Ok(mid);
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = if residual_a(lo, delta, c).abs() <= residual_a(hi, delta, c).abs() {
        lo
    } else {
        hi
    };
    let r = residual_a(best, delta, c).abs();
    if r <= tol {
        Ok(best)
    } else {
        Err(Error::Numeric(format!(
            "residual {r:e} above tolerance {tol:e} at floating-point resolution (delta = {delta}, c = {c})"
        )))
    }
}

/// `ln a` for the root of `a^delta = 4 e^{ln_c} (1 + ln a)^2`, solved as
/// `delta x = ln 4 + ln_c + 2 ln(1 + x)` so that `c` and `a` may overflow.
pub fn solve_ln_a(delta: f64, ln_c: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    if !(ln_c >= 0.0) || !ln_c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "ln c must be finite and nonnegative, got {ln_c}"
        )));
    }
    let g = |x: f64| delta * x - 4f64.ln() - ln_c - 2.0 * (1.0 + x).ln();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while g(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Numeric("no bracket in log space".into()));
        }
    }
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A positive magnitude held as its natural log, with the plain value when it
/// fits in an `f64` and the exact integer when it fits in a `u128`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Magnitude {
    pub ln: f64,
    pub log10: f64,
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<u128>,
    pub overflow: bool,
}

impl Magnitude {
    pub fn from_ln(ln: f64) -> Self {
        let value = ln.exp();
        let fits = value.is_finite();
        Magnitude {
            ln,
            log10: ln / std::f64::consts::LN_10,
            value: fits.then_some(value),
            exact: None,
            overflow: !fits,
        }
    }

    pub fn from_exact(v: u128) -> Self {
        let mut m = Magnitude::from_ln((v as f64).ln());
        m.value = Some(v as f64);
        m.exact = Some(v);
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub c: f64,
    pub delta: f64,
    /// Defaults to `min(1, delta / (6 (1 - delta)))` when absent.
    pub epsilon: Option<f64>,
    pub r: u64,
    pub n0: u64,
}

impl BoundParams {
    pub fn new(c: f64, delta: f64, r: u64) -> Self {
        BoundParams {
            c,
            delta,
            epsilon: None,
            r,
            n0: DEFAULT_N0,
        }
    }

    pub fn with_epsilon(mut self, eps: f64) -> Self {
        self.epsilon = Some(eps);
        self
    }

    pub fn with_r(mut self, r: u64) -> Self {
        self.r = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 1.0) || !self.c.is_finite() {
            return Err(Error::InvalidParameter(format!("c must be at least 1, got {}", self.c)));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1], got {}",
                self.delta
            )));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1], got {e}")));
            }
        }
        if self.r == 0 || self.n0 == 0 {
            return Err(Error::InvalidParameter("r and n0 must be positive".into()));
        }
        Ok(())
    }

    pub fn default_epsilon(delta: f64) -> f64 {
        if delta >= 1.0 {
            1.0
        } else {
            (delta / (6.0 * (1.0 - delta))).min(1.0)
        }
    }

    pub fn effective_epsilon(&self) -> f64 {
        self.epsilon.unwrap_or_else(|| Self::default_epsilon(self.delta))
    }
}

/// `ceil(1 / (2 eps^2))`.
pub fn m_of_epsilon(eps: f64) -> Result<u32> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1], got {eps}"
        )));
    }
    Ok(ceil_tol(1.0 / (2.0 * eps * eps)) as u32)
}

/// Smallest even integer strictly greater than `max(n0, (42000 c 4^m r)^(1/delta))`.
pub fn t_value(c: f64, delta: f64, m: u32, r: u64, n0: u64) -> Magnitude {
    let ln_x = (42000f64.ln() + c.ln() + m as f64 * 4f64.ln() + (r as f64).ln()) / delta;
    if ln_x < 40.0 {
        let x = (42000.0 * c * 4f64.powi(m as i32) * r as f64).powf(1.0 / delta);
        let x = x.max(n0 as f64);
        let t = 2 * ((x / 2.0).floor() as u128 + 1);
        return Magnitude::from_exact(t);
    }
    if ln_x < (n0 as f64).ln() {
        return Magnitude::from_exact(2 * (n0 as u128 / 2 + 1));
    }
    // The "+ at most 2" is below f64 resolution here.
    Magnitude::from_ln(ln_x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BEval {
    pub epsilon: f64,
    pub m: u32,
    pub t: Magnitude,
    pub b: Magnitude,
}

/// `b = 2 * 32^m * t^4`.
pub fn eval_b(params: &BoundParams) -> Result<BEval> {
    params.validate()?;
    let epsilon = params.effective_epsilon();
    let m = m_of_epsilon(epsilon)?;
    let t = t_value(params.c, params.delta, m, params.r, params.n0);
    let exact = t.exact.and_then(|t| {
        let pow32 = 32u128.checked_pow(m)?;
        let t4 = t.checked_pow(4)?;
        2u128.checked_mul(pow32)?.checked_mul(t4)
    });
    let b = match exact {
        Some(v) => Magnitude::from_exact(v),
        None => Magnitude::from_ln(2f64.ln() + m as f64 * 32f64.ln() + 4.0 * t.ln),
    };
    Ok(BEval { epsilon, m, t, b })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PEval {
    pub b: BEval,
    pub p: Magnitude,
}

/// `p = 316 c (b r)^(1 - delta)`, with epsilon set to its default.
pub fn eval_p(params: &BoundParams) -> Result<PEval> {
    let forced = BoundParams {
        epsilon: None,
        ..*params
    };
    let b = eval_b(&forced)?;
    let ln_p = 316f64.ln() + params.c.ln() + (1.0 - params.delta) * (b.b.ln + (params.r as f64).ln());
    let p = if params.delta == 1.0 {
        Magnitude::from_ln((316.0 * params.c).ln())
    } else {
        Magnitude::from_ln(ln_p)
    };
    Ok(PEval { b, p })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FMode {
    /// Bisection on the plain equation.
    Nominal,
    /// Bisection on the logarithm of the equation (same fixed point).
    LogSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FEval {
    pub p: PEval,
    pub f: Magnitude,
    pub mode: FMode,
}

/// `f = a_{5 delta / 6}(p)`: the edge-density bound for depth-`r` minors.
pub fn eval_f(params: &BoundParams) -> Result<FEval> {
    let p = eval_p(params)?;
    let delta = 5.0 * params.delta / 6.0;
    if let Some(pv) = p.p.value.filter(|v| *v < 1e12) {
        if let Ok(a) = solve_a(delta, pv, DEFAULT_TOL) {
            return Ok(FEval {
                p,
                f: Magnitude::from_ln(a.ln()),
                mode: FMode::Nominal,
            });
        }
    }
    let ln_a = solve_ln_a(delta, p.p.ln)?;
    Ok(FEval {
        p,
        f: Magnitude::from_ln(ln_a),
        mode: FMode::LogSpace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub exponent: f64,
    pub constant: f64,
    pub ln_constant: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

/// Least squares fit of `ln y = exponent ln x + ln constant`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<FitResult> {
    if points
        .iter()
        .any(|&(x, y)| !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite())
    {
        return Err(Error::InvalidParameter("fit points must be positive and finite".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mut fit = fit_log_points(&logs)?;
    fit.points = points.to_vec();
    Ok(fit)
}

/// Same fit with both coordinates already logged, for magnitudes beyond `f64`.
/// `points` in the result holds the logged pairs.
pub fn fit_log_points(logs: &[(f64, f64)]) -> Result<FitResult> {
    if logs.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 points, got {}",
            logs.len()
        )));
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 1e-12 * (1.0 + mx * mx) {
        return Err(Error::Degenerate("all x values are equal".into()));
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_res: f64 = logs.iter().map(|p| (p.1 - intercept - exponent * p.0).powi(2)).sum();
    let r_squared = if syy <= 1e-24 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        exponent,
        constant: intercept.exp(),
        ln_constant: intercept,
        r_squared,
        points: logs.to_vec(),
    })
}

/// One row of the bound table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub c: f64,
    pub delta: f64,
    pub r: u64,
    pub epsilon: f64,
    pub m: u32,
    pub t: Magnitude,
    pub b: Magnitude,
    pub p: Magnitude,
    pub f: Magnitude,
    pub f_mode: FMode,
}

pub fn bound_row(params: &BoundParams) -> Result<BoundRow> {
    let f = eval_f(params)?;
    Ok(BoundRow {
        c: params.c,
        delta: params.delta,
        r: params.r,
        epsilon: f.p.b.epsilon,
        m: f.p.b.m,
        t: f.p.b.t,
        b: f.p.b.b,
        p: f.p.p,
        f: f.f,
        f_mode: f.mode,
    })
}

/// Fitted log-log slopes of `b` (at `params.epsilon`), `p` and `f` over the
/// given radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeReport {
    pub b: FitResult,
    pub p: FitResult,
    pub f: FitResult,
}

pub fn bound_slopes(params: &BoundParams, radii: &[u64]) -> Result<SlopeReport> {
    let mut b = Vec::new();
    let mut p = Vec::new();
    let mut f = Vec::new();
    for &r in radii {
        let q = params.with_r(r);
        let lr = (r as f64).ln();
        b.push((lr, eval_b(&q)?.b.ln));
        let fe = eval_f(&q)?;
        p.push((lr, fe.p.p.ln));
        f.push((lr, fe.f.ln));
    }
    Ok(SlopeReport {
        b: fit_log_points(&b)?,
        p: fit_log_points(&p)?,
        f: fit_log_points(&f)?,
    })
}

/// `1, 2, 4, ..., 2^k`.
pub fn powers_of_two(k: u32) -> Vec<u64> {
    (0..=k).map(|i| 1u64 << i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_a_examples() {
        assert_eq!(residual_a(1.0, 1.0, 1.0), -3.0);
        let a = solve_a(1.0, 1.0, DEFAULT_TOL).unwrap();
        assert!(a > 100.0 && a < 200.0, "{a}");
        let l = 1.0 + a.ln();
        assert!((a - 4.0 * l * l).abs() <= 1e-9);
        assert!(solve_a(1.0, 2.0, DEFAULT_TOL).unwrap() > a);
    }

    #[test]
    fn solve_a_rejects_bad_input() {
        assert!(solve_a(0.0, 1.0, 1e-9).is_err());
        assert!(solve_a(1.5, 1.0, 1e-9).is_err());
        assert!(solve_a(0.5, 0.5, 1e-9).is_err());
        assert!(solve_a(0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn log_space_agrees_with_nominal() {
        for &(d, c) in &[(1.0, 1.0), (0.5, 10.0), (0.25, 2.0), (5.0 / 6.0, 316.0)] {
            let a = solve_a(d, c, DEFAULT_TOL).unwrap();
            let la = solve_ln_a(d, f64::ln(c)).unwrap();
            assert!((a.ln() - la).abs() < 1e-9, "{d} {c}");
        }
    }

    #[test]
    fn m_values() {
        assert_eq!(m_of_epsilon(1.0).unwrap(), 1);
        assert_eq!(m_of_epsilon(0.5).unwrap(), 2);
        assert_eq!(m_of_epsilon(1.0 / 6.0).unwrap(), 18);
        assert_eq!(BoundParams::default_epsilon(0.5), 1.0 / 6.0);
        assert_eq!(BoundParams::default_epsilon(1.0), 1.0);
    }

    #[test]
    fn b_example() {
        let e = eval_b(&BoundParams::new(1.0, 1.0, 1).with_epsilon(1.0)).unwrap();
        assert_eq!(e.m, 1);
        assert_eq!(e.t.exact, Some(168_002));
        let t: u128 = 168_002;
        assert_eq!(e.b.exact, Some(64 * t * t * t * t));
    }

    #[test]
    fn b_uses_n0_floor() {
        let mut p = BoundParams::new(1.0, 1.0, 1).with_epsilon(1.0);
        p.n0 = 1_000_000;
        assert_eq!(eval_b(&p).unwrap().t.exact, Some(1_000_002));
    }

    #[test]
    fn p_examples() {
        let p = eval_p(&BoundParams::new(3.0, 1.0, 7)).unwrap();
        assert!((p.p.value.unwrap() - 948.0).abs() < 1e-9);
        let q = eval_p(&BoundParams::new(1.0, 0.5, 1)).unwrap();
        assert_eq!(q.b.m, 18);
        assert!((q.p.ln - (316f64.ln() + 0.5 * q.b.b.ln)).abs() < 1e-9);
    }

    #[test]
    fn f_examples() {
        let params = BoundParams::new(1.0, 1.0, 1);
        let f = eval_f(&params).unwrap();
        assert_eq!(f.mode, FMode::Nominal);
        let expected = solve_a(5.0 / 6.0, 316.0, DEFAULT_TOL).unwrap();
        assert!((f.f.value.unwrap() - expected).abs() < 1e-9 * expected);
        let f1 = eval_f(&BoundParams::new(1.0, 0.5, 1)).unwrap();
        let f2 = eval_f(&BoundParams::new(1.0, 0.5, 2)).unwrap();
        assert!(f2.f.ln >= f1.f.ln);
        assert_eq!(f1.mode, FMode::LogSpace);
    }

    #[test]
    fn monotone_in_r_and_c() {
        for &d in &[1.0, 0.5, 0.25] {
            for &c in &[1.0, 2.0, 10.0] {
                let mut prev: Option<BoundRow> = None;
                for r in powers_of_two(8) {
                    let row = bound_row(&BoundParams::new(c, d, r)).unwrap();
                    let bigger_c = bound_row(&BoundParams::new(c * 2.0, d, r)).unwrap();
                    assert!(bigger_c.b.ln >= row.b.ln && bigger_c.p.ln >= row.p.ln && bigger_c.f.ln >= row.f.ln);
                    if let Some(pr) = prev {
                        assert!(row.b.ln >= pr.b.ln && row.p.ln >= pr.p.ln && row.f.ln >= pr.f.ln);
                    }
                    prev = Some(row);
                }
            }
        }
    }

    #[test]
    fn fit_examples() {
        let f = fit_exponent(&[(1.0, 1.0), (2.0, 4.0), (4.0, 16.0)]).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-12 && (f.constant - 1.0).abs() < 1e-12);
        assert_eq!(f.r_squared, 1.0);
        assert!(
            fit_exponent(&[(1.0, 5.0), (10.0, 5.0), (100.0, 5.0)])
                .unwrap()
                .exponent
                .abs()
                < 1e-12
        );
        let f = fit_exponent(&[(2.0, 3.0), (4.0, 5.9), (8.0, 12.2)]).unwrap();
        // Closed form: slope = sum (lx - mean)(ly - mean) / sum (lx - mean)^2.
        let xs = [2f64.ln(), 4f64.ln(), 8f64.ln()];
        let ys = [3f64.ln(), 5.9f64.ln(), 12.2f64.ln()];
        let mx = xs.iter().sum::<f64>() / 3.0;
        let my = ys.iter().sum::<f64>() / 3.0;
        let num: f64 = (0..3).map(|i| (xs[i] - mx) * (ys[i] - my)).sum();
        let den: f64 = (0..3).map(|i| (xs[i] - mx).powi(2)).sum();
        assert!((f.exponent - num / den).abs() < 1e-12);
        assert!((f.exponent - 1.0).abs() < 0.05);
        assert!(fit_exponent(&[(3.0, 1.0), (3.0, 2.0), (3.0, 4.0)]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_exponent(&[(1.0, -1.0), (2.0, 2.0), (3.0, 3.0)]).is_err());
    }

    #[test]
    fn slopes_against_closed_form() {
        // ln b = const + (4/delta) ln r once t tracks r^(1/delta).
        for &d in &[1.0, 0.5, 0.25] {
            let s = bound_slopes(&BoundParams::new(1.0, d, 1), &powers_of_two(10)).unwrap();
            assert!((s.b.exponent - 4.0 / d).abs() < 1e-3, "{d}: {}", s.b.exponent);
            let p_slope = (1.0 - d) * (4.0 / d + 1.0);
            assert!((s.p.exponent - p_slope).abs() < 1e-3, "{d}: {}", s.p.exponent);
        }
    }
}
