//! Numerical extraction of the singular asymptotics: weighted limits of the
//! sector power integrals, weighted-derivative limits of the return profile,
//! the singular-series decomposition, the derivative recursion drift, and
//! the sector-extension probes.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::distributions::{sector_dist, DistIndex, DistKind};
use crate::error::{Error, Result};
use crate::grading::order;
use crate::jets::{factorial, ComplexJet};
use crate::quad::QuadSpec;
use crate::sector::{
    branch_power_integral, local_solution, partial_return_integral, root_branch, roots,
};
use crate::special::{beta_like_rat, binom_real};

/// Outcome of one extrapolated limit.
#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub estimate: Complex64,
    pub expected: Complex64,
    pub rel_err: f64,
    pub grid: Vec<f64>,
    pub fit_exponents: Vec<f64>,
}

impl LimitReport {
    pub fn new(
        estimate: Complex64,
        expected: Complex64,
        grid: Vec<f64>,
        fit_exponents: Vec<f64>,
    ) -> Self {
        let rel_err = (estimate - expected).norm() / expected.norm().max(1e-14);
        LimitReport {
            estimate,
            expected,
            rel_err,
            grid,
            fit_exponents,
        }
    }

    pub fn pass(&self, tol: f64) -> bool {
        self.rel_err <= tol
    }

    /// JSON object `{estimate, expected, rel_err, grid, pass}`.
    pub fn to_json(&self, tol: f64) -> serde_json::Value {
        serde_json::json!({
            "estimate": [self.estimate.re, self.estimate.im],
            "expected": [self.expected.re, self.expected.im],
            "rel_err": self.rel_err,
            "grid": self.grid,
            "pass": self.pass(tol),
        })
    }
}

/// Both one-sided limits of a quantity as `s -> 0+` and `s -> 0-`.
#[derive(Debug, Clone, Serialize)]
pub struct SidedLimits {
    pub plus: LimitReport,
    pub minus: LimitReport,
}

/// Estimate `lim s^p g(s)` from samples on a decreasing geometric grid.
///
/// A correction exponent is read off the successive differences of
/// `s^p g(s)` and removed by a least-squares fit; if no usable correction is
/// visible the last point is returned as-is.
pub fn power_limit(samples: &[(f64, Complex64)], p: f64) -> Result<Complex64> {
    Ok(power_limit_detailed(samples, p)?.0)
}

pub fn power_limit_detailed(samples: &[(f64, Complex64)], p: f64) -> Result<(Complex64, Vec<f64>)> {
    if samples.len() < 4 {
        return Err(Error::InsufficientPoints {
            required: 4,
            actual: samples.len(),
        });
    }
    let mut pts: Vec<(f64, Complex64)> = samples.to_vec();
    pts.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let h: Vec<(f64, Complex64)> = pts.iter().map(|&(s, g)| (s, g * s.powf(p))).collect();
    let n = h.len();
    let scale = h
        .iter()
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max)
        .max(1e-300);

    // already converged on the grid
    let tail_diff = (h[n - 1].1 - h[n - 2].1).norm();
    if tail_diff <= 1e-13 * scale {
        return Ok((h[n - 1].1, vec![]));
    }

    // correction exponent from successive differences
    let mut qs = Vec::new();
    let lo = n.saturating_sub(7);
    for i in (lo + 2)..n {
        let d1 = h[i - 1].1 - h[i - 2].1;
        let d2 = h[i].1 - h[i - 1].1;
        let rr = h[i - 1].0 / h[i].0;
        if d1.norm() > 1e-14 * scale && d2.norm() > 1e-14 * scale && rr > 1.0 {
            let q = (d1.norm() / d2.norm()).ln() / rr.ln();
            if q.is_finite() {
                qs.push(q.clamp(0.02, 8.0));
            }
        }
    }
    if qs.is_empty() {
        return Ok((h[n - 1].1, vec![]));
    }
    let q = qs.iter().sum::<f64>() / qs.len() as f64;

    // least squares h = c0 + c1 s^q over the deep half of the grid
    let take = (n / 2).max(4).min(n);
    let rows = &h[n - take..];
    let (mut s0, mut s1, mut s2) = (0.0f64, 0.0f64, 0.0f64);
    let (mut b0, mut b1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for &(s, v) in rows {
        let w = s.powf(q);
        s0 += 1.0;
        s1 += w;
        s2 += w * w;
        b0 += v;
        b1 += v * w;
    }
    let det = s0 * s2 - s1 * s1;
    if det.abs() < 1e-300 {
        return Ok((h[n - 1].1, vec![q]));
    }
    let c0 = (b0 * s2 - b1 * s1) / det;
    Ok((c0, vec![q]))
}

// ---------------------------------------------------------------------------
// Chebyshev fit-then-differentiate on dyadic windows

const CHEB_N: usize = 15; // degree; 16 nodes

/// Fit a degree-15 Chebyshev interpolant to `f` on `[lo, hi]`, differentiate
/// it `order` times and evaluate at the window center.  The window must not
/// contain the singular point.
pub fn window_derivative(
    f: &mut dyn FnMut(f64) -> Result<Complex64>,
    lo: f64,
    hi: f64,
    order: usize,
) -> Result<(f64, Complex64)> {
    assert!(lo < hi);
    let c = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let n = CHEB_N;
    let mut vals = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let x = (std::f64::consts::PI * k as f64 / n as f64).cos();
        vals.push(f(c + half * x)?);
    }
    // Chebyshev coefficients of the interpolant
    let mut coef = vec![Complex64::new(0.0, 0.0); n + 1];
    for (j, cj) in coef.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in vals.iter().enumerate() {
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            acc += v * (w * (std::f64::consts::PI * (j * k) as f64 / n as f64).cos());
        }
        *cj = acc * (2.0 / n as f64);
    }
    coef[0] *= 0.5;
    coef[n] *= 0.5;

    // differentiate in coefficient space
    let mut cur = coef;
    for _ in 0..order {
        let deg = cur.len() - 1;
        let mut der = vec![Complex64::new(0.0, 0.0); deg.max(1)];
        if deg >= 1 {
            let mut next1 = Complex64::new(0.0, 0.0); // d_{j+1}
            let mut next2 = Complex64::new(0.0, 0.0); // d_{j+2}
            for j in (0..deg).rev() {
                let d = next2 + cur[j + 1] * (2.0 * (j + 1) as f64);
                der[j] = d;
                next2 = next1;
                next1 = d;
            }
            der[0] *= 0.5;
        }
        for d in der.iter_mut() {
            *d /= half;
        }
        cur = der;
    }

    // Clenshaw at x = 0 (window center)
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    for j in (1..cur.len()).rev() {
        let b = cur[j] - b2;
        b2 = b1;
        b1 = b;
    }
    let value = cur[0] - b2;
    Ok((c, value))
}

// ---------------------------------------------------------------------------
// Limits of the sector power integrals

/// Verify the weighted limit of the sector power integral:
/// `lim |s|^((a1+a2-m)/m) G^l(1, s)` equals the root-of-unity phase times the
/// Beta-like constant, separately for `s -> 0+` and `s -> 0-`.
pub fn branch_integral_limit(
    m: u32,
    l: u32,
    a1: i32,
    a2: i32,
    spec: &QuadSpec,
) -> Result<SidedLimits> {
    if (a1 + a2) as f64 <= m as f64 {
        return Err(Error::Domain(format!(
            "need a1 + a2 > m, got {a1} + {a2} vs {m}"
        )));
    }
    let p = (a1 + a2 - m as i32) as f64 / m as f64;
    let grid: Vec<f64> = (6..=18).map(|j| 2f64.powi(-j)).collect();
    let rt = roots(m)?;
    let beta = beta_like_rat(
        Rational64::new(a1 as i64, m as i64),
        Rational64::new(a2 as i64, m as i64),
    );

    let side = |sign: f64, phase_e: i64| -> Result<LimitReport> {
        let mut samples = Vec::with_capacity(grid.len());
        for &s in &grid {
            let v = branch_power_integral(m, l, a1, a2, 1.0, sign * s, spec)?;
            samples.push((s, v));
        }
        let (estimate, exps) = power_limit_detailed(&samples, p)?;
        let expected = rt.theta0_pow(phase_e * (a2 - a1) as i64) * beta;
        Ok(LimitReport::new(estimate, expected, grid.clone(), exps))
    };

    Ok(SidedLimits {
        plus: side(1.0, 2 * l as i64)?,
        minus: side(-1.0, 2 * l as i64 + 1)?,
    })
}

// ---------------------------------------------------------------------------
// Weighted-derivative limits of the return profile

/// The pair `(n, b)`: smallest `n >= (k - (m-2))/m` and the defect
/// `b = n - (k - (m-2))/m` in `[0, 1)`.
pub fn profile_class(m: u32, k: u32) -> (usize, f64) {
    let o = order(m, k);
    let n = o.ceil().to_integer().max(0);
    let b = (Rational64::from_integer(n) - o).to_f64().unwrap();
    (n as usize, b)
}

fn check_vanishing_sector(f: &ComplexJet, m: u32, sector: u32, below: u32) -> Result<()> {
    let scale = f.sup_coeff().max(1.0);
    for j in 0..below {
        let c = sector_dist(f, m, j, sector)?;
        if c.norm() > 1e-9 * scale {
            return Err(Error::HypothesisViolated(format!(
                "sector distribution (k = {j}, l = {sector}) = {c} is nonzero"
            )));
        }
    }
    Ok(())
}

/// Weighted one-sided limit of the (n+1)-st derivative of the return
/// profile: `lim |s|^(b+1) D^(n+1) phi_(f,l)(s)` over the side selected by
/// `parity`, compared against the closed form
/// `(-1)^((1-parity)(n+1)) (n+1)!/k! binom(b, n+1) C^k_(2l+parity)(f)`.
///
/// The lower sector distributions of this side must vanish.
pub fn profile_derivative_limit(
    f: &ComplexJet,
    m: u32,
    l: u32,
    parity: u32,
    k: u32,
    spec: &QuadSpec,
) -> Result<LimitReport> {
    if l >= m || parity > 1 {
        return Err(Error::OutOfRange(format!(
            "l = {l} must be < m, parity = {parity} must be 0 or 1"
        )));
    }
    if f.order() < k as usize {
        return Err(Error::OrderTooSmall {
            required: k as usize,
            actual: f.order(),
        });
    }
    let sector = 2 * l + parity;
    check_vanishing_sector(f, m, sector, k)?;

    let (n, b) = profile_class(m, k);
    let mut samples = Vec::new();
    let mut grid = Vec::new();
    for j in 6..=18 {
        let s = 2f64.powi(-j);
        let (lo, hi) = if parity == 0 {
            (s, 2.0 * s)
        } else {
            (-2.0 * s, -s)
        };
        let mut phi = |t: f64| partial_return_integral(f, m, l, 1.0, t, spec);
        let (at, d) = window_derivative(&mut phi, lo, hi, n + 1)?;
        samples.push((at.abs(), d));
        grid.push(at.abs());
    }
    let (estimate, exps) = power_limit_detailed(&samples, b + 1.0)?;

    let c_k = sector_dist(f, m, k, sector)?;
    let sgn = if ((1 - parity as i32) * (n as i32 + 1)) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let expected =
        c_k * (sgn * factorial(n + 1) / factorial(k as usize) * binom_real(b, n as u32 + 1));
    Ok(LimitReport::new(estimate, expected, grid, exps))
}

// ---------------------------------------------------------------------------
// Singular-series decomposition of the return profile

/// Result of fitting the singular series of the return profile.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileDecomposition {
    /// Fitted coefficients of the singular terms, degree 0 .. k-1;
    /// coefficient `j` multiplies `|s|^((j-(m-2))/m)`, with an extra
    /// `-log|s|` factor when `j = m-2 mod m`.
    pub coefficients: Vec<Complex64>,
    /// sup over the diagnostic windows of `|s|^(b+1) |D^(n+1) remainder|`.
    pub remainder_diag: f64,
    /// Per-window diagnostics `(|s|, value)`, shallow to deep.
    pub window_diags: Vec<(f64, f64)>,
}

/// Value (order 0) or t-derivative of the singular basis element of degree
/// `j`: `|t|^alpha` or `-|t|^alpha ln|t|`, `alpha = (j - (m-2))/m`.
fn singular_term(m: u32, j: u32, t: f64, order: usize) -> f64 {
    let alpha = (j as f64 - (m as f64 - 2.0)) / m as f64;
    let has_log = (j as i64 - (m as i64 - 2)).rem_euclid(m as i64) == 0;
    let a = t.abs();
    let sgn: f64 = if t < 0.0 { -1.0 } else { 1.0 };
    let mut pw = alpha;
    // ca * ln(a) + cb, times a^pw
    let (mut ca, mut cb) = if has_log { (-1.0, 0.0) } else { (0.0, 1.0) };
    for _ in 0..order {
        let (na, nb) = (pw * ca, pw * cb + ca);
        ca = na;
        cb = nb;
        pw -= 1.0;
    }
    // each d/dt contributes one factor of sign(t) through d|t|/dt
    sgn.powi(order as i32) * a.powf(pw) * (ca * a.ln() + cb)
}

/// Least squares with a real design matrix and complex right-hand side, by
/// modified Gram-Schmidt QR with column scaling.
fn lstsq(a: &[Vec<f64>], y: &[Complex64]) -> Result<Vec<Complex64>> {
    let rows = a.len();
    let cols = a[0].len();
    assert!(rows >= cols);
    let mut q: Vec<Vec<f64>> = (0..cols)
        .map(|j| a.iter().map(|r| r[j]).collect())
        .collect();
    let scales: Vec<f64> = q
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300))
        .collect();
    for (c, s) in q.iter_mut().zip(&scales) {
        for v in c.iter_mut() {
            *v /= s;
        }
    }
    let mut r = vec![vec![0.0f64; cols]; cols];
    for j in 0..cols {
        for i in 0..j {
            let dot: f64 = q[i].iter().zip(q[j].iter()).map(|(x, y)| x * y).sum();
            r[i][j] = dot;
            let qi = q[i].clone();
            for (v, x) in q[j].iter_mut().zip(qi.iter()) {
                *v -= dot * x;
            }
        }
        let norm: f64 = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-10 {
            return Err(Error::IllConditionedFit(norm));
        }
        r[j][j] = norm;
        for v in q[j].iter_mut() {
            *v /= norm;
        }
    }
    let mut rhs: Vec<Complex64> = (0..cols)
        .map(|j| y.iter().zip(q[j].iter()).map(|(v, x)| v * x).sum())
        .collect();
    for j in (0..cols).rev() {
        for i in (j + 1)..cols {
            let t = rhs[i] * r[j][i];
            rhs[j] -= t;
        }
        rhs[j] /= r[j][j];
    }
    Ok(rhs.iter().zip(&scales).map(|(v, s)| v / s).collect())
}

/// Fit the singular series of the return profile on one side and report the
/// remainder diagnostic.  The fitted coefficient of degree `j` matches the
/// sector distribution `C^j / j!`; the log column is included exactly when
/// `j = m-2 mod m`, never inferred from the data.
pub fn decompose_profile(
    f: &ComplexJet,
    m: u32,
    l: u32,
    parity: u32,
    k: u32,
    spec: &QuadSpec,
) -> Result<ProfileDecomposition> {
    if l >= m || parity > 1 {
        return Err(Error::OutOfRange(format!(
            "l = {l} must be < m, parity = {parity} must be 0 or 1"
        )));
    }
    if f.order() < k as usize {
        return Err(Error::OrderTooSmall {
            required: k as usize,
            actual: f.order(),
        });
    }
    let sign = if parity == 0 { 1.0 } else { -1.0 };
    // fit grid: half-octave geometric, 2^-8 .. 2^-20
    let grid: Vec<f64> = (0..=24).map(|i| 2f64.powf(-8.0 - 0.5 * i as f64)).collect();
    let mut rows = Vec::with_capacity(grid.len());
    let mut vals = Vec::with_capacity(grid.len());
    for &s in &grid {
        let mut row = Vec::with_capacity(k as usize + 4);
        for j in 0..k {
            row.push(singular_term(m, j, s, 0));
        }
        for p in 0..4 {
            row.push(s.powi(p));
        }
        rows.push(row);
        vals.push(partial_return_integral(f, m, l, 1.0, sign * s, spec)?);
    }
    let solution = lstsq(&rows, &vals)?;
    let coefficients: Vec<Complex64> = solution[..k as usize].to_vec();

    // remainder diagnostic on shallower dyadic windows
    let (n, b) = profile_class(m, k);
    let mut window_diags = Vec::new();
    for j in 6..=13 {
        let s = 2f64.powi(-j);
        let (lo, hi) = if parity == 0 {
            (s, 2.0 * s)
        } else {
            (-2.0 * s, -s)
        };
        let mut phi = |t: f64| partial_return_integral(f, m, l, 1.0, t, spec);
        let (at, dphi) = window_derivative(&mut phi, lo, hi, n + 1)?;
        let mut dser = Complex64::new(0.0, 0.0);
        for (jj, c) in coefficients.iter().enumerate() {
            dser += c * singular_term(m, jj as u32, at, n + 1);
        }
        let w = at.abs().powf(b + 1.0) * (dphi - dser).norm();
        window_diags.push((at.abs(), w));
    }
    let remainder_diag = window_diags.iter().map(|&(_, w)| w).fold(0.0, f64::max);
    Ok(ProfileDecomposition {
        coefficients,
        remainder_diag,
        window_diags,
    })
}

// ---------------------------------------------------------------------------
// Derivative recursion drift

/// Max over a shrinking grid of the difference between the numerically
/// differentiated sector power integral and its one-term recursion
/// `n! (-2i)^n binom(-a2/m, n) G_(a1, a2+nm)(1, s)`.  The difference extends
/// analytically to `s = 0`, so it stays bounded while both terms may
/// diverge.
pub fn derivative_recursion_drift(
    m: u32,
    l: u32,
    a1: i32,
    a2: i32,
    n: u32,
    spec: &QuadSpec,
) -> Result<f64> {
    if n > 4 {
        return Err(Error::OutOfRange("derivative order n must be <= 4".into()));
    }
    let factor = Complex64::new(0.0, -2.0).powu(n)
        * factorial(n as usize)
        * binom_real(-(a2 as f64) / m as f64, n);
    let mut max_diff = 0.0f64;
    for j in 4..=12 {
        let s = 2f64.powi(-j);
        let mut g = |t: f64| branch_power_integral(m, l, a1, a2, 1.0, t, spec);
        let (at, d) = window_derivative(&mut g, s, 2.0 * s, n as usize)?;
        let rhs =
            factor * branch_power_integral(m, l, a1, a2 + n as i32 * m as i32, 1.0, at, spec)?;
        max_diff = max_diff.max((d - rhs).norm());
    }
    Ok(max_diff)
}

// ---------------------------------------------------------------------------
// Sector extension probes

/// The weighted-derivative constant of the local solution's trace along the
/// exit curve of sector `l` (0..2m), probed at one dyadic scale.
///
/// The trace is sampled through the local solution itself at the points
/// `G_(l/2)(1 + i t)` with the sign of `t` selected by the sector's parity;
/// the constant is `|t|^(b+1) |D^(n+1)|` of the trace at `|t| ~ scale`, with
/// `(n, b)` the profile class of the target degree `k`.  Bounded constants
/// along shrinking scales witness a smooth extension on the closed sector;
/// divergence witnesses the converse.
pub fn extension_trace_constant(
    f: &ComplexJet,
    m: u32,
    l: u32,
    k: u32,
    scale: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    if l >= 2 * m {
        return Err(Error::OutOfRange(format!("sector l = {l} must be < 2m")));
    }
    if !(scale > 0.0 && scale <= 0.5) {
        return Err(Error::Domain(format!(
            "probe scale {scale} must lie in (0, 1/2]"
        )));
    }
    let l2 = l / 2;
    let parity = l % 2;
    let (n, b) = profile_class(m, k);
    let (lo, hi) = if parity == 0 {
        (scale, 2.0 * scale)
    } else {
        (-2.0 * scale, -scale)
    };
    let mut trace = |t: f64| {
        let w = root_branch(m, l2, Complex64::new(1.0, t))?;
        local_solution(f, m, w, spec)
    };
    let (at, d) = window_derivative(&mut trace, lo, hi, n + 1)?;
    Ok(at.abs().powf(b + 1.0) * d.norm())
}

/// Assert the vanishing hypotheses for a smooth extension of the local
/// solution on the closed sector `l` at degree `k`, then probe the trace
/// constant along a grid of scales and return the maximum.  A finite
/// constant is the numerical witness of the extension; the violated
/// distribution is named in the error otherwise.
pub fn sector_extension_check(
    f: &ComplexJet,
    m: u32,
    l: u32,
    k: u32,
    spec: &QuadSpec,
) -> Result<f64> {
    if l >= 2 * m {
        return Err(Error::OutOfRange(format!("sector l = {l} must be < 2m")));
    }
    check_vanishing_sector(f, m, l, k)?;
    // partial-derivative family below the matching vertex degree
    let n_target = order(m, k).ceil().to_integer();
    let k_under = (n_target + m as i64 - 2).clamp(0, k as i64) as u32;
    let fscale = f.sup_coeff().max(1.0);
    for j in 0..k_under {
        for i in 0..=j.min(m - 2) {
            let idx = DistIndex::new(m, j, i, DistKind::PartialJ)?;
            if idx.is_passive() {
                continue;
            }
            let v = crate::distributions::partial_dist(f, m, j, i)?;
            if v.norm() > 1e-9 * fscale {
                return Err(Error::HypothesisViolated(format!(
                    "partial distribution (k = {j}, j = {i}) = {v} is nonzero"
                )));
            }
        }
    }
    let mut max_c = 0.0f64;
    for j in 5..=12 {
        max_c = max_c.max(extension_trace_constant(f, m, l, k, 2f64.powi(-j), spec)?);
    }
    Ok(max_c)
}
