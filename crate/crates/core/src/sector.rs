//! Root branches, the sector power integrals, the F/G-type auxiliary
//! functions, and the three integral transforms attached to an observable:
//! the partial return integral, the return profile, and the sectorwise local
//! solution.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jets::ComplexJet;
use crate::quad::{check_tolerance, singular_peak, QuadSpec, QuadValue};
use crate::special::RootsOfUnity;

/// The `l`-th branch of the m-th root with the cut on the positive real
/// axis: `Arg` is taken in `[0, 2pi)` and divided by `m`, then rotated by
/// the `l`-th m-th root of unity.
pub fn root_branch(m: u32, l: u32, z: Complex64) -> Result<Complex64> {
    if m < 2 {
        return Err(Error::Domain(format!("m = {m} must be >= 2")));
    }
    if l >= m {
        return Err(Error::OutOfRange(format!(
            "branch index l = {l} must be < m = {m}"
        )));
    }
    if z.norm_sqr() == 0.0 {
        return Err(Error::Vertex);
    }
    let mut arg = z.arg();
    if arg < 0.0 {
        arg += 2.0 * std::f64::consts::PI;
    }
    let r = z.norm().powf(1.0 / m as f64);
    let angle = (arg + 2.0 * std::f64::consts::PI * l as f64) / m as f64;
    Ok(Complex64::from_polar(r, angle))
}

/// Index of the (2m-fold) angular sector containing `w`, i.e. the `l` with
/// `Arg w` in `[pi l / m, pi (l+1) / m)`.
pub fn sector_index(m: u32, w: Complex64) -> Result<u32> {
    if w.norm_sqr() == 0.0 {
        return Err(Error::Vertex);
    }
    let mut arg = w.arg();
    if arg < 0.0 {
        arg += 2.0 * std::f64::consts::PI;
    }
    let l = (arg * m as f64 / std::f64::consts::PI).floor() as i64;
    Ok((l.rem_euclid(2 * m as i64)) as u32)
}

/// A point of a closed angular sector, `Arg(w)` within
/// `[pi l / m, pi (l+1) / m]`.
#[derive(Debug, Clone, Copy)]
pub struct SectorPoint {
    pub m: u32,
    pub l: u32,
    pub w: Complex64,
}

impl SectorPoint {
    pub fn new(m: u32, l: u32, w: Complex64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("m = {m} must be >= 2")));
        }
        if l >= 2 * m {
            return Err(Error::OutOfRange(format!(
                "sector index l = {l} must be < 2m"
            )));
        }
        if w.norm_sqr() == 0.0 {
            return Err(Error::Vertex);
        }
        let pi = std::f64::consts::PI;
        let mut arg = w.arg();
        if arg < 0.0 {
            arg += 2.0 * pi;
        }
        let lo = pi * l as f64 / m as f64;
        let hi = pi * (l + 1) as f64 / m as f64;
        let slack = 1e-12 * (1.0 + arg.abs());
        if arg < lo - slack || arg > hi + slack {
            return Err(Error::Domain(format!(
                "Arg(w) = {arg} outside sector [{lo}, {hi}]"
            )));
        }
        Ok(SectorPoint { m, l, w })
    }
}

/// The circular-sector predicate: `(u, s) != (0, 0)` and `u <= r |s|`.
pub fn in_shrinking_sector(r: f64, u: f64, s: f64) -> bool {
    (u != 0.0 || s != 0.0) && u <= r * s.abs()
}

/// Things the sector transforms can integrate: anything that can produce the
/// `(n1, n2)` partial derivative at a point of the closed sector domain.
/// Jets qualify; closures must supply an analytic extension themselves.
pub trait SectorMap {
    fn deriv(&self, n1: u32, n2: u32, w: Complex64) -> Complex64;

    fn value(&self, w: Complex64) -> Complex64 {
        self.deriv(0, 0, w)
    }
}

impl SectorMap for ComplexJet {
    fn deriv(&self, n1: u32, n2: u32, w: Complex64) -> Complex64 {
        self.derivative(n1 as usize, n2 as usize).eval(w)
    }
}

impl<F: Fn(u32, u32, Complex64) -> Complex64> SectorMap for F {
    fn deriv(&self, n1: u32, n2: u32, w: Complex64) -> Complex64 {
        self(n1, n2, w)
    }
}

fn powi(z: Complex64, a: i32) -> Complex64 {
    if a == 0 {
        Complex64::new(1.0, 0.0)
    } else if a > 0 {
        z.powu(a as u32)
    } else {
        z.powu((-a) as u32).finv()
    }
}

/// Integrand of the sector power integral: `G_l(v + is)^(-a1) *
/// conj(G_l(v + is))^(-a2)`.
pub fn branch_power_kernel(m: u32, l: u32, a1: i32, a2: i32, v: f64, s: f64) -> Result<Complex64> {
    let g = root_branch(m, l, Complex64::new(v, s))?;
    Ok(powi(g, -a1) * powi(g.conj(), -a2))
}

// tolerate float drift from round trips through the covering map
fn sector_range_check(u: f64, s: f64) -> Result<(f64, f64)> {
    let slack = 1e-9;
    if u.abs() > 1.0 + slack || s.abs() > 1.0 + slack {
        return Err(Error::Domain(format!("({u}, {s}) outside the unit square")));
    }
    Ok((u.clamp(-1.0, 1.0), s.clamp(-1.0, 1.0)))
}

/// The sector power integral of the root branch over `[-1, u]` at height `s`.
///
/// At `s = 0` only the integrable regime `u < 0`, `(a1 + a2)/m < 1` is
/// accepted; anything else is a typed divergence, never a NaN.
pub fn branch_power_integral(
    m: u32,
    l: u32,
    a1: i32,
    a2: i32,
    u: f64,
    s: f64,
    spec: &QuadSpec,
) -> Result<Complex64> {
    let (u, s) = sector_range_check(u, s)?;
    if s == 0.0 && !(u < 0.0 && ((a1 + a2) as f64) < m as f64) {
        return Err(Error::DivergentAtZero);
    }
    if m < 2 || l >= m {
        return Err(Error::OutOfRange(format!("l = {l} must be < m = {m}")));
    }
    let f = |v: f64| branch_power_kernel(m, l, a1, a2, v, s).expect("v + is != 0 on the path");
    let q = singular_peak(&f, -1.0, u, s.abs(), spec);
    check_tolerance(q, spec)
}

/// Degree of an F-type function: `(n1 + n2 + a1 + a2) / m`.
pub fn ftype_degree(m: u32, n1: u32, n2: u32, a1: i32, a2: i32) -> f64 {
    (n1 as f64 + n2 as f64 + a1 as f64 + a2 as f64) / m as f64
}

/// Degree of a G-type function: the F-type degree minus one.
pub fn gtype_degree(m: u32, n1: u32, n2: u32, a1: i32, a2: i32) -> f64 {
    ftype_degree(m, n1, n2, a1, a2) - 1.0
}

/// Pointwise F-type value
/// `(D^(n1, n2) f)(G_l(u, s)) * G_l(u, s)^(-a1) * conj(G_l(u, s))^(-a2)`.
#[allow(clippy::too_many_arguments)]
pub fn ftype_value(
    f: &dyn SectorMap,
    m: u32,
    l: u32,
    n1: u32,
    n2: u32,
    a1: i32,
    a2: i32,
    u: f64,
    s: f64,
) -> Result<Complex64> {
    let g = root_branch(m, l, Complex64::new(u, s))?;
    Ok(f.deriv(n1, n2, g) * powi(g, -a1) * powi(g.conj(), -a2))
}

/// G-type value: the `v`-antiderivative of the F-type function from `-1`.
#[allow(clippy::too_many_arguments)]
pub fn gtype_integral(
    f: &dyn SectorMap,
    m: u32,
    l: u32,
    n1: u32,
    n2: u32,
    a1: i32,
    a2: i32,
    u: f64,
    s: f64,
    spec: &QuadSpec,
) -> Result<Complex64> {
    let (u, s) = sector_range_check(u, s)?;
    if s == 0.0 && !(u < 0.0 && ftype_degree(m, 0, 0, a1, a2) < 1.0) {
        return Err(Error::DivergentAtZero);
    }
    let g = |v: f64| ftype_value(f, m, l, n1, n2, a1, a2, v, s).expect("v + is != 0 on the path");
    let q = singular_peak(&g, -1.0, u, s.abs(), spec);
    check_tolerance(q, spec)
}

fn profile_kernel(f: &dyn SectorMap, m: u32, l: u32, v: f64, s: f64) -> Complex64 {
    let g = root_branch(m, l, Complex64::new(v, s)).expect("v + is != 0 on the path");
    let w = (v * v + s * s).powf(-((m as f64 - 1.0) / m as f64));
    f.value(g) * w
}

/// The partial return integral
/// `int from -1 to u of f(G_l(v, s)) / (v^2 + s^2)^((m-1)/m) dv`.
pub fn partial_return_integral(
    f: &dyn SectorMap,
    m: u32,
    l: u32,
    u: f64,
    s: f64,
    spec: &QuadSpec,
) -> Result<Complex64> {
    let (u, s) = sector_range_check(u, s)?;
    if m < 2 || l >= m {
        return Err(Error::OutOfRange(format!("l = {l} must be < m = {m}")));
    }
    if s == 0.0 {
        if u >= 0.0 {
            return Err(Error::Slit);
        }
        // the integrand is smooth on [-1, u] for u < 0
    }
    let g = |v: f64| profile_kernel(f, m, l, v, s);
    let q = singular_peak(&g, -1.0, u, s.abs(), spec);
    check_tolerance(q, spec)
}

/// Return profile of one sector: the partial return integral at `u = 1`.
/// The integrand is non-integrable across `v = 0` at `s = 0`, so `s != 0`.
pub fn return_profile(
    f: &dyn SectorMap,
    m: u32,
    l: u32,
    s: f64,
    spec: &QuadSpec,
) -> Result<Complex64> {
    if s == 0.0 {
        return Err(Error::DivergentAtZero);
    }
    partial_return_integral(f, m, l, 1.0, s, spec)
}

/// Unchecked return profile value with its achieved error estimate
/// (used by sweep outputs that report `est_err` per row).
pub fn return_profile_estimate(
    f: &dyn SectorMap,
    m: u32,
    l: u32,
    s: f64,
    spec: &QuadSpec,
) -> Result<QuadValue> {
    if s == 0.0 {
        return Err(Error::DivergentAtZero);
    }
    let (_, s) = sector_range_check(1.0, s)?;
    let g = |v: f64| profile_kernel(f, m, l, v, s);
    Ok(singular_peak(&g, -1.0, 1.0, s.abs(), spec))
}

/// The sectorwise local solution: `F_f(w) = script-F at z = w^m` on the
/// sector of `w`.  Errors on the excluded slit `([0,1] x {0})^(1/m)`.
pub fn local_solution(
    f: &dyn SectorMap,
    m: u32,
    w: Complex64,
    spec: &QuadSpec,
) -> Result<Complex64> {
    if w.norm_sqr() == 0.0 {
        return Err(Error::Vertex);
    }
    let z = powi(w, m as i32);
    let (u, s) = (z.re, z.im);
    if s == 0.0 && u >= 0.0 {
        return Err(Error::Slit);
    }
    let two_l = sector_index(m, w)?;
    let l = two_l / 2;
    partial_return_integral(f, m, l, u, s, spec)
}

/// Helper shared with the asymptotics module: the roots-of-unity pack.
pub fn roots(m: u32) -> Result<RootsOfUnity> {
    RootsOfUnity::new(m)
}
