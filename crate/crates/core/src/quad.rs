//! Adaptive quadrature for the sector integrands.
//!
//! All sector integrals in this crate reduce to one-dimensional integrals of
//! a function that is smooth away from `v = 0` and peaked on a scale `|s|`
//! around it.  The engine combines adaptive 15-point Gauss-Kronrod panels
//! with a graded subdivision toward the peak; the innermost cell is handled
//! with the substitution `v = |s| sinh t`, which flattens the peak exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How an integrable concentration at `v = 0` is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingPolicy {
    /// Split the range at `-|s| * 8^k` (and `+|s| * 8^k` where relevant) and
    /// apply the sinh substitution on the innermost cell.
    GradedSubdivision,
    /// Apply the sinh substitution on the whole range, split at `v = 0`.
    SinhSubstitution,
}

/// Tolerances, subdivision limits and the singularity policy for every
/// quadrature performed by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    pub sing_policy: SingPolicy,
}

impl QuadSpec {
    pub fn new(
        abs_tol: f64,
        rel_tol: f64,
        max_depth: u32,
        sing_policy: SingPolicy,
    ) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) {
            return Err(Error::Domain(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if max_depth < 10 {
            return Err(Error::Domain("max_depth must be at least 10".into()));
        }
        Ok(QuadSpec {
            abs_tol,
            rel_tol,
            max_depth,
            sing_policy,
        })
    }

    /// Tight tolerances used by the asymptotic extraction routines.
    pub fn deep() -> Self {
        QuadSpec {
            abs_tol: 5e-14,
            rel_tol: 1e-13,
            max_depth: 40,
            sing_policy: SingPolicy::GradedSubdivision,
        }
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_depth: 32,
            sing_policy: SingPolicy::GradedSubdivision,
        }
    }
}

/// Value and estimated absolute error of a quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadValue {
    pub value: Complex64,
    pub err: f64,
}

// 15-point Kronrod abscissae on [-1, 1] (positive half) with the embedded
// 7-point Gauss weights, QUADPACK values.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.norm() * WGK[7];

    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        let sum = f1 + f2;
        kronrod += sum * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += sum * WG[j / 2];
        }
    }

    let value = kronrod * half;
    let err_raw = ((kronrod - gauss) * half).norm();
    // rounding floor: summation noise scales with the integral of |f|
    let floor = resabs * half.abs() * f64::EPSILON * 4.0;
    (value, err_raw.max(floor))
}

/// Adaptive bisection on `[a, b]`: repeatedly split the panel with the worst
/// error estimate until the total estimate meets the tolerance or the panel
/// budget is exhausted.  The tolerance is the larger of `tol_abs` and
/// `tol_rel` times the running value estimate; callers re-check the achieved
/// estimate against their spec.
pub fn adaptive_rel<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol_abs: f64,
    tol_rel: f64,
    max_depth: u32,
) -> QuadValue {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    struct Panel {
        a: f64,
        b: f64,
        value: Complex64,
        err: f64,
        depth: u32,
    }

    #[derive(PartialEq)]
    struct Key(f64);
    impl Eq for Key {}
    impl PartialOrd for Key {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Key {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }

    if a == b {
        return QuadValue {
            value: Complex64::new(0.0, 0.0),
            err: 0.0,
        };
    }
    let (value, err) = gk15(f, a, b);
    let mut total_value = value;
    let mut total_err = err;
    let mut heap: BinaryHeap<(Key, Reverse<usize>, usize)> = BinaryHeap::new();
    let mut store: Vec<Panel> = vec![Panel {
        a,
        b,
        value,
        err,
        depth: 0,
    }];
    heap.push((Key(err), Reverse(0), 0));
    let budget = 2048usize;
    let mut splits = 0usize;

    while splits < budget {
        let tol = tol_abs.max(tol_rel * total_value.norm());
        if total_err <= tol {
            break;
        }
        let Some((_, _, i)) = heap.pop() else { break };
        let p = &store[i];
        let mid = 0.5 * (p.a + p.b);
        if p.depth >= max_depth || !(p.a < mid && mid < p.b) {
            // keeps contributing its value and error, but is never split again
            continue;
        }
        let (pa, pb, pv, pe, pd) = (p.a, p.b, p.value, p.err, p.depth);
        let (lv, le) = gk15(f, pa, mid);
        let (rv, re) = gk15(f, mid, pb);
        total_value += lv + rv - pv;
        total_err += le + re - pe;
        store.push(Panel {
            a: pa,
            b: mid,
            value: lv,
            err: le,
            depth: pd + 1,
        });
        heap.push((Key(le), Reverse(store.len() - 1), store.len() - 1));
        store.push(Panel {
            a: mid,
            b: pb,
            value: rv,
            err: re,
            depth: pd + 1,
        });
        heap.push((Key(re), Reverse(store.len() - 1), store.len() - 1));
        splits += 1;
    }

    QuadValue {
        value: total_value,
        err: total_err,
    }
}

/// Absolute-tolerance adaptive bisection on `[a, b]`.
pub fn adaptive<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> QuadValue {
    adaptive_rel(f, a, b, tol, 0.0, max_depth)
}

/// Integrate `f` over `[lo, hi]` when `f` is smooth except for an integrable
/// concentration of width `scale` around `v = 0`.
///
/// With `scale = 0` (or when `0` lies well outside the range) this is plain
/// adaptive Gauss-Kronrod.
pub fn singular_peak<F: Fn(f64) -> Complex64>(
    f: &F,
    lo: f64,
    hi: f64,
    scale: f64,
    spec: &QuadSpec,
) -> QuadValue {
    assert!(lo <= hi);
    let cell = |a: f64, b: f64| adaptive_rel(f, a, b, spec.abs_tol, spec.rel_tol, spec.max_depth);
    if scale >= 0.1 || scale == 0.0 || hi < -scale || lo > scale {
        return cell(lo, hi);
    }

    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut add = |q: QuadValue| {
        total += q.value;
        err += q.err;
    };

    match spec.sing_policy {
        SingPolicy::GradedSubdivision => {
            // Breakpoints at +-scale * 8^k, then a sinh cell across the peak.
            let inner_lo = lo.max(-scale);
            let inner_hi = hi.min(scale);
            add(sinh_cell(f, inner_lo, inner_hi, scale, spec));
            let mut edge = scale;
            while -edge > lo {
                let next = (edge * 8.0).min(-lo);
                add(cell(-next, -edge));
                edge = next;
            }
            let mut edge = scale;
            while edge < hi {
                let next = (edge * 8.0).min(hi);
                add(cell(edge, next));
                edge = next;
            }
        }
        SingPolicy::SinhSubstitution => {
            add(sinh_cell(f, lo, hi.min(0.0), scale, spec));
            if hi > 0.0 {
                add(sinh_cell(f, lo.max(0.0), hi, scale, spec));
            }
        }
    }
    QuadValue { value: total, err }
}

/// `v = scale * sinh t` on `[lo, hi]`; exact for the `(v^2 + s^2)^-p` peaks.
fn sinh_cell<F: Fn(f64) -> Complex64>(
    f: &F,
    lo: f64,
    hi: f64,
    scale: f64,
    spec: &QuadSpec,
) -> QuadValue {
    if lo >= hi {
        return QuadValue {
            value: Complex64::new(0.0, 0.0),
            err: 0.0,
        };
    }
    let t_lo = (lo / scale).asinh();
    let t_hi = (hi / scale).asinh();
    let g = |t: f64| {
        let v = scale * t.sinh();
        f(v) * (scale * t.cosh())
    };
    adaptive_rel(&g, t_lo, t_hi, spec.abs_tol, spec.rel_tol, spec.max_depth)
}

/// Check an achieved error estimate against the spec for a given value.
pub fn check_tolerance(q: QuadValue, spec: &QuadSpec) -> Result<Complex64> {
    let allowed = spec.abs_tol.max(spec.rel_tol * q.value.norm());
    if q.err > allowed * 16.0 {
        // A modest grace factor: the GK error estimator is conservative.
        Err(Error::ToleranceNotMet {
            achieved: q.err,
            requested: allowed,
        })
    } else {
        Ok(q.value)
    }
}
