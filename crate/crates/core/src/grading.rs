//! Regularity bookkeeping: the graded smoothness scale, its numeric value,
//! the log-modulus, truncated powers and the smoothness budget `k_r`.

use num_rational::Rational64;
use num_traits::ToPrimitive;
use std::cmp::Ordering;

use crate::error::{Error, Result};

/// A point of the regularity scale: either a non-integer base in (-1, inf)
/// or an integer base in {-1, 0, 1, ...} carrying the log-modulus flag.
///
/// Bases are stored exactly so that branch selection never depends on float
/// equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegularityGrade {
    base: Rational64,
    eta_flag: bool,
}

impl RegularityGrade {
    pub fn new(base: Rational64, eta_flag: bool) -> Result<Self> {
        let minus_one = Rational64::from_integer(-1);
        if eta_flag {
            if !base.is_integer() || base < minus_one {
                return Err(Error::Domain(format!(
                    "eta-flagged base {base} must be an integer >= -1"
                )));
            }
        } else if base.is_integer() || base <= minus_one {
            return Err(Error::Domain(format!(
                "plain base {base} must be a non-integer > -1"
            )));
        }
        Ok(RegularityGrade { base, eta_flag })
    }

    pub fn base(&self) -> Rational64 {
        self.base
    }

    pub fn eta_flag(&self) -> bool {
        self.eta_flag
    }

    /// The numeric value `v`: the base itself, or base + 1 on the eta branch.
    pub fn value(&self) -> Rational64 {
        if self.eta_flag {
            self.base + 1
        } else {
            self.base
        }
    }

    pub fn value_f64(&self) -> f64 {
        self.value().to_f64().unwrap()
    }
}

impl PartialOrd for RegularityGrade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RegularityGrade {
    /// Total order consistent with the numeric value `v`; `v` is injective on
    /// the scale (plain grades have non-integer values, eta grades integer).
    fn cmp(&self, other: &Self) -> Ordering {
        self.value().cmp(&other.value())
    }
}

impl std::fmt::Display for RegularityGrade {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.eta_flag {
            write!(f, "{}+eta", self.base)
        } else {
            write!(f, "{}", self.base)
        }
    }
}

/// The log-modulus: `-x log x` on `[0, 1/e]`, constant `1/e` beyond.
pub fn eta_modulus(x: f64) -> f64 {
    assert!(x >= 0.0, "eta_modulus needs x >= 0");
    let e_inv = (-1.0f64).exp();
    if x == 0.0 {
        0.0
    } else if x <= e_inv {
        -x * x.ln()
    } else {
        e_inv
    }
}

/// The truncated power scale on (0, 1]:
/// `(s^a - 1)/(-a) + 1` for `a < 0`, `1 - log s` for `a = 0`, `1` for `a > 0`.
pub fn truncated_power(s: f64, a: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Domain(format!(
            "truncated_power needs s in (0, 1], got {s}"
        )));
    }
    Ok(if a < 0.0 {
        (s.powf(a) - 1.0) / (-a) + 1.0
    } else if a == 0.0 {
        1.0 - s.ln()
    } else {
        1.0
    })
}

/// Order of the k-th distribution at a saddle of multiplicity m:
/// `(k - (m-2)) / m`.
pub fn order(m: u32, k: u32) -> Rational64 {
    Rational64::new(k as i64 - (m as i64 - 2), m as i64)
}

/// Exponent of the k-th distribution: the order itself off the integers,
/// otherwise dropped by one with the eta flag.
pub fn exponent(m: u32, k: u32) -> RegularityGrade {
    let o = order(m, k);
    if o.is_integer() {
        RegularityGrade::new(o - 1, true).expect("integer base >= -1")
    } else {
        RegularityGrade::new(o, false).expect("non-integer base > -1")
    }
}

/// Vertex-scale order `k - (m-2)`.
pub fn vertex_order(m: u32, k: u32) -> i64 {
    k as i64 - (m as i64 - 2)
}

/// Vertex-scale exponent `k - (m-1) + eta`; only lands on the grade scale
/// for `k >= m - 2`.
pub fn vertex_exponent(m: u32, k: u32) -> Result<RegularityGrade> {
    RegularityGrade::new(Rational64::from_integer(k as i64 - (m as i64 - 1)), true)
}

/// Smoothness budget: the differentiability required of an observable to
/// reach regularity class `r` (exact rational version).
pub fn required_smoothness_rat(m: u32, r: Rational64) -> Result<u32> {
    let m_i = m as i64;
    let lo = Rational64::new(-(m_i - 2), m_i);
    if r < lo {
        return Err(Error::Domain(format!("r = {r} below -(m-2)/m")));
    }
    let inner = if r <= Rational64::new(-(m_i - 3), m_i) {
        r * Rational64::from_integer(m_i) + Rational64::from_integer(m_i - 1)
    } else {
        r * Rational64::from_integer(m_i) + Rational64::from_integer(m_i - 2)
    };
    Ok(inner.ceil().to_integer().max(0) as u32)
}

/// Float version of [`required_smoothness_rat`]; values within `1e-9` of an
/// integer are snapped before the ceiling is taken.
pub fn required_smoothness(m: u32, r: f64) -> Result<u32> {
    let m_f = m as f64;
    if r < -(m_f - 2.0) / m_f - 1e-12 {
        return Err(Error::Domain(format!("r = {r} below -(m-2)/m")));
    }
    let snap_ceil = |x: f64| -> i64 {
        let r = x.round();
        if (x - r).abs() <= 1e-9 {
            r as i64
        } else {
            x.ceil() as i64
        }
    };
    let inner = if r <= -(m_f - 3.0) / m_f + 1e-12 {
        m_f * r + (m_f - 1.0)
    } else {
        m_f * r + (m_f - 2.0)
    };
    Ok(snap_ceil(inner).max(0) as u32)
}
