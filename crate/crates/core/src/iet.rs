//! Interval exchange transformations and the weighted endpoint-norm
//! machinery: the orbit-avoidance check, the endpoint seminorm, the graded
//! norm, one-sided boundary constants, the geometric-type condition and the
//! singular basis functions.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::asymptotics::power_limit;
use crate::error::{Error, Result};
use crate::jets::factorial;

// ---------------------------------------------------------------------------
// Exact scalars: a + b sqrt(d) with rational a, b

/// An element of a real quadratic field, `a + b sqrt(d)` with `d >= 0`
/// (`d = 0` encodes a plain rational).  Supports the exact comparisons the
/// orbit-avoidance check needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadExt {
    pub a: Rational64,
    pub b: Rational64,
    pub d: i64,
}

impl QuadExt {
    pub fn rational(a: Rational64) -> Self {
        QuadExt {
            a,
            b: Rational64::zero(),
            d: 0,
        }
    }

    pub fn new(a: Rational64, b: Rational64, d: i64) -> Result<Self> {
        if d < 0 {
            return Err(Error::Domain("negative discriminant".into()));
        }
        Ok(if b.is_zero() {
            QuadExt::rational(a)
        } else {
            QuadExt { a, b, d }
        })
    }

    pub fn to_f64(self) -> f64 {
        self.a.to_f64().unwrap() + self.b.to_f64().unwrap() * (self.d as f64).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn same_field(&self, other: &QuadExt) -> Option<i64> {
        match (self.b.is_zero(), other.b.is_zero()) {
            (true, true) => Some(0),
            (true, false) => Some(other.d),
            (false, true) => Some(self.d),
            (false, false) => (self.d == other.d).then_some(self.d),
        }
    }

    pub fn add(&self, other: &QuadExt) -> Result<QuadExt> {
        let d = self
            .same_field(other)
            .ok_or_else(|| Error::Domain("mixed quadratic fields".into()))?;
        QuadExt::new(self.a + other.a, self.b + other.b, d)
    }

    pub fn sub(&self, other: &QuadExt) -> Result<QuadExt> {
        let d = self
            .same_field(other)
            .ok_or_else(|| Error::Domain("mixed quadratic fields".into()))?;
        QuadExt::new(self.a - other.a, self.b - other.b, d)
    }

    /// Exact sign of `a + b sqrt(d)`.
    pub fn signum(&self) -> i32 {
        if self.b.is_zero() {
            return if self.a.is_zero() {
                0
            } else if self.a.is_positive() {
                1
            } else {
                -1
            };
        }
        if self.a.is_zero() {
            return if self.b.is_positive() { 1 } else { -1 };
        }
        let sa = self.a.is_positive();
        let sb = self.b.is_positive();
        if sa && sb {
            return 1;
        }
        if !sa && !sb {
            return -1;
        }
        // opposite signs: compare a^2 against b^2 d
        let a2 = self.a * self.a;
        let b2d = self.b * self.b * Rational64::from_integer(self.d);
        match (sa, a2.cmp(&b2d)) {
            (_, std::cmp::Ordering::Equal) => 0,
            (true, std::cmp::Ordering::Greater) => 1,
            (true, std::cmp::Ordering::Less) => -1,
            (false, std::cmp::Ordering::Greater) => -1,
            (false, std::cmp::Ordering::Less) => 1,
        }
    }

    pub fn lt(&self, other: &QuadExt) -> Result<bool> {
        Ok(self.sub(other)?.signum() < 0)
    }
}

/// Parse a length literal: decimals, `p/q`, `sqrt(D)`, and the forms
/// `a+b*sqrt(D)`, `a-sqrt(D)`, `(a+b*sqrt(D))/c`.
pub fn parse_length(text: &str) -> Result<(f64, Option<QuadExt>)> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if t.contains("sqrt(-") {
        return Err(Error::Parse(format!("negative discriminant in {text}")));
    }
    if let Some(q) = parse_quadext(&t) {
        return Ok((q.to_f64(), Some(q)));
    }
    let v: f64 = t
        .parse()
        .map_err(|_| Error::Parse(format!("bad length literal: {text}")))?;
    Ok((v, None))
}

fn parse_rat(t: &str) -> Option<Rational64> {
    if let Some((p, q)) = t.split_once('/') {
        let p: i64 = p.parse().ok()?;
        let q: i64 = q.parse().ok()?;
        if q == 0 {
            return None;
        }
        return Some(Rational64::new(p, q));
    }
    t.parse::<i64>().ok().map(Rational64::from_integer)
}

fn parse_quadext(t: &str) -> Option<QuadExt> {
    // (body)/c
    if let Some(rest) = t.strip_prefix('(') {
        let (body, den) = rest.split_once(")/")?;
        let inner = parse_quadext(body)?;
        let c = parse_rat(den)?;
        if c.is_zero() {
            return None;
        }
        return QuadExt::new(inner.a / c, inner.b / c, inner.d).ok();
    }
    if let Some((b, d)) = parse_surd(t) {
        return QuadExt::new(Rational64::zero(), b, d).ok();
    }
    // a +- surd, or surd +- a; find the separating sign (not leading, not
    // inside "sqrt(")
    let bytes = t.as_bytes();
    for i in (1..bytes.len()).rev() {
        if bytes[i] != b'+' && bytes[i] != b'-' {
            continue;
        }
        let (head, tail) = (&t[..i], &t[i + 1..]);
        let neg = bytes[i] == b'-';
        if let (Some(a), Some((b, d))) = (parse_rat(head), parse_surd(tail)) {
            let b = if neg { -b } else { b };
            return QuadExt::new(a, b, d).ok();
        }
        if let (Some((b, d)), Some(a)) = (parse_surd(head), parse_rat(tail)) {
            let a = if neg { -a } else { a };
            return QuadExt::new(a, b, d).ok();
        }
    }
    parse_rat(t).map(QuadExt::rational)
}

fn parse_surd(t: &str) -> Option<(Rational64, i64)> {
    // [coef*]sqrt(D)
    let (coef, rest) = match t.split_once("*sqrt(") {
        Some((c, r)) => (parse_rat(c)?, r),
        None => (Rational64::from_integer(1), t.strip_prefix("sqrt(")?),
    };
    let d: i64 = rest.strip_suffix(')')?.parse().ok()?;
    if d < 0 {
        return None;
    }
    Some((coef, d))
}

// ---------------------------------------------------------------------------
// The interval exchange transformation

/// An IET given by its alphabet, the two position bijections and the length
/// vector.  Exact lengths, when available, drive the exact orbit checks.
#[derive(Debug, Clone)]
pub struct IetSpec {
    pub labels: Vec<String>,
    /// position (0-based) of each label before the exchange
    pub pi0: Vec<usize>,
    /// position (0-based) of each label after the exchange
    pub pi1: Vec<usize>,
    pub lambda: Vec<f64>,
    pub lambda_exact: Option<Vec<QuadExt>>,
}

impl IetSpec {
    pub fn new(
        labels: Vec<String>,
        pi0: Vec<usize>,
        pi1: Vec<usize>,
        lambda: Vec<f64>,
        lambda_exact: Option<Vec<QuadExt>>,
    ) -> Result<Self> {
        let d = labels.len();
        if d == 0 {
            return Err(Error::Domain("empty alphabet".into()));
        }
        if pi0.len() != d || pi1.len() != d || lambda.len() != d {
            return Err(Error::Domain(
                "label, permutation and length counts disagree".into(),
            ));
        }
        for pi in [&pi0, &pi1] {
            let mut seen = vec![false; d];
            for &p in pi {
                if p >= d || seen[p] {
                    return Err(Error::Domain(
                        "permutation is not a bijection onto 0..d".into(),
                    ));
                }
                seen[p] = true;
            }
        }
        if lambda.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::Domain("all lengths must be positive".into()));
        }
        if let Some(ex) = &lambda_exact {
            if ex.len() != d {
                return Err(Error::Domain("exact length count disagrees".into()));
            }
            let mut dd = 0i64;
            for q in ex {
                if q.signum() <= 0 {
                    return Err(Error::Domain("exact lengths must be positive".into()));
                }
                if !q.b.is_zero() {
                    if dd != 0 && q.d != dd {
                        return Err(Error::Domain("exact lengths mix quadratic fields".into()));
                    }
                    dd = q.d;
                }
            }
        }
        Ok(IetSpec {
            labels,
            pi0,
            pi1,
            lambda,
            lambda_exact,
        })
    }

    pub fn total_length(&self) -> f64 {
        self.lambda.iter().sum()
    }

    /// Left endpoint of the interval of `label` before the exchange.
    pub fn left_endpoint(&self, label: usize) -> f64 {
        let my_pos = self.pi0[label];
        (0..self.labels.len())
            .filter(|&b| self.pi0[b] < my_pos)
            .map(|b| self.lambda[b])
            .sum()
    }

    /// Translation offset of `label`: new position minus old position.
    pub fn offset(&self, label: usize) -> f64 {
        let new_left: f64 = (0..self.labels.len())
            .filter(|&b| self.pi1[b] < self.pi1[label])
            .map(|b| self.lambda[b])
            .sum();
        new_left - self.left_endpoint(label)
    }

    /// Which interval contains `x` (by the pre-exchange layout).
    pub fn label_at(&self, x: f64) -> Result<usize> {
        if !(x >= 0.0) || x >= self.total_length() {
            return Err(Error::Domain(format!("x = {x} outside [0, |I|)")));
        }
        let mut acc = 0.0;
        let d = self.labels.len();
        for pos in 0..d {
            let label = (0..d).find(|&b| self.pi0[b] == pos).unwrap();
            let next = acc + self.lambda[label];
            if x < next {
                return Ok(label);
            }
            acc = next;
        }
        Err(Error::Domain(format!("x = {x} outside [0, |I|)")))
    }

    /// Apply the exchange to a point.
    pub fn apply(&self, x: f64) -> Result<f64> {
        let label = self.label_at(x)?;
        Ok(x + self.offset(label))
    }

    /// Interior discontinuity points (left endpoints of all intervals except
    /// the first).
    pub fn discontinuities(&self) -> Vec<f64> {
        let d = self.labels.len();
        (0..d)
            .filter(|&a| self.pi0[a] > 0)
            .map(|a| self.left_endpoint(a))
            .collect()
    }

    /// Parse the plain-text spec format: `labels:`, `pi0:`, `pi1:` and
    /// `lambda:` lines.  The `pi` lines list labels in position order;
    /// lengths come in label order.
    pub fn parse(text: &str) -> Result<IetSpec> {
        let mut labels: Option<Vec<String>> = None;
        let mut pi0_names: Option<Vec<String>> = None;
        let mut pi1_names: Option<Vec<String>> = None;
        let mut lambda_lits: Option<Vec<String>> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected 'key: values', got: {line}")))?;
            let vals: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            match key.trim() {
                "labels" => labels = Some(vals),
                "pi0" => pi0_names = Some(vals),
                "pi1" => pi1_names = Some(vals),
                "lambda" => lambda_lits = Some(vals),
                other => return Err(Error::Parse(format!("unknown key: {other}"))),
            }
        }
        let labels = labels.ok_or_else(|| Error::Parse("missing labels line".into()))?;
        let to_perm = |names: Vec<String>| -> Result<Vec<usize>> {
            let mut perm = vec![usize::MAX; labels.len()];
            if names.len() != labels.len() {
                return Err(Error::Parse("permutation length mismatch".into()));
            }
            for (pos, name) in names.iter().enumerate() {
                let idx = labels
                    .iter()
                    .position(|l| l == name)
                    .ok_or_else(|| Error::Parse(format!("unknown label {name}")))?;
                perm[idx] = pos;
            }
            Ok(perm)
        };
        let pi0 = to_perm(pi0_names.ok_or_else(|| Error::Parse("missing pi0 line".into()))?)?;
        let pi1 = to_perm(pi1_names.ok_or_else(|| Error::Parse("missing pi1 line".into()))?)?;
        let lits = lambda_lits.ok_or_else(|| Error::Parse("missing lambda line".into()))?;
        let mut lambda = Vec::new();
        let mut exact = Vec::new();
        let mut all_exact = true;
        for lit in &lits {
            let (v, q) = parse_length(lit)?;
            lambda.push(v);
            match q {
                Some(q) => exact.push(q),
                None => all_exact = false,
            }
        }
        let lambda_exact = if all_exact { Some(exact) } else { None };
        IetSpec::new(labels, pi0, pi1, lambda, lambda_exact)
    }

    pub fn format(&self) -> String {
        let d = self.labels.len();
        let by_pos = |pi: &Vec<usize>| -> String {
            let mut names = vec![String::new(); d];
            for (label, &pos) in pi.iter().enumerate() {
                names[pos] = self.labels[label].clone();
            }
            names.join(" ")
        };
        format!(
            "labels: {}\npi0: {}\npi1: {}\nlambda: {}\n",
            self.labels.join(" "),
            by_pos(&self.pi0),
            by_pos(&self.pi1),
            self.lambda
                .iter()
                .map(|l| format!("{l:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        )
    }
}

/// Forward orbits of all discontinuities must avoid all discontinuities up
/// to `depth`.  Runs in exact arithmetic when exact lengths are available
/// (collision tolerance zero), in floats with tolerance `1e-12` otherwise.
pub fn keane_check(spec: &IetSpec, depth: u32) -> bool {
    assert!(depth >= 1, "depth must be >= 1");
    if spec.labels.len() == 1 {
        return true;
    }
    match &spec.lambda_exact {
        Some(_) => keane_exact(spec, depth).unwrap_or(false),
        None => keane_float(spec, depth),
    }
}

fn keane_exact(spec: &IetSpec, depth: u32) -> Result<bool> {
    let exact = spec.lambda_exact.as_ref().unwrap();
    let d = spec.labels.len();
    let zero = QuadExt::rational(Rational64::zero());
    let mut lefts0 = vec![zero; d];
    let mut lefts1 = vec![zero; d];
    for a in 0..d {
        for b in 0..d {
            if spec.pi0[b] < spec.pi0[a] {
                lefts0[a] = lefts0[a].add(&exact[b])?;
            }
            if spec.pi1[b] < spec.pi1[a] {
                lefts1[a] = lefts1[a].add(&exact[b])?;
            }
        }
    }
    let offsets: Vec<QuadExt> = (0..d).map(|a| lefts1[a].sub(&lefts0[a]).unwrap()).collect();
    let rights0: Vec<QuadExt> = (0..d).map(|a| lefts0[a].add(&exact[a]).unwrap()).collect();
    let discs: Vec<QuadExt> = (0..d)
        .filter(|&a| spec.pi0[a] > 0)
        .map(|a| lefts0[a])
        .collect();

    let label_of = |x: &QuadExt| -> Result<usize> {
        for a in 0..d {
            if lefts0[a].sub(x)?.signum() <= 0 && x.lt(&rights0[a])? {
                return Ok(a);
            }
        }
        Err(Error::Domain("point escaped the interval".into()))
    };

    for start in &discs {
        let mut x = *start;
        for _ in 0..depth {
            let a = label_of(&x)?;
            x = x.add(&offsets[a])?;
            for disc in &discs {
                if x.sub(disc)?.is_zero() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn keane_float(spec: &IetSpec, depth: u32) -> bool {
    let discs = spec.discontinuities();
    let total = spec.total_length();
    for &start in &discs {
        let mut x = start;
        for _ in 0..depth {
            x = match spec.apply(x) {
                Ok(v) => v.clamp(0.0, total * (1.0 - 1e-16)),
                Err(_) => return false,
            };
            if discs.iter().any(|&dsc| (x - dsc).abs() <= 1e-12) {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Sampled functions with endpoint refinement

/// One sampled point: abscissa and derivative values `D^0 .. D^max`.
#[derive(Debug, Clone)]
pub struct SamplePoint {
    pub x: f64,
    pub derivs: Vec<Complex64>,
}

/// Samples of a piecewise function on the open intervals, with geometric
/// refinement toward both endpoints (ratio 1/2 down to `2^-40`).  Grid
/// suprema of weighted derivatives are lower bounds of the true suprema and
/// are reported as such.
#[derive(Debug, Clone)]
pub struct PiecewiseSamples {
    pub intervals: Vec<(f64, f64)>,
    pub points: Vec<Vec<SamplePoint>>,
    pub max_deriv: usize,
    pub refinement_ratio: f64,
}

pub const REFINE_DEPTH: i32 = 40;
const SUBDIVISION: usize = 8;

impl PiecewiseSamples {
    /// Sample `f(order, x) = D^order phi(x)` on each open interval.
    pub fn from_fn(
        intervals: &[(f64, f64)],
        max_deriv: usize,
        f: &dyn Fn(usize, f64) -> Complex64,
    ) -> Result<PiecewiseSamples> {
        if intervals.iter().any(|&(l, r)| !(l < r)) {
            return Err(Error::Domain("degenerate interval".into()));
        }
        let mut points = Vec::with_capacity(intervals.len());
        for &(l, r) in intervals {
            let h = 0.5 * (r - l);
            let mut xs: Vec<f64> = Vec::new();
            for q in 0..REFINE_DEPTH {
                let near = h * 2f64.powi(-(q + 1));
                let far = h * 2f64.powi(-q);
                for j in 0..SUBDIVISION {
                    let t = far - (far - near) * j as f64 / SUBDIVISION as f64;
                    xs.push(l + t);
                    xs.push(r - t);
                }
            }
            xs.push(l + h * 2f64.powi(-REFINE_DEPTH));
            xs.push(r - h * 2f64.powi(-REFINE_DEPTH));
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            let pts = xs
                .into_iter()
                .map(|x| SamplePoint {
                    x,
                    derivs: (0..=max_deriv).map(|o| f(o, x)).collect(),
                })
                .collect();
            points.push(pts);
        }
        Ok(PiecewiseSamples {
            intervals: intervals.to_vec(),
            points,
            max_deriv,
            refinement_ratio: 0.5,
        })
    }

    fn deriv_column(&self, interval: usize, order: usize) -> Result<Vec<(f64, Complex64)>> {
        if order > self.max_deriv {
            return Err(Error::MissingDerivative(order));
        }
        Ok(self.points[interval]
            .iter()
            .map(|p| (p.x, p.derivs[order]))
            .collect())
    }

    /// CSV exchange format: one row per point,
    /// `interval, x, d0_re, d0_im, d1_re, d1_im, ...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("interval,x");
        for o in 0..=self.max_deriv {
            out.push_str(&format!(",d{o}_re,d{o}_im"));
        }
        out.push('\n');
        for (i, pts) in self.points.iter().enumerate() {
            for p in pts {
                out.push_str(&format!("{i},{:?}", p.x));
                for d in &p.derivs {
                    out.push_str(&format!(",{:?},{:?}", d.re, d.im));
                }
                out.push('\n');
            }
        }
        out
    }

    /// Parse the CSV exchange format; interval bounds are recovered from the
    /// extreme abscissae per interval, extended by the refinement margin.
    pub fn from_csv(text: &str, intervals: &[(f64, f64)]) -> Result<PiecewiseSamples> {
        let mut lines = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty samples CSV".into()))?;
        let cols = header.split(',').count();
        if cols < 4 || cols % 2 != 0 {
            return Err(Error::Parse(format!("bad samples header: {header}")));
        }
        let max_deriv = (cols - 2) / 2 - 1;
        let mut points: Vec<Vec<SamplePoint>> = vec![Vec::new(); intervals.len()];
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != cols {
                return Err(Error::Parse(format!("bad samples row: {line}")));
            }
            let interval: usize = fields[0]
                .parse()
                .map_err(|_| Error::Parse(format!("bad interval: {line}")))?;
            if interval >= intervals.len() {
                return Err(Error::Parse(format!("interval {interval} out of range")));
            }
            let x: f64 = fields[1]
                .parse()
                .map_err(|_| Error::Parse(format!("bad x: {line}")))?;
            let mut derivs = Vec::with_capacity(max_deriv + 1);
            for o in 0..=max_deriv {
                let re: f64 = fields[2 + 2 * o]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad value: {line}")))?;
                let im: f64 = fields[3 + 2 * o]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad value: {line}")))?;
                derivs.push(Complex64::new(re, im));
            }
            points[interval].push(SamplePoint { x, derivs });
        }
        for pts in points.iter_mut() {
            pts.sort_by(|a, b| a.x.total_cmp(&b.x));
        }
        Ok(PiecewiseSamples {
            intervals: intervals.to_vec(),
            points,
            max_deriv,
            refinement_ratio: 0.5,
        })
    }

    /// `L^1` norm of `D^order phi` over all intervals: composite trapezoid on
    /// the refined grid plus power-law extrapolated endpoint tails.
    pub fn l1_norm(&self, order: usize) -> Result<f64> {
        let mut total = 0.0;
        for i in 0..self.intervals.len() {
            let col = self.deriv_column(i, order)?;
            for w in col.windows(2) {
                total += 0.5 * (w[0].1.norm() + w[1].1.norm()) * (w[1].0 - w[0].0);
            }
            let (l, r) = self.intervals[i];
            let tail = |p0: &SamplePoint, p1: &SamplePoint, end: f64| -> f64 {
                let (d0, d1) = ((p0.x - end).abs(), (p1.x - end).abs());
                let (v0, v1) = (p0.derivs[order].norm(), p1.derivs[order].norm());
                if v0 <= 0.0 || v1 <= 0.0 || d0 >= d1 {
                    return 0.0;
                }
                // |phi| ~ c dist^-a near the endpoint
                let a = -(v1 / v0).ln() / (d1 / d0).ln();
                if !(a < 1.0) {
                    // not integrable by the power-law model; count the plain
                    // rectangle as the honest lower bound
                    return v0 * d0;
                }
                v0 * d0 / (1.0 - a)
            };
            let pts = &self.points[i];
            total += tail(&pts[0], &pts[1], l);
            let n = pts.len();
            total += tail(&pts[n - 1], &pts[n - 2], r);
        }
        Ok(total)
    }
}

/// The weighted endpoint seminorm of `D^n phi`: grid supremum of
/// `|D^(n+1) phi(x)|` weighted by `(x - l)^(1+a)` on the left half of each
/// interval and by `(r - x)^(1+a)` on the right half.
pub fn endpoint_seminorm(samples: &PiecewiseSamples, n: usize, a: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::Domain(format!("weight a = {a} must lie in [0, 1)")));
    }
    let mut sup: f64 = 0.0;
    for i in 0..samples.intervals.len() {
        let (l, r) = samples.intervals[i];
        let mid = 0.5 * (l + r);
        for (x, v) in samples.deriv_column(i, n + 1)? {
            let w = if x <= mid {
                (x - l).powf(1.0 + a)
            } else {
                (r - x).powf(1.0 + a)
            };
            sup = sup.max(v.norm() * w);
        }
    }
    Ok(sup)
}

/// Seminorm of `D^(order-1) phi` restricted to a window inside one interval,
/// with the symmetric weight `min(x - l, r - x)^(1+a)` on `D^order phi`.
pub fn endpoint_seminorm_window(
    samples: &PiecewiseSamples,
    interval: usize,
    window: (f64, f64),
    order: usize,
    a: f64,
) -> Result<f64> {
    let (l, r) = samples.intervals[interval];
    let mut sup: f64 = 0.0;
    for (x, v) in samples.deriv_column(interval, order)? {
        if x >= window.0 && x <= window.1 {
            let w = (x - l).min(r - x).powf(1.0 + a);
            sup = sup.max(v.norm() * w);
        }
    }
    Ok(sup)
}

/// `L^1` norm of `D^order` restricted to a window.
pub fn l1_norm_window(
    samples: &PiecewiseSamples,
    interval: usize,
    window: (f64, f64),
    order: usize,
) -> Result<f64> {
    let col = samples.deriv_column(interval, order)?;
    let mut total = 0.0;
    for w in col.windows(2) {
        if w[0].0 >= window.0 && w[1].0 <= window.1 {
            total += 0.5 * (w[0].1.norm() + w[1].1.norm()) * (w[1].0 - w[0].0);
        }
    }
    Ok(total)
}

/// The graded norm: `sum over k <= n of |D^k phi|_(L^1) + p_a(D^n phi)`.
pub fn graded_norm(samples: &PiecewiseSamples, n: usize, a: f64) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..=n {
        total += samples.l1_norm(k)?;
    }
    Ok(total + endpoint_seminorm(samples, n, a)?)
}

/// One-sided boundary constants of `D^n phi` on one interval: extrapolated
/// limits of `D^(n+1) phi (x - l)^(1+a)` (with the alternating sign of the
/// definition) and of `D^(n+1) phi (r - x)^(1+a)`.
pub fn boundary_constants(
    samples: &PiecewiseSamples,
    interval: usize,
    n: usize,
    a: f64,
) -> Result<(Complex64, Complex64)> {
    let (l, r) = samples.intervals[interval];
    let col = samples.deriv_column(interval, n + 1)?;
    let one_sided = |toward_left: bool| -> Result<Complex64> {
        let mut seq: Vec<(f64, Complex64)> = col
            .iter()
            .map(|&(x, v)| {
                let dist = if toward_left { x - l } else { r - x };
                (dist, v * dist.powf(1.0 + a))
            })
            .collect();
        seq.sort_by(|p, q| q.0.partial_cmp(&p.0).unwrap());
        let tail: Vec<(f64, Complex64)> = seq.iter().rev().take(12).rev().cloned().collect();
        let est = power_limit(&tail, 0.0)?;
        // non-convergence flag: the weighted values must settle
        let v1 = tail[tail.len() - 1].1;
        let v2 = tail[tail.len() - 2].1;
        let v3 = tail[tail.len() - 3].1;
        let late = (v1 - v2).norm();
        let early = (v2 - v3).norm();
        if late > 1e-10 && late > 0.9 * early {
            return Err(Error::NoLimit(format!(
                "weighted derivative does not settle near the endpoint (last {v1}, estimate {est})"
            )));
        }
        Ok(est)
    };
    let sign = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
    let c_plus = one_sided(true)? * sign;
    let c_minus = one_sided(false)?;
    Ok((c_plus, c_minus))
}

/// The geometric-type condition: the products of right constants at the two
/// final-position labels and of left constants at the two first-position
/// labels both vanish (below `1e-8` of the constants' scale).
pub fn geometric_type_check(
    constants: &[(Complex64, Complex64)],
    spec: &IetSpec,
    _n: usize,
    _a: f64,
) -> bool {
    let d = spec.labels.len();
    assert_eq!(constants.len(), d, "one constant pair per label");
    let last0 = (0..d).find(|&a| spec.pi0[a] == d - 1).unwrap();
    let last1 = (0..d).find(|&a| spec.pi1[a] == d - 1).unwrap();
    let first0 = (0..d).find(|&a| spec.pi0[a] == 0).unwrap();
    let first1 = (0..d).find(|&a| spec.pi1[a] == 0).unwrap();
    let scale = constants
        .iter()
        .flat_map(|&(p, m)| [p.norm(), m.norm()])
        .fold(0.0f64, f64::max)
        .max(1e-30);
    let right = (constants[last0].1 * constants[last1].1).norm();
    let left = (constants[first0].0 * constants[first1].0).norm();
    right <= 1e-8 * scale * scale && left <= 1e-8 * scale * scale
}

/// The singular basis function attached to a saddle of multiplicity `m` and
/// degree `k` on a one-sided window: `dist^((k-(m-2))/m) / (m^2 k!)`, with
/// an extra `-log(dist)` factor when `k = m-2 mod m`; zero off the window.
/// The window length is the caller's choice.
pub fn singular_basis_fn(
    m: u32,
    k: u32,
    interval: (f64, f64),
    from_left: bool,
) -> impl Fn(f64) -> f64 {
    let (l, r) = interval;
    let alpha = (k as f64 - (m as f64 - 2.0)) / m as f64;
    let has_log = (k as i64 - (m as i64 - 2)).rem_euclid(m as i64) == 0;
    let norm = 1.0 / ((m * m) as f64 * factorial(k as usize));
    move |s: f64| {
        if s <= l || s >= r {
            return 0.0;
        }
        let dist = if from_left { s - l } else { r - s };
        if has_log {
            -dist.powf(alpha) * dist.ln() * norm
        } else {
            dist.powf(alpha) * norm
        }
    }
}
