//! Finite Taylor jets of functions of `(w, conj(w))` at the origin.
//!
//! Entries are stored as raw partial derivatives `d[i][j] =
//! D_w^i D_wbar^j f(0, 0)`, not Taylor-normalized coefficients; every
//! distribution formula in the crate is written in raw derivatives.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default truncation order; covers jets of degree <= 10 with margin.
pub const DEFAULT_ORDER: usize = 12;

/// Triangular table of partial derivatives at the origin, `i + j <= order`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexJet {
    order: usize,
    coeffs: Vec<Complex64>,
    real_valued: bool,
}

fn tri_len(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

fn idx(i: usize, j: usize) -> usize {
    let t = i + j;
    t * (t + 1) / 2 + i
}

impl ComplexJet {
    pub fn zero(order: usize) -> Self {
        ComplexJet {
            order,
            coeffs: vec![Complex64::new(0.0, 0.0); tri_len(order)],
            real_valued: true,
        }
    }

    /// The jet of the constant function `c`.
    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut jet = ComplexJet::zero(order);
        jet.coeffs[0] = c;
        jet.real_valued = c.im == 0.0;
        jet
    }

    /// The jet of the monomial `w^i conj(w)^j`: a single raw-derivative entry
    /// `d[i][j] = i! j!`.
    pub fn monomial(i: usize, j: usize) -> Self {
        let mut jet = ComplexJet::zero(i + j);
        jet.coeffs[idx(i, j)] = Complex64::new(factorial(i) * factorial(j), 0.0);
        jet.real_valued = i == j;
        jet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i + j <= self.order {
            self.coeffs[idx(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) -> Result<()> {
        if i + j > self.order {
            return Err(Error::OutOfRange(format!(
                "entry ({i}, {j}) beyond order {}",
                self.order
            )));
        }
        self.coeffs[idx(i, j)] = v;
        self.real_valued = false;
        Ok(())
    }

    /// Declare the jet real-valued after checking `d[j][i] = conj(d[i][j])`.
    pub fn mark_real_valued(&mut self) -> Result<()> {
        if !self.check_real_symmetry(1e-12) {
            return Err(Error::Domain(
                "jet entries violate d[j][i] = conj(d[i][j])".into(),
            ));
        }
        self.real_valued = true;
        Ok(())
    }

    pub fn check_real_symmetry(&self, tol: f64) -> bool {
        let scale = self.sup_coeff().max(1.0);
        for t in 0..=self.order {
            for i in 0..=t {
                let a = self.get(i, t - i);
                let b = self.get(t - i, i);
                if (a - b.conj()).norm() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn sup_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Taylor-polynomial evaluation: sum of `d[i][j] w^i conj(w)^j / (i! j!)`.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let wb = w.conj();
        let mut pow_w = vec![Complex64::new(1.0, 0.0); self.order + 1];
        let mut pow_wb = pow_w.clone();
        for t in 1..=self.order {
            pow_w[t] = pow_w[t - 1] * w;
            pow_wb[t] = pow_wb[t - 1] * wb;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for t in 0..=self.order {
            for i in 0..=t {
                let j = t - i;
                let c = self.coeffs[idx(i, j)];
                if c.norm_sqr() != 0.0 {
                    acc += c * pow_w[i] * pow_wb[j] / (factorial(i) * factorial(j));
                }
            }
        }
        acc
    }

    /// The jet whose entries are the `(n1, n2)` partial derivative of this
    /// one: a pure index shift in raw-derivative storage.
    pub fn derivative(&self, n1: usize, n2: usize) -> ComplexJet {
        let n = n1 + n2;
        if n > self.order {
            return ComplexJet::zero(0);
        }
        let mut out = ComplexJet::zero(self.order - n);
        for t in 0..=out.order {
            for i in 0..=t {
                out.coeffs[idx(i, t - i)] = self.get(i + n1, t - i + n2);
            }
        }
        out.real_valued = false;
        out
    }

    /// Leibniz product, truncated to the smaller order.
    pub fn product(&self, other: &ComplexJet) -> ComplexJet {
        let order = self.order.min(other.order);
        let mut out = ComplexJet::zero(order);
        for t in 0..=order {
            for i in 0..=t {
                let j = t - i;
                let mut acc = Complex64::new(0.0, 0.0);
                for p in 0..=i {
                    for q in 0..=j {
                        let c = binom_usize(i, p) * binom_usize(j, q);
                        acc += self.get(p, q) * other.get(i - p, j - q) * c;
                    }
                }
                out.coeffs[idx(i, j)] = acc;
            }
        }
        out.real_valued = self.real_valued && other.real_valued;
        out
    }

    /// Composition with `w -> c w` for `c > 0`: multiplies `d[i][j]` by
    /// `c^(i+j)`.
    pub fn rescale(&self, c: f64) -> ComplexJet {
        assert!(c > 0.0, "rescale needs a positive factor");
        let mut out = self.clone();
        for t in 0..=self.order {
            let f = c.powi(t as i32);
            for i in 0..=t {
                out.coeffs[idx(i, t - i)] *= f;
            }
        }
        out
    }

    /// The degree-`j` homogeneous part.
    pub fn homogeneous_part(&self, j: usize) -> Result<ComplexJet> {
        if j > self.order {
            return Err(Error::OutOfRange(format!(
                "degree {j} beyond order {}",
                self.order
            )));
        }
        let mut out = ComplexJet::zero(self.order);
        for i in 0..=j {
            out.coeffs[idx(i, j - i)] = self.get(i, j - i);
        }
        out.real_valued = false;
        Ok(out)
    }

    /// Pad with zero entries up to `order` (exact for polynomials).
    pub fn extend_to(&self, order: usize) -> ComplexJet {
        if order <= self.order {
            return self.clone();
        }
        let mut out = ComplexJet::zero(order);
        for t in 0..=self.order {
            for i in 0..=t {
                out.coeffs[idx(i, t - i)] = self.get(i, t - i);
            }
        }
        out.real_valued = self.real_valued;
        out
    }

    /// Multiplicative inverse jet by Newton iteration; requires a nonzero
    /// constant term.  `self.product(&inv)` is the constant-1 jet up to the
    /// truncation order.
    pub fn reciprocal(&self) -> Result<ComplexJet> {
        let c0 = self.get(0, 0);
        if c0.norm() < 1e-300 {
            return Err(Error::Domain(
                "cannot invert a jet with zero constant term".into(),
            ));
        }
        let mut x = ComplexJet::constant(1.0 / c0, self.order);
        let two = ComplexJet::constant(Complex64::new(2.0, 0.0), self.order);
        let steps = (usize::BITS - self.order.leading_zeros()) as usize + 2;
        for _ in 0..steps {
            // x <- x (2 - self x)
            let mut t = self.product(&x);
            for c in t.coeffs.iter_mut() {
                *c = -*c;
            }
            let t = t.add(&two);
            x = x.product(&t);
        }
        x.real_valued = self.real_valued;
        Ok(x)
    }

    pub fn add(&self, other: &ComplexJet) -> ComplexJet {
        let order = self.order.min(other.order);
        let mut out = ComplexJet::zero(order);
        for t in 0..=order {
            for i in 0..=t {
                out.coeffs[idx(i, t - i)] = self.get(i, t - i) + other.get(i, t - i);
            }
        }
        out.real_valued = self.real_valued && other.real_valued;
        out
    }

    pub fn scaled_by(&self, c: Complex64) -> ComplexJet {
        let mut out = self.clone();
        for v in out.coeffs.iter_mut() {
            *v *= c;
        }
        out.real_valued =
            self.real_valued && c.im == 0.0 && !out.coeffs.iter().any(|v| v.im != 0.0);
        out
    }

    /// Parse the plain-text jet literal format:
    /// a header line `order K`, then one line `i j re im` per nonzero entry.
    pub fn parse_literal(text: &str) -> Result<ComplexJet> {
        let mut lines = text
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty jet literal".into()))?;
        let mut hp = header.split_whitespace();
        match (hp.next(), hp.next()) {
            (Some("order"), Some(k)) => {
                let order: usize = k
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad order in header: {header}")))?;
                let mut jet = ComplexJet::zero(order);
                for line in lines {
                    let parts: Vec<&str> = line.split_whitespace().collect();
                    if parts.len() != 4 {
                        return Err(Error::Parse(format!("expected 'i j re im', got: {line}")));
                    }
                    let i: usize = parts[0]
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad index: {line}")))?;
                    let j: usize = parts[1]
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad index: {line}")))?;
                    let re: f64 = parts[2]
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad value: {line}")))?;
                    let im: f64 = parts[3]
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad value: {line}")))?;
                    jet.set(i, j, Complex64::new(re, im))?;
                }
                jet.real_valued = jet.check_real_symmetry(1e-12);
                Ok(jet)
            }
            _ => Err(Error::Parse(format!(
                "jet literal must start with 'order K', got: {header}"
            ))),
        }
    }

    pub fn format_literal(&self) -> String {
        let mut out = format!("order {}\n", self.order);
        for t in 0..=self.order {
            for i in 0..=t {
                let c = self.get(i, t - i);
                if c.norm_sqr() != 0.0 {
                    out.push_str(&format!("{} {} {:?} {:?}\n", i, t - i, c.re, c.im));
                }
            }
        }
        out
    }
}

pub fn factorial(n: usize) -> f64 {
    let mut v = 1.0f64;
    for i in 2..=n {
        v *= i as f64;
    }
    v
}

fn binom_usize(n: usize, k: usize) -> f64 {
    crate::special::binom_u64(n as u32, k as u32)
}

/// A perfect saddle in singular coordinates: multiplicity, density jet and
/// chart radius.
#[derive(Debug, Clone)]
pub struct SaddleModel {
    pub m: u32,
    pub v_jet: ComplexJet,
    pub epsilon: f64,
}

impl SaddleModel {
    pub fn new(m: u32, v_jet: ComplexJet, epsilon: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("multiplicity m = {m} must be >= 2")));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::Domain(format!(
                "chart radius {epsilon} must lie in (0, 1]"
            )));
        }
        let v0 = v_jet.get(0, 0);
        if !(v0.re > 0.0) || v0.im.abs() > 1e-12 * v0.re.abs().max(1.0) {
            return Err(Error::Domain(
                "density jet must have a positive real constant term".into(),
            ));
        }
        if !v_jet.check_real_symmetry(1e-9) {
            return Err(Error::Domain("density jet must be real-valued".into()));
        }
        Ok(SaddleModel { m, v_jet, epsilon })
    }

    /// The unit density on a chart of radius 1.
    pub fn flat(m: u32, order: usize) -> Self {
        SaddleModel {
            m,
            v_jet: ComplexJet::constant(Complex64::new(1.0, 0.0), order),
            epsilon: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn monomial_eval() {
        let w = Complex64::new(2.0, 1.0);
        assert_eq!(ComplexJet::monomial(1, 0).eval(w), w);
        assert_eq!(ComplexJet::zero(4).eval(w), Complex64::new(0.0, 0.0));
        let v = ComplexJet::monomial(1, 1).eval(Complex64::new(1.0, 1.0));
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let v = ComplexJet::monomial(2, 0).eval(w);
        assert!((v - w * w).norm() < 1e-15);
    }

    #[test]
    fn product_identity_and_commutativity() {
        let mut a = ComplexJet::zero(5);
        a.set(0, 0, Complex64::new(1.5, 0.0)).unwrap();
        a.set(2, 1, Complex64::new(0.0, -2.0)).unwrap();
        a.set(1, 1, Complex64::new(3.0, 1.0)).unwrap();
        let one = ComplexJet::constant(Complex64::new(1.0, 0.0), 5);
        assert_eq!(a.product(&one), a.clone().product(&one));
        let ua = a.product(&one);
        for t in 0..=5 {
            for i in 0..=t {
                assert_eq!(ua.get(i, t - i), a.get(i, t - i));
            }
        }
        let b = ComplexJet::monomial(0, 2).extend_to(5);
        let ab = a.product(&b);
        let ba = b.product(&a);
        for t in 0..=5 {
            for i in 0..=t {
                assert!((ab.get(i, t - i) - ba.get(i, t - i)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn monomial_product_is_monomial() {
        // w * conj(w) = w conj(w): raw derivative d[1][1] = 1!1! = 1
        let p = ComplexJet::monomial(1, 0)
            .extend_to(2)
            .product(&ComplexJet::monomial(0, 1).extend_to(2));
        let expect = ComplexJet::monomial(1, 1);
        assert_eq!(p.get(1, 1), expect.get(1, 1));
        assert_eq!(p.get(0, 0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rescale_examples() {
        let a = ComplexJet::monomial(2, 1);
        let eps: f64 = 0.37;
        let c = eps.powf(1.0 / 3.0);
        let s = a.rescale(c);
        assert!((s.get(2, 1) - a.get(2, 1) * eps).norm() < 1e-15);
        let id = a.rescale(1.0);
        assert_eq!(id, a);
    }

    #[test]
    fn homogeneous_parts_reassemble() {
        let mut a = ComplexJet::zero(4);
        a.set(0, 0, Complex64::new(1.0, 2.0)).unwrap();
        a.set(1, 2, Complex64::new(-0.5, 0.25)).unwrap();
        a.set(4, 0, Complex64::new(3.0, 0.0)).unwrap();
        let mut sum = ComplexJet::zero(4);
        for j in 0..=4 {
            sum = sum.add(&a.homogeneous_part(j).unwrap());
        }
        for t in 0..=4 {
            for i in 0..=t {
                assert_eq!(sum.get(i, t - i), a.get(i, t - i));
            }
        }
        assert!(a.homogeneous_part(5).is_err());
        let c = ComplexJet::constant(Complex64::new(2.0, 0.0), 3);
        assert_eq!(c.homogeneous_part(0).unwrap().get(0, 0), c.get(0, 0));
        let m = ComplexJet::monomial(1, 2);
        assert_eq!(m.homogeneous_part(3).unwrap().get(1, 2), m.get(1, 2));
    }

    #[test]
    fn reciprocal_round_trip() {
        let mut v = ComplexJet::constant(Complex64::new(2.0, 0.0), 6);
        v.set(1, 0, Complex64::new(0.3, 0.0)).unwrap();
        v.set(0, 1, Complex64::new(0.3, 0.0)).unwrap();
        v.set(1, 1, Complex64::new(-0.8, 0.0)).unwrap();
        let inv = v.reciprocal().unwrap();
        let p = v.product(&inv);
        assert!((p.get(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        for t in 1..=6 {
            for i in 0..=t {
                assert!(p.get(i, t - i).norm() < 1e-10, "({}, {})", i, t - i);
            }
        }
    }

    #[test]
    fn literal_round_trip() {
        let mut a = ComplexJet::zero(3);
        a.set(1, 2, Complex64::new(0.125, -7.5)).unwrap();
        a.set(0, 0, Complex64::new(1e-17, 2.0)).unwrap();
        let text = a.format_literal();
        let b = ComplexJet::parse_literal(&text).unwrap();
        assert_eq!(a.order(), b.order());
        for t in 0..=3 {
            for i in 0..=t {
                assert_eq!(a.get(i, t - i), b.get(i, t - i));
            }
        }
        assert!(ComplexJet::parse_literal("garbage").is_err());
        assert!(ComplexJet::parse_literal("order 2\n0 0 1").is_err());
        assert!(ComplexJet::parse_literal("order 1\n1 1 1.0 0.0").is_err());
    }

    proptest! {
        #[test]
        fn product_eval_consistency(seed in 0u64..5000) {
            // eval(a*b) = eval(a)*eval(b) + O(|w|^(K+1)) at |w| = 1e-3
            let mut rng = seed;
            let mut next = || {
                rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((rng >> 33) as f64 / (1u64 << 31) as f64) - 1.0
            };
            let mut a = ComplexJet::zero(5);
            let mut b = ComplexJet::zero(5);
            for t in 0..=5usize {
                for i in 0..=t {
                    a.set(i, t - i, Complex64::new(next(), next())).unwrap();
                    b.set(i, t - i, Complex64::new(next(), next())).unwrap();
                }
            }
            let w = Complex64::new(0.7e-3, -0.714e-3);
            let lhs = a.product(&b).eval(w);
            let rhs = a.eval(w) * b.eval(w);
            prop_assert!((lhs - rhs).norm() <= 1e-6 * rhs.norm().max(1e-12));
        }

        #[test]
        fn real_valued_jets_evaluate_real(seed in 0u64..2000) {
            let mut rng = seed;
            let mut next = || {
                rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((rng >> 33) as f64 / (1u64 << 31) as f64) - 1.0
            };
            let mut a = ComplexJet::zero(4);
            for t in 0..=4usize {
                for i in 0..=t {
                    let j = t - i;
                    if i < j { continue; }
                    let v = Complex64::new(next(), if i == j { 0.0 } else { next() });
                    a.set(i, j, v).unwrap();
                    if i != j {
                        a.set(j, i, v.conj()).unwrap();
                    }
                }
            }
            a.mark_real_valued().unwrap();
            let w = Complex64::new(next(), next());
            let v = a.eval(w);
            prop_assert!(v.im.abs() <= 1e-12 * v.norm().max(1.0));
        }
    }
}
